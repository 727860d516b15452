mod common;

use common::oracle;
use proptest::prelude::*;
use rand::Rng;
use waveliq::wavelet::{
    convolve_subbands, decompose, decompose_with, split_pair, split_quad, CdaVariant, PyramidLevel, MIN_LEVEL_INPUT,
};
use waveliq::{default_filters, Error, Grid, LumaImage};

fn luma_from(m: &oracle::Mat) -> LumaImage {
    let (h, w) = oracle::dims(m);
    LumaImage::new(w, h, m.concat()).unwrap()
}

fn matches_oracle(lvl: &PyramidLevel, o: &oracle::Level) -> bool {
    (0..4).all(|b| {
        oracle::same_bits(lvl.subbands.as_array()[b], &o.s[b])
            && oracle::same_bits(&lvl.pairs[b].c_a, &o.c_a[b])
            && oracle::same_bits(&lvl.pairs[b].c_d, &o.c_d[b])
            && oracle::same_bits(&lvl.quads[b].c_aa, &o.c_aa[b])
            && oracle::same_bits(&lvl.quads[b].c_ad, &o.c_ad[b])
            && oracle::same_bits(&lvl.quads[b].c_da, &o.c_da[b])
            && oracle::same_bits(&lvl.quads[b].c_dd, &o.c_dd[b])
    })
}

fn detail_grids(lvl: &PyramidLevel) -> Vec<&Grid> {
    let mut out = vec![&lvl.subbands.s_lh, &lvl.subbands.s_hl, &lvl.subbands.s_hh];
    for b in 0..4 {
        out.extend([
            &lvl.pairs[b].c_d,
            &lvl.quads[b].c_ad,
            &lvl.quads[b].c_da,
            &lvl.quads[b].c_dd,
        ]);
    }
    out
}

fn all_grids(lvl: &PyramidLevel) -> Vec<&Grid> {
    let mut out: Vec<&Grid> = lvl.subbands.as_array().to_vec();
    for b in 0..4 {
        out.extend([&lvl.pairs[b].c_a, &lvl.pairs[b].c_d]);
        out.extend([
            &lvl.quads[b].c_aa,
            &lvl.quads[b].c_ad,
            &lvl.quads[b].c_da,
            &lvl.quads[b].c_dd,
        ]);
    }
    out
}

/// Largest depth whose every recursion input is at least the minimum size.
fn max_depth(h: usize, w: usize) -> usize {
    let (mut h, mut w, mut k) = (h, w, 0);
    while h >= MIN_LEVEL_INPUT && w >= MIN_LEVEL_INPUT && k < 4 {
        k += 1;
        h -= 1;
        w -= 1;
    }
    k
}

#[test]
fn constant_image_kills_every_detail() {
    for v in [0.0, 0.37, 1.0] {
        let img = LumaImage::new(64, 64, vec![v; 64 * 64]).unwrap();
        let pyr = decompose(&img, &default_filters(), 2).unwrap();
        for lvl in pyr.levels() {
            for g in detail_grids(lvl) {
                assert!(
                    g.max_abs() <= 1e-12,
                    "detail coefficient {} for constant {v}",
                    g.max_abs()
                );
            }
        }
    }
}

#[test]
fn single_level_equals_manual_stages() {
    let img = common::random_luma(17, 12, 3);
    let pyr = decompose(&img, &default_filters(), 1).unwrap();
    let sb = convolve_subbands(&img, &default_filters()).unwrap();
    let lvl = pyr.level(1).unwrap();
    assert_eq!(lvl.subbands, sb);
    for (b, s) in sb.as_array().into_iter().enumerate() {
        let pair = split_pair(s).unwrap();
        assert_eq!(lvl.quads[b], split_quad(&pair).unwrap());
        assert_eq!(lvl.pairs[b], pair);
    }
}

#[test]
fn random_32x32_two_levels_match_oracle() {
    let img = common::random_luma(32, 32, 42);
    let m: oracle::Mat = img.samples().chunks(32).map(<[f64]>::to_vec).collect();
    let pyr = decompose(&img, &default_filters(), 2).unwrap();
    let want = oracle::pyramid(&m, 2);
    for (lvl, o) in pyr.levels().iter().zip(&want) {
        assert!(matches_oracle(lvl, o));
    }
}

#[test]
fn optimized_matches_oracle_on_50_images() {
    let mut r = common::rng(7);
    for t in 0..50 {
        let h = 4 + (t * 7) % 37;
        let w = 4 + (t * 11) % 41;
        let m: oracle::Mat = (0..h).map(|_| (0..w).map(|_| r.random::<f64>()).collect()).collect();
        let depth = max_depth(h, w);
        let pyr = decompose(&luma_from(&m), &default_filters(), depth).unwrap();
        for (k, (lvl, o)) in pyr.levels().iter().zip(&oracle::pyramid(&m, depth)).enumerate() {
            assert!(matches_oracle(lvl, o), "image {t} ({h}x{w}) level {}", k + 1);
        }
    }
}

fn expect_dims(rows: usize, cols: usize) -> (usize, usize) {
    if rows == 0 || cols == 0 {
        (0, 0)
    } else {
        (rows, cols)
    }
}

fn check_shape_law(h: usize, w: usize) {
    let img = LumaImage::new(w, h, vec![0.5; h * w]).unwrap();
    let depth = max_depth(h, w);
    let pyr = decompose(&img, &default_filters(), depth).unwrap();
    assert_eq!(pyr.depth(), depth);
    let (mut ih, mut iw) = (h, w);
    for lvl in pyr.levels() {
        let (sh, sw) = (ih - 1, iw - 1);
        for b in 0..4 {
            assert_eq!(lvl.subbands.as_array()[b].dims(), (sh, sw));
            assert_eq!(lvl.pairs[b].c_a.dims(), expect_dims(sh, sw / 2));
            assert_eq!(lvl.pairs[b].c_d.dims(), expect_dims(sh / 2, sw));
            let q = &lvl.quads[b];
            assert_eq!(q.c_aa.dims(), expect_dims(sh, sw / 2 / 2), "{h}x{w}");
            assert_eq!(q.c_ad.dims(), expect_dims(sh / 2, sw / 2));
            assert_eq!(q.c_dd.dims(), expect_dims(sh / 2, sw / 2));
            assert_eq!(q.c_da.dims(), expect_dims(sh / 2, sw / 2));
        }
        (ih, iw) = (sh, sw);
    }
    if depth < 4 {
        let err = decompose(&img, &default_filters(), depth + 1).unwrap_err();
        assert!(matches!(err, Error::ImageTooSmall { level, .. } if level == depth + 1));
    }
}

#[test]
fn shape_law_for_sizes_4_to_129() {
    for s in 4..=129 {
        for (h, w) in [(s, s), (s, 4), (4, s), (s, 5), (s, 4 + (s * 37) % 126)] {
            check_shape_law(h, w);
        }
    }
}

#[test]
fn verbatim_variant_only_changes_c_da() {
    let img = common::random_luma(20, 20, 9);
    let a = decompose_with(&img, &default_filters(), 2, CdaVariant::RowDifference).unwrap();
    let b = decompose_with(&img, &default_filters(), 2, CdaVariant::Verbatim).unwrap();
    for (la, lb) in a.levels().iter().zip(b.levels()) {
        assert_eq!(la.subbands, lb.subbands);
        for q in 0..4 {
            assert_eq!(la.quads[q].c_aa, lb.quads[q].c_aa);
            assert_eq!(la.quads[q].c_dd, lb.quads[q].c_dd);
            assert_eq!(lb.quads[q].c_da.max_abs(), 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn decomposition_is_linear(
        h in 4usize..24, w in 4usize..24, a in -3.0f64..3.0, b in -3.0f64..3.0, seed in any::<u64>()
    ) {
        let x = common::random_luma(w, h, seed);
        let y = common::random_luma(w, h, seed ^ 0x9e37);
        let mix: Vec<f64> = x.samples().iter().zip(y.samples()).map(|(p, q)| a * p + b * q).collect();
        let z = LumaImage::new(w, h, mix).unwrap();
        let depth = max_depth(h, w).min(2);
        let (px, py, pz) = (
            decompose(&x, &default_filters(), depth).unwrap(),
            decompose(&y, &default_filters(), depth).unwrap(),
            decompose(&z, &default_filters(), depth).unwrap(),
        );
        for k in 0..depth {
            let (gx, gy, gz) = (all_grids(&px.levels()[k]), all_grids(&py.levels()[k]), all_grids(&pz.levels()[k]));
            for ((gx, gy), gz) in gx.iter().zip(&gy).zip(&gz) {
                for ((vx, vy), vz) in gx.as_slice().iter().zip(gy.as_slice()).zip(gz.as_slice()) {
                    let want = a * vx + b * vy;
                    let scale = want.abs().max(a.abs() + b.abs()).max(1.0);
                    prop_assert!((vz - want).abs() <= 1e-9 * scale);
                }
            }
        }
    }

    #[test]
    fn shape_law_random_sizes(h in 4usize..130, w in 4usize..130) {
        check_shape_law(h, w);
    }
}
