//! Unoptimized reference implementations used as test oracles.
//!
//! Everything here works on `Vec<Vec<f64>>` with plain nested loops and the
//! 1-based index formulas, sharing no code with the library.

#![allow(clippy::needless_range_loop)]

pub type Mat = Vec<Vec<f64>>;

pub const F_LL: [[f64; 2]; 2] = [[0.25, 0.25], [0.25, 0.25]];
pub const F_LH: [[f64; 2]; 2] = [[0.5, -0.5], [0.5, -0.5]];
pub const F_HL: [[f64; 2]; 2] = [[0.5, 0.5], [-0.5, -0.5]];
pub const F_HH: [[f64; 2]; 2] = [[0.5, -0.5], [-0.5, 0.5]];

pub fn zeros(rows: usize, cols: usize) -> Mat {
    vec![vec![0.0; cols]; rows]
}

pub fn dims(m: &Mat) -> (usize, usize) {
    (m.len(), m.first().map_or(0, Vec::len))
}

pub fn same_bits(g: &waveliq::Grid, m: &Mat) -> bool {
    let (r, c) = dims(m);
    if g.rows() != r || (r > 0 && g.cols() != c) {
        return g.is_empty() && (r == 0 || c == 0);
    }
    for i in 0..r {
        for j in 0..c {
            if g.get(i, j).to_bits() != m[i][j].to_bits() {
                return false;
            }
        }
    }
    true
}

pub fn luma(img: &waveliq::RasterImage) -> Mat {
    let mut out = zeros(img.height(), img.width());
    for y in 0..img.height() {
        for x in 0..img.width() {
            out[y][x] = if img.channels() == 1 {
                img.sample(x, y, 0)
            } else {
                0.299 * img.sample(x, y, 0) + 0.587 * img.sample(x, y, 1) + 0.114 * img.sample(x, y, 2)
            };
        }
    }
    out
}

pub fn correlate(x: &Mat, k: &[[f64; 2]; 2]) -> Mat {
    let (h, w) = dims(x);
    let mut out = zeros(h - 1, w - 1);
    for i in 0..h - 1 {
        for j in 0..w - 1 {
            out[i][j] = k[0][0] * x[i][j] + k[0][1] * x[i][j + 1] + k[1][0] * x[i + 1][j] + k[1][1] * x[i + 1][j + 1];
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Level {
    /// `s_ll, s_lh, s_hl, s_hh`.
    pub s: [Mat; 4],
    pub c_a: [Mat; 4],
    pub c_d: [Mat; 4],
    pub c_aa: [Mat; 4],
    pub c_ad: [Mat; 4],
    pub c_da: [Mat; 4],
    pub c_dd: [Mat; 4],
}

fn at(m: &Mat, i1: usize, j1: usize) -> f64 {
    m[i1 - 1][j1 - 1]
}

pub fn level(x: &Mat) -> Level {
    let s = [
        correlate(x, &F_LL),
        correlate(x, &F_LH),
        correlate(x, &F_HL),
        correlate(x, &F_HH),
    ];
    let mut c_a: [Mat; 4] = Default::default();
    let mut c_d: [Mat; 4] = Default::default();
    let mut c_aa: [Mat; 4] = Default::default();
    let mut c_ad: [Mat; 4] = Default::default();
    let mut c_da: [Mat; 4] = Default::default();
    let mut c_dd: [Mat; 4] = Default::default();
    for b in 0..4 {
        let (h, w) = dims(&s[b]);
        let mut a = zeros(h, w / 2);
        for i in 1..=h {
            for j in 1..=w / 2 {
                a[i - 1][j - 1] = (at(&s[b], i, 2 * j - 1) + at(&s[b], i, 2 * j)) / 2.0;
            }
        }
        let mut d = zeros(h / 2, w);
        for i in 1..=h / 2 {
            for j in 1..=w {
                d[i - 1][j - 1] = at(&s[b], 2 * i - 1, j) - at(&s[b], 2 * i, j);
            }
        }
        let (ha, wa) = (h, w / 2);
        let (hd, wd) = (h / 2, w);
        let mut aa = zeros(ha, wa / 2);
        for i in 1..=ha {
            for j in 1..=wa / 2 {
                aa[i - 1][j - 1] = (at(&a, i, 2 * j - 1) + at(&a, i, 2 * j)) / 2.0;
            }
        }
        let mut ad = zeros(hd, wd / 2);
        let mut dd = zeros(hd, wd / 2);
        for i in 1..=hd {
            for j in 1..=wd / 2 {
                ad[i - 1][j - 1] = (at(&d, i, 2 * j - 1) - at(&d, i, 2 * j)) / 2.0;
                dd[i - 1][j - 1] = at(&d, i, 2 * j - 1) - at(&d, i, 2 * j);
            }
        }
        let mut da = zeros(ha / 2, wa);
        for i in 1..=ha / 2 {
            for j in 1..=wa {
                da[i - 1][j - 1] = at(&a, 2 * i - 1, j) - at(&a, 2 * i, j);
            }
        }
        c_a[b] = a;
        c_d[b] = d;
        c_aa[b] = aa;
        c_ad[b] = ad;
        c_da[b] = da;
        c_dd[b] = dd;
    }
    Level {
        s,
        c_a,
        c_d,
        c_aa,
        c_ad,
        c_da,
        c_dd,
    }
}

pub fn pyramid(x: &Mat, levels: usize) -> Vec<Level> {
    let mut out = Vec::new();
    let mut input = x.clone();
    for _ in 0..levels {
        let l = level(&input);
        input = l.s[0].clone();
        out.push(l);
    }
    out
}

/// Feature vectors of one level, row-major over sites.
pub fn refine_level(l: &Level, tag: usize, lw: f64, hw: f64) -> Mat {
    let (h, w) = dims(&l.s[0]);
    let rows = h / 2;
    let cols = 2 * ((w / 2) / 2);
    let mut out = Vec::new();
    if rows == 0 || cols == 0 {
        return out;
    }
    let pool = |m: &Mat, i: usize, j: usize| {
        let mut acc = 0.0;
        for (di, dj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            acc += m[2 * i + di][2 * j + dj].abs();
        }
        acc / 4.0
    };
    for i in 0..rows {
        for j in 0..cols {
            let a = (l.c_aa[0][2 * i][j / 2] + l.c_aa[0][2 * i + 1][j / 2]) / 2.0;
            out.push(vec![
                lw * a.abs(),
                hw * l.c_ad[0][i][j].abs(),
                hw * l.c_da[0][i][j].abs(),
                hw * l.c_dd[0][i][j].abs(),
                hw * pool(&l.s[1], i, j),
                hw * pool(&l.s[2], i, j),
                hw * pool(&l.s[3], i, j),
                tag as f64,
            ]);
        }
    }
    out
}

pub fn l2(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 0..a.len() {
        acc += (a[k] - b[k]) * (a[k] - b[k]);
    }
    acc.sqrt()
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 0..a.len() {
        acc += (a[k] - b[k]).abs();
    }
    acc
}

pub fn directed(a: &Mat, b: &Mat, d: fn(&[f64], &[f64]) -> f64) -> f64 {
    let mut sup = 0.0f64;
    for x in a {
        let mut inf = f64::INFINITY;
        for y in b {
            let v = d(x, y);
            if v < inf {
                inf = v;
            }
        }
        if inf > sup {
            sup = inf;
        }
    }
    sup
}

pub fn hausdorff(a: &Mat, b: &Mat, d: fn(&[f64], &[f64]) -> f64) -> f64 {
    directed(a, b, d).max(directed(b, a, d))
}

pub fn hist(img: &waveliq::RasterImage, bins: usize) -> Mat {
    let mut out = zeros(img.channels(), bins);
    let n = (img.width() * img.height()) as f64;
    for y in 0..img.height() {
        for x in 0..img.width() {
            for c in 0..img.channels() {
                let mut k = (img.sample(x, y, c) * bins as f64).floor() as usize;
                if k >= bins {
                    k = bins - 1;
                }
                out[c][k] += 1.0 / n;
            }
        }
    }
    out
}

pub fn hellinger(a: &Mat, b: &Mat) -> f64 {
    let mut total = 0.0;
    for c in 0..a.len() {
        let mut s = 0.0;
        for k in 0..a[c].len() {
            s += (a[c][k].sqrt() - b[c][k].sqrt()).powi(2);
        }
        total += (s / 2.0).sqrt();
    }
    (total / a.len() as f64).clamp(0.0, 1.0)
}

/// Pearson via raw sums.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..x.len() {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// Average ranks by counting: `1 + #less + (#equal − 1) / 2`.
pub fn ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&a| {
            let less = v.iter().filter(|&&b| b < a).count() as f64;
            let equal = v.iter().filter(|&&b| b == a).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}
