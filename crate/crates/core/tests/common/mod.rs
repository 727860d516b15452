//! Procedural test images shared by the integration tests.
#![allow(dead_code)]

pub mod oracle;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use waveliq::{Grid, LumaImage, RasterImage};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn constant(w: usize, h: usize, channels: usize, v: f64) -> RasterImage {
    RasterImage::from_fn(w, h, channels, |_, _, _| v).unwrap()
}

pub fn gradient(w: usize, h: usize) -> RasterImage {
    RasterImage::from_fn(w, h, 3, |x, y, c| {
        let t = (x as f64 / (w - 1) as f64 + y as f64 / (h - 1) as f64) / 2.0;
        match c {
            0 => t,
            1 => 1.0 - t,
            _ => 0.25 + 0.5 * t,
        }
    })
    .unwrap()
}

pub fn uniform_noise(w: usize, h: usize, channels: usize, seed: u64) -> RasterImage {
    let mut r = rng(seed);
    let samples = (0..w * h * channels).map(|_| r.random::<f64>()).collect();
    RasterImage::new(w, h, channels, samples).unwrap()
}

pub fn random_luma(w: usize, h: usize, seed: u64) -> LumaImage {
    let mut r = rng(seed);
    LumaImage::new(w, h, (0..w * h).map(|_| r.random::<f64>()).collect()).unwrap()
}

pub fn random_grid(rows: usize, cols: usize, r: &mut impl Rng) -> Grid {
    Grid::from_fn(rows, cols, |_, _| r.random_range(-1.0..1.0))
}

/// Smooth background, soft-edged objects, fine texture and a few hard edges.
///
/// Scenes with a given seed are reproducible; different seeds differ in
/// layout, palette and texture frequency.
pub fn natural_scene(w: usize, h: usize, seed: u64) -> RasterImage {
    let mut r = rng(seed);
    let base: [f64; 3] = [
        r.random_range(0.2..0.6),
        r.random_range(0.2..0.6),
        r.random_range(0.2..0.6),
    ];
    let tilt = (r.random_range(-0.3..0.3), r.random_range(-0.3..0.3));
    let blobs: Vec<(f64, f64, f64, [f64; 3])> = (0..6)
        .map(|_| {
            (
                r.random_range(0.0..w as f64),
                r.random_range(0.0..h as f64),
                r.random_range(3.0..(w.min(h) as f64 / 3.0)),
                [
                    r.random_range(-0.4..0.4),
                    r.random_range(-0.4..0.4),
                    r.random_range(-0.4..0.4),
                ],
            )
        })
        .collect();
    let rects: Vec<(usize, usize, usize, usize, f64)> = (0..3)
        .map(|_| {
            let x0 = r.random_range(0..w);
            let y0 = r.random_range(0..h);
            (
                x0,
                y0,
                x0 + r.random_range(4..w / 2),
                y0 + r.random_range(4..h / 2),
                r.random_range(-0.25..0.25),
            )
        })
        .collect();
    let freq = r.random_range(0.4..1.2);
    let phase = r.random_range(0.0..std::f64::consts::TAU);
    let grain: Vec<f64> = (0..w * h).map(|_| r.random_range(-0.03..0.03)).collect();

    RasterImage::from_fn(w, h, 3, |x, y, c| {
        let (xf, yf) = (x as f64, y as f64);
        let mut v = base[c] + tilt.0 * xf / w as f64 + tilt.1 * yf / h as f64;
        for (bx, by, rad, col) in &blobs {
            let d2 = ((xf - bx).powi(2) + (yf - by).powi(2)) / (rad * rad);
            v += col[c] * (-d2).exp();
        }
        for &(x0, y0, x1, y1, dv) in &rects {
            if (x0..x1).contains(&x) && (y0..y1).contains(&y) {
                v += dv;
            }
        }
        v += 0.06 * (freq * xf + phase).sin() * (0.7 * freq * yf).cos();
        v += grain[y * w + x];
        v.clamp(0.0, 1.0)
    })
    .unwrap()
}

/// Points with coordinates in `[-1, 1)`.
pub fn random_points(n: usize, dim: usize, r: &mut impl Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| r.random_range(-1.0..1.0)).collect())
        .collect()
}

pub fn set_of(points: &[Vec<f64>]) -> waveliq::FeatureSet {
    waveliq::FeatureSet::from_points(points, "test").unwrap()
}
