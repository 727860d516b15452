//! Synthetic distortion ladders: five severities each of additive Gaussian
//! noise, Gaussian blur and contrast reduction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::RasterImage;

pub const LEVELS: usize = 5;

/// Noise standard deviations, in 8-bit code values.
pub const NOISE_SIGMA_8BIT: [f64; LEVELS] = [2.0, 4.0, 8.0, 16.0, 32.0];
pub const BLUR_SIGMA: [f64; LEVELS] = [0.6, 1.2, 2.4, 4.8, 9.6];
pub const CONTRAST_FACTOR: [f64; LEVELS] = [0.8, 0.6, 0.45, 0.3, 0.15];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistortionKind {
    GaussianNoise,
    GaussianBlur,
    ContrastScale,
}

impl DistortionKind {
    pub const ALL: [DistortionKind; 3] = [
        DistortionKind::GaussianNoise,
        DistortionKind::GaussianBlur,
        DistortionKind::ContrastScale,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            DistortionKind::GaussianNoise => "noise",
            DistortionKind::GaussianBlur => "blur",
            DistortionKind::ContrastScale => "contrast",
        }
    }
}

/// Applies `kind` at severity `level` (1..=5).
///
/// Noise for every level of one seed comes from the same standard-normal
/// field, so deviation from the reference grows monotonically with level.
pub fn synthesize(reference: &RasterImage, kind: DistortionKind, level: usize, seed: u64) -> Result<RasterImage> {
    if !(1..=LEVELS).contains(&level) {
        return Err(Error::ConfigMismatch(format!(
            "distortion level {level} outside 1..={LEVELS}"
        )));
    }
    let i = level - 1;
    let samples = match kind {
        DistortionKind::GaussianNoise => add_noise(reference.samples(), NOISE_SIGMA_8BIT[i] / 255.0, seed),
        DistortionKind::GaussianBlur => gaussian_blur(reference, BLUR_SIGMA[i]),
        DistortionKind::ContrastScale => {
            let k = CONTRAST_FACTOR[i];
            reference.samples().iter().map(|v| 0.5 + k * (v - 0.5)).collect()
        }
    };
    RasterImage::new(reference.width(), reference.height(), reference.channels(), samples)
}

fn add_noise(samples: &[f64], sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    samples
        .iter()
        .map(|v| {
            let z: f64 = StandardNormal.sample(&mut rng);
            (v + sigma * z).clamp(0.0, 1.0)
        })
        .collect()
}

/// Normalized Gaussian taps truncated at `ceil(3σ)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / total).collect()
}

/// Separable blur with edge-clamped borders.
fn gaussian_blur(img: &RasterImage, sigma: f64) -> Vec<f64> {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let taps = gaussian_kernel(sigma);
    let radius = (taps.len() / 2) as isize;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let src = img.samples();

    let mut horizontal = vec![0.0; src.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                let mut acc = 0.0;
                for (t, k) in taps.iter().zip(-radius..=radius) {
                    let xx = clamp(x as isize + k, w);
                    acc += t * src[(y * w + xx) * ch + c];
                }
                horizontal[(y * w + x) * ch + c] = acc;
            }
        }
    }
    let mut out = vec![0.0; src.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                let mut acc = 0.0;
                for (t, k) in taps.iter().zip(-radius..=radius) {
                    let yy = clamp(y as isize + k, h);
                    acc += t * horizontal[(yy * w + x) * ch + c];
                }
                out[(y * w + x) * ch + c] = acc.clamp(0.0, 1.0);
            }
        }
    }
    out
}
