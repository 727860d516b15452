//! Per-channel color histograms and their Hellinger distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::RasterImage;

pub const DEFAULT_BINS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorHistogram {
    bins_per_channel: usize,
    /// One normalized mass vector per channel.
    mass: Vec<Vec<f64>>,
}

impl ColorHistogram {
    /// Builds a histogram from per-channel masses, normalizing each channel.
    pub fn from_masses(mass: Vec<Vec<f64>>) -> Result<Self> {
        let bins = mass.first().map_or(0, Vec::len);
        if bins < 2 {
            return Err(Error::BadBinCount(bins));
        }
        if mass.iter().any(|m| m.len() != bins) {
            return Err(Error::ShapeMismatch("channels have different bin counts".into()));
        }
        let mut out = Vec::with_capacity(mass.len());
        for m in mass {
            if m.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::ShapeMismatch(
                    "histogram mass must be finite and non-negative".into(),
                ));
            }
            let total: f64 = m.iter().sum();
            if total <= 0.0 {
                return Err(Error::ShapeMismatch("histogram channel has zero mass".into()));
            }
            out.push(m.into_iter().map(|v| v / total).collect());
        }
        Ok(ColorHistogram {
            bins_per_channel: bins,
            mass: out,
        })
    }

    pub fn bins_per_channel(&self) -> usize {
        self.bins_per_channel
    }

    pub fn channels(&self) -> usize {
        self.mass.len()
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.mass[c]
    }
}

#[inline]
pub fn bin_index(v: f64, bins: usize) -> usize {
    ((v * bins as f64) as usize).min(bins - 1)
}

pub fn histogram(img: &RasterImage, bins: usize) -> Result<ColorHistogram> {
    if bins < 2 {
        return Err(Error::BadBinCount(bins));
    }
    if img.pixel_count() == 0 {
        return Err(Error::InvalidRaster("empty image".into()));
    }
    let channels = img.channels();
    let mut counts = vec![vec![0u64; bins]; channels];
    for px in img.samples().chunks_exact(channels) {
        for (c, v) in px.iter().enumerate() {
            counts[c][bin_index(*v, bins)] += 1;
        }
    }
    let n = img.pixel_count() as f64;
    Ok(ColorHistogram {
        bins_per_channel: bins,
        mass: counts
            .into_iter()
            .map(|ch| ch.into_iter().map(|k| k as f64 / n).collect())
            .collect(),
    })
}

/// Mean over channels of `‖√hr − √hd‖₂ / √2`.
pub fn hellinger_weight(hr: &ColorHistogram, hd: &ColorHistogram) -> Result<f64> {
    if hr.bins_per_channel != hd.bins_per_channel || hr.channels() != hd.channels() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{} (channels x bins)",
            hr.channels(),
            hr.bins_per_channel,
            hd.channels(),
            hd.bins_per_channel
        )));
    }
    let per_channel = hr.mass.iter().zip(&hd.mass).map(|(a, b)| {
        let sq: f64 = a
            .iter()
            .zip(b)
            .map(|(x, y)| {
                let d = x.sqrt() - y.sqrt();
                d * d
            })
            .sum();
        sq.sqrt() / std::f64::consts::SQRT_2
    });
    let mean = per_channel.sum::<f64>() / hr.channels() as f64;
    Ok(mean.clamp(0.0, 1.0))
}
