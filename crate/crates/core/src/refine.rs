//! Turns a [`WaveletPyramid`] into a point set of per-site feature vectors.
//!
//! Sites live on the grid of the `S_LL` quad's detail components
//! (`⌊H/2⌋ × ⌊W/2⌋` for an `H × W` subband), restricted to the columns
//! where `C_AA` is also defined. Each site covers a 2×2 block of the
//! subband grid and produces
//!
//! ```text
//! [low·a, high·c_ad, high·c_da, high·c_dd, high·p_lh, high·p_hl, high·p_hh, level]
//! ```
//!
//! where `a` averages the two `C_AA` cells (1×4 footprint) stacked over the
//! block and `p_*` is the mean absolute value of the matching detail subband
//! over the block.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::wavelet::{CdaVariant, PyramidLevel, WaveletPyramid};

/// Coordinates per feature vector, level tag included.
pub const FEATURE_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    pub low_weight: f64,
    pub high_weight: f64,
    /// 1-based pyramid levels to pool.
    pub levels_used: Vec<usize>,
    pub magnitude_only: bool,
}

impl RefineConfig {
    /// Unit weights, magnitudes, every level in `1..=levels`.
    pub fn for_levels(levels: usize) -> Self {
        RefineConfig {
            low_weight: 1.0,
            high_weight: 1.0,
            levels_used: (1..=levels).collect(),
            magnitude_only: true,
        }
    }

    pub fn validate(&self, depth: usize) -> Result<()> {
        let weight_ok = |w: f64| w.is_finite() && w >= 0.0;
        if !weight_ok(self.low_weight) || !weight_ok(self.high_weight) {
            return Err(Error::ConfigMismatch("weights must be finite and non-negative".into()));
        }
        if self.low_weight + self.high_weight <= 0.0 {
            return Err(Error::ConfigMismatch("weights must not both be zero".into()));
        }
        if self.levels_used.is_empty() {
            return Err(Error::ConfigMismatch("levels_used is empty".into()));
        }
        for (i, &l) in self.levels_used.iter().enumerate() {
            if l == 0 || l > depth {
                return Err(Error::ConfigMismatch(format!(
                    "level {l} outside pyramid depth {depth}"
                )));
            }
            if self.levels_used[..i].contains(&l) {
                return Err(Error::ConfigMismatch(format!("level {l} listed twice")));
            }
        }
        Ok(())
    }
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig::for_levels(crate::wavelet::DEFAULT_LEVELS)
    }
}

/// A finite set of equal-length real vectors, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    dim: usize,
    data: Vec<f64>,
    origin: String,
}

impl FeatureSet {
    pub fn new(dim: usize, data: Vec<f64>, origin: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Format("feature dimension must be positive".into()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::Format(format!(
                "{} values do not divide into vectors of length {dim}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("non-finite feature value".into()));
        }
        Ok(FeatureSet {
            dim,
            data,
            origin: origin.into(),
        })
    }

    pub fn from_points(points: &[Vec<f64>], origin: impl Into<String>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimMismatch {
                left: dim,
                right: p.len(),
            });
        }
        Self::new(dim, points.concat(), origin)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }

    /// Concatenates sets of the same dimension, in order.
    pub fn concat(sets: &[FeatureSet], origin: impl Into<String>) -> Result<Self> {
        let first = sets.first().ok_or(Error::EmptySet)?;
        let mut data = Vec::with_capacity(sets.iter().map(|s| s.data.len()).sum());
        for s in sets {
            if s.dim != first.dim {
                return Err(Error::DimMismatch {
                    left: first.dim,
                    right: s.dim,
                });
            }
            data.extend_from_slice(&s.data);
        }
        Ok(FeatureSet {
            dim: first.dim,
            data,
            origin: origin.into(),
        })
    }

    pub(crate) fn from_parts_unchecked(dim: usize, data: Vec<f64>, origin: String) -> Self {
        FeatureSet { dim, data, origin }
    }
}

/// Site grid `(rows, cols)` for one pyramid level.
pub fn site_grid(level: &PyramidLevel) -> (usize, usize) {
    let (h, w) = level.subbands.s_ll.dims();
    let rows = h / 2;
    let cols = 2 * (w / 2 / 2);
    if rows == 0 || cols == 0 {
        (0, 0)
    } else {
        (rows, cols)
    }
}

pub fn feature_count(pyr: &WaveletPyramid, cfg: &RefineConfig) -> Result<usize> {
    cfg.validate(pyr.depth())?;
    Ok(cfg
        .levels_used
        .iter()
        .map(|&l| {
            let (r, c) = site_grid(pyr.level(l).expect("validated level"));
            r * c
        })
        .sum())
}

/// Mean of the two 1×4-footprint cells covering site `(i, j)`.
fn wide_colocated(g: &Grid, i: usize, j: usize) -> f64 {
    (g[(2 * i, j / 2)] + g[(2 * i + 1, j / 2)]) / 2.0
}

fn block_mean_abs(g: &Grid, i: usize, j: usize) -> f64 {
    let (r, c) = (2 * i, 2 * j);
    (g[(r, c)].abs() + g[(r, c + 1)].abs() + g[(r + 1, c)].abs() + g[(r + 1, c + 1)].abs()) / 4.0
}

fn refine_level(level: &PyramidLevel, index: usize, variant: CdaVariant, cfg: &RefineConfig) -> Result<FeatureSet> {
    let (rows, cols) = site_grid(level);
    if rows == 0 {
        let (h, w) = level.subbands.s_ll.dims();
        return Err(Error::ConfigMismatch(format!(
            "level {index} subbands ({h}x{w}) are too small to yield feature sites"
        )));
    }
    let quad = &level.quads[0];
    let sb = &level.subbands;
    let mag = |v: f64| if cfg.magnitude_only { v.abs() } else { v };
    let (lw, hw) = (cfg.low_weight, cfg.high_weight);
    let tag = index as f64;

    let mut data = Vec::with_capacity(rows * cols * FEATURE_DIM);
    for i in 0..rows {
        for j in 0..cols {
            let a = wide_colocated(&quad.c_aa, i, j);
            let c_da = match variant {
                CdaVariant::RowDifference => quad.c_da[(i, j)],
                CdaVariant::Verbatim => wide_colocated(&quad.c_da, i, j),
            };
            data.extend_from_slice(&[
                lw * mag(a),
                hw * mag(quad.c_ad[(i, j)]),
                hw * mag(c_da),
                hw * mag(quad.c_dd[(i, j)]),
                hw * block_mean_abs(&sb.s_lh, i, j),
                hw * block_mean_abs(&sb.s_hl, i, j),
                hw * block_mean_abs(&sb.s_hh, i, j),
                tag,
            ]);
        }
    }
    Ok(FeatureSet::from_parts_unchecked(
        FEATURE_DIM,
        data,
        format!("level {index}: {rows}x{cols} sites"),
    ))
}

/// Per-level feature sets, in `cfg.levels_used` order.
pub fn refine_levels(pyr: &WaveletPyramid, cfg: &RefineConfig) -> Result<Vec<(usize, FeatureSet)>> {
    cfg.validate(pyr.depth())?;
    cfg.levels_used
        .iter()
        .map(|&l| {
            let level = pyr.level(l).expect("validated level");
            refine_level(level, l, pyr.variant(), cfg).map(|fs| (l, fs))
        })
        .collect()
}

pub fn refine(pyr: &WaveletPyramid, cfg: &RefineConfig) -> Result<FeatureSet> {
    let per_level = refine_levels(pyr, cfg)?;
    let origin = per_level
        .iter()
        .map(|(_, fs)| fs.origin().to_string())
        .collect::<Vec<_>>()
        .join("; ");
    let sets: Vec<FeatureSet> = per_level.into_iter().map(|(_, fs)| fs).collect();
    FeatureSet::concat(&sets, origin)
}
