//! Four-filter subband decomposition with cascaded average/difference splits.
//!
//! One level runs three stages:
//!
//! 1. valid-mode 2×2 correlation of the input with the four kernels of a
//!    [`FilterBank`], giving `S_LL, S_LH, S_HL, S_HH` of size `(h-1)×(w-1)`;
//! 2. [`split_pair`] of every subband into a column-pair average `C_A` and a
//!    row-pair difference `C_D`;
//! 3. [`split_quad`] of every pair into `C_AA, C_AD, C_DA, C_DD`.
//!
//! Deeper levels recurse on the previous level's `S_LL`. Trailing odd rows
//! and columns are dropped at each split.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::imgio::LumaImage;

pub type Kernel = [[f64; 2]; 2];

/// Minimum side length of every recursion input to [`decompose`].
pub const MIN_LEVEL_INPUT: usize = 4;
pub const DEFAULT_LEVELS: usize = 2;
pub const MAX_LEVELS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterBank {
    pub f_ll: Kernel,
    pub f_lh: Kernel,
    pub f_hl: Kernel,
    pub f_hh: Kernel,
}

impl FilterBank {
    pub fn kernels(&self) -> [&Kernel; 4] {
        [&self.f_ll, &self.f_lh, &self.f_hl, &self.f_hh]
    }
}

impl Default for FilterBank {
    fn default() -> Self {
        default_filters()
    }
}

/// Haar-style analysis bank: a unit-gain average and three zero-sum details.
pub fn default_filters() -> FilterBank {
    FilterBank {
        f_ll: [[0.25, 0.25], [0.25, 0.25]],
        f_lh: [[0.5, -0.5], [0.5, -0.5]],
        f_hl: [[0.5, 0.5], [-0.5, -0.5]],
        f_hh: [[0.5, -0.5], [-0.5, 0.5]],
    }
}

/// Which expression produces `C_DA`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CdaVariant {
    /// Row-pair difference of `C_A`, mirroring how `C_D` is taken from `S`.
    #[default]
    RowDifference,
    /// `C_A(i, 2j-1) - C_A(i, 2j-1)`, which is identically zero. Kept for audits.
    Verbatim,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubbandSet {
    pub s_ll: Grid,
    pub s_lh: Grid,
    pub s_hl: Grid,
    pub s_hh: Grid,
}

impl SubbandSet {
    pub fn as_array(&self) -> [&Grid; 4] {
        [&self.s_ll, &self.s_lh, &self.s_hl, &self.s_hh]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffPair {
    /// Column-pair averages, `h × ⌊w/2⌋`.
    pub c_a: Grid,
    /// Row-pair differences, `⌊h/2⌋ × w`.
    pub c_d: Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffQuad {
    pub c_aa: Grid,
    pub c_ad: Grid,
    pub c_da: Grid,
    pub c_dd: Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PyramidLevel {
    pub subbands: SubbandSet,
    /// One pair per subband, in LL, LH, HL, HH order.
    pub pairs: [CoeffPair; 4],
    pub quads: [CoeffQuad; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    levels: Vec<PyramidLevel>,
    variant: CdaVariant,
}

impl WaveletPyramid {
    pub fn levels(&self) -> &[PyramidLevel] {
        &self.levels
    }

    /// Level by 1-based index.
    pub fn level(&self, index: usize) -> Option<&PyramidLevel> {
        index.checked_sub(1).and_then(|i| self.levels.get(i))
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn variant(&self) -> CdaVariant {
        self.variant
    }
}

fn correlate(grid: &Grid, k: &Kernel) -> Grid {
    let (rows, cols) = (grid.rows() - 1, grid.cols() - 1);
    let mut data = vec![0.0; rows * cols];
    data.par_chunks_mut(cols.max(1)).enumerate().for_each(|(i, out)| {
        let top = grid.row(i);
        let bottom = grid.row(i + 1);
        for (j, o) in out.iter_mut().enumerate() {
            *o = k[0][0] * top[j] + k[0][1] * top[j + 1] + k[1][0] * bottom[j] + k[1][1] * bottom[j + 1];
        }
    });
    Grid::from_vec(rows, cols, data)
}

fn convolve_grid(grid: &Grid, bank: &FilterBank, level: usize) -> Result<SubbandSet> {
    if grid.rows() < 2 || grid.cols() < 2 {
        return Err(Error::ImageTooSmall {
            level,
            rows: grid.rows(),
            cols: grid.cols(),
            min: 2,
        });
    }
    Ok(SubbandSet {
        s_ll: correlate(grid, &bank.f_ll),
        s_lh: correlate(grid, &bank.f_lh),
        s_hl: correlate(grid, &bank.f_hl),
        s_hh: correlate(grid, &bank.f_hh),
    })
}

/// Valid-mode stride-1 correlation with each kernel of `bank`.
pub fn convolve_subbands(img: &LumaImage, bank: &FilterBank) -> Result<SubbandSet> {
    convolve_grid(&img.to_grid(), bank, 1)
}

fn column_pair_mean(g: &Grid) -> Grid {
    let cols = g.cols() / 2;
    if cols == 0 {
        return Grid::zeros(0, 0);
    }
    Grid::from_fn(g.rows(), cols, |i, j| (g[(i, 2 * j)] + g[(i, 2 * j + 1)]) / 2.0)
}

fn column_pair_half_diff(g: &Grid) -> Grid {
    let cols = g.cols() / 2;
    if cols == 0 {
        return Grid::zeros(0, 0);
    }
    Grid::from_fn(g.rows(), cols, |i, j| (g[(i, 2 * j)] - g[(i, 2 * j + 1)]) / 2.0)
}

fn column_pair_diff(g: &Grid) -> Grid {
    let cols = g.cols() / 2;
    if cols == 0 {
        return Grid::zeros(0, 0);
    }
    Grid::from_fn(g.rows(), cols, |i, j| g[(i, 2 * j)] - g[(i, 2 * j + 1)])
}

fn row_pair_diff(g: &Grid) -> Grid {
    let rows = g.rows() / 2;
    if rows == 0 {
        return Grid::zeros(0, 0);
    }
    Grid::from_fn(rows, g.cols(), |i, j| g[(2 * i, j)] - g[(2 * i + 1, j)])
}

/// Splits a subband into approximation (column pairs) and detail (row pairs).
///
/// An axis without a complete pair yields an empty component; a grid with
/// no pair on either axis is an error.
pub fn split_pair(s: &Grid) -> Result<CoeffPair> {
    if s.rows() < 2 && s.cols() < 2 || s.is_empty() {
        return Err(Error::GridTooSmall {
            rows: s.rows(),
            cols: s.cols(),
        });
    }
    Ok(CoeffPair {
        c_a: column_pair_mean(s),
        c_d: row_pair_diff(s),
    })
}

pub fn split_quad(p: &CoeffPair) -> Result<CoeffQuad> {
    split_quad_with(p, CdaVariant::RowDifference)
}

pub fn split_quad_with(p: &CoeffPair, variant: CdaVariant) -> Result<CoeffQuad> {
    let c_aa = column_pair_mean(&p.c_a);
    let c_ad = column_pair_half_diff(&p.c_d);
    let c_dd = column_pair_diff(&p.c_d);
    let c_da = match variant {
        CdaVariant::RowDifference => row_pair_diff(&p.c_a),
        CdaVariant::Verbatim => {
            let cols = p.c_a.cols() / 2;
            if cols == 0 {
                Grid::zeros(0, 0)
            } else {
                // the printed expression, kept as written
                #[allow(clippy::eq_op)]
                Grid::from_fn(p.c_a.rows(), cols, |i, j| p.c_a[(i, 2 * j)] - p.c_a[(i, 2 * j)])
            }
        }
    };
    if c_aa.is_empty() && c_ad.is_empty() && c_da.is_empty() && c_dd.is_empty() {
        return Err(Error::GridTooSmall {
            rows: p.c_a.rows().max(p.c_d.rows()),
            cols: p.c_a.cols().max(p.c_d.cols()),
        });
    }
    Ok(CoeffQuad { c_aa, c_ad, c_da, c_dd })
}

fn decompose_level(grid: &Grid, bank: &FilterBank, level: usize, variant: CdaVariant) -> Result<PyramidLevel> {
    if grid.rows() < MIN_LEVEL_INPUT || grid.cols() < MIN_LEVEL_INPUT {
        return Err(Error::ImageTooSmall {
            level,
            rows: grid.rows(),
            cols: grid.cols(),
            min: MIN_LEVEL_INPUT,
        });
    }
    let subbands = convolve_grid(grid, bank, level)?;
    let [ll, lh, hl, hh] = subbands.as_array().map(split_pair);
    let pairs = [ll?, lh?, hl?, hh?];
    let [qa, qb, qc, qd] = pairs.each_ref().map(|p| split_quad_with(p, variant));
    let quads = [qa?, qb?, qc?, qd?];
    Ok(PyramidLevel { subbands, pairs, quads })
}

/// Multi-level decomposition using the row-difference `C_DA`.
pub fn decompose(img: &LumaImage, bank: &FilterBank, levels: usize) -> Result<WaveletPyramid> {
    decompose_with(img, bank, levels, CdaVariant::RowDifference)
}

pub fn decompose_with(
    img: &LumaImage,
    bank: &FilterBank,
    levels: usize,
    variant: CdaVariant,
) -> Result<WaveletPyramid> {
    if levels == 0 {
        return Err(Error::ConfigMismatch("at least one wavelet level is required".into()));
    }
    let mut out: Vec<PyramidLevel> = Vec::with_capacity(levels);
    let mut input = img.to_grid();
    for level in 1..=levels {
        let lvl = decompose_level(&input, bank, level, variant)?;
        if level < levels {
            input = lvl.subbands.s_ll.clone();
        }
        out.push(lvl);
    }
    Ok(WaveletPyramid { levels: out, variant })
}
