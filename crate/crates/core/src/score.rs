//! End-to-end pair scoring.
//!
//! `s = 1 / (1 + H(F_r, F_d))` is fused with the histogram weight `c` as
//! `s · (1 − β·c)`; the other two modes isolate each term.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chroma::{hellinger_weight, histogram, DEFAULT_BINS};
use crate::error::{Error, Result};
use crate::imgio::{check_pair, to_luma, RasterImage};
use crate::refine::{refine_levels, FeatureSet, RefineConfig};
use crate::simdist::{coupled_distance, directed_pair, map_similarity, Coupling, GroundMetric};
use crate::wavelet::{decompose_with, CdaVariant, FilterBank, DEFAULT_LEVELS, MAX_LEVELS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ScoreMode {
    #[serde(rename = "dwt")]
    DwtOnly,
    #[serde(rename = "ch")]
    ChOnly,
    #[default]
    #[serde(rename = "dwt+ch")]
    DwtPlusCh,
}

impl std::str::FromStr for ScoreMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dwt" => Ok(ScoreMode::DwtOnly),
            "ch" => Ok(ScoreMode::ChOnly),
            "dwt+ch" => Ok(ScoreMode::DwtPlusCh),
            other => Err(Error::ConfigMismatch(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub mode: ScoreMode,
    pub refine: RefineConfig,
    pub metric: GroundMetric,
    pub bins: usize,
    pub levels: usize,
    /// Strength of the histogram attenuation, in `[0, 1]`.
    pub beta: f64,
    pub filters: FilterBank,
    pub cda_variant: CdaVariant,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            mode: ScoreMode::DwtPlusCh,
            refine: RefineConfig::for_levels(DEFAULT_LEVELS),
            metric: GroundMetric::L2,
            bins: DEFAULT_BINS,
            levels: DEFAULT_LEVELS,
            beta: 1.0,
            filters: FilterBank::default(),
            cda_variant: CdaVariant::RowDifference,
        }
    }
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::ConfigMismatch(format!("beta {} outside [0, 1]", self.beta)));
        }
        if !(1..=MAX_LEVELS).contains(&self.levels) {
            return Err(Error::ConfigMismatch(format!(
                "levels {} outside 1..={MAX_LEVELS}",
                self.levels
            )));
        }
        if self.bins < 2 {
            return Err(Error::BadBinCount(self.bins));
        }
        self.refine.validate(self.levels)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDiagnostics {
    pub level: usize,
    pub feature_count: usize,
    pub ref_to_dist: f64,
    pub dist_to_ref: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub mode: ScoreMode,
    pub q_p: f64,
    pub similarity: f64,
    pub hausdorff_d: f64,
    pub coupled_d: Option<f64>,
    pub ch_weight: f64,
    pub per_level_diagnostics: Vec<LevelDiagnostics>,
}

/// Feature sets for one image, one per selected level.
pub fn extract_features(img: &RasterImage, cfg: &ScoreConfig) -> Result<Vec<(usize, FeatureSet)>> {
    let pyr = decompose_with(&to_luma(img), &cfg.filters, cfg.levels, cfg.cda_variant)?;
    refine_levels(&pyr, &cfg.refine)
}

pub fn pooled(levels: &[(usize, FeatureSet)]) -> Result<FeatureSet> {
    let sets: Vec<FeatureSet> = levels.iter().map(|(_, fs)| fs.clone()).collect();
    FeatureSet::concat(&sets, "pooled")
}

/// Combines the structural similarity and histogram weight per `mode`.
pub fn fuse(mode: ScoreMode, similarity: f64, ch_weight: f64, beta: f64) -> f64 {
    let q = match mode {
        ScoreMode::DwtOnly => similarity,
        ScoreMode::ChOnly => 1.0 - ch_weight,
        ScoreMode::DwtPlusCh => similarity * (1.0 - beta * ch_weight),
    };
    q.clamp(0.0, 1.0)
}

pub fn evaluate_pair(reference: &RasterImage, distorted: &RasterImage, cfg: &ScoreConfig) -> Result<QualityReport> {
    cfg.validate()?;
    let pair = check_pair(reference, distorted)?;

    let (ref_levels, dist_levels) = rayon::join(
        || extract_features(pair.reference, cfg),
        || extract_features(pair.distorted, cfg),
    );
    let (ref_levels, dist_levels) = (ref_levels?, dist_levels?);

    let per_level_diagnostics = ref_levels
        .iter()
        .zip(&dist_levels)
        .map(|((level, fr), (_, fd))| {
            let (ref_to_dist, dist_to_ref) = directed_pair(fr, fd, cfg.metric)?;
            Ok(LevelDiagnostics {
                level: *level,
                feature_count: fr.len(),
                ref_to_dist,
                dist_to_ref,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (fr, fd) = (pooled(&ref_levels)?, pooled(&dist_levels)?);
    let (ab, ba) = directed_pair(&fr, &fd, cfg.metric)?;
    let hausdorff_d = ab.max(ba);
    let coupled_d = coupled_distance(&fr, &fd, Coupling::Aligned, cfg.metric).ok();
    let similarity = map_similarity(hausdorff_d)?;

    let ch_weight = hellinger_weight(
        &histogram(pair.reference, cfg.bins)?,
        &histogram(pair.distorted, cfg.bins)?,
    )?;

    Ok(QualityReport {
        mode: cfg.mode,
        q_p: fuse(cfg.mode, similarity, ch_weight, cfg.beta),
        similarity,
        hausdorff_d,
        coupled_d,
        ch_weight,
        per_level_diagnostics,
    })
}

/// Runs `f` on a pool of `jobs` workers, or on the global pool when `None`.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(f),
            Err(e) => {
                log::warn!("could not build a {n}-thread pool ({e}); using the global pool");
                f()
            }
        },
        None => f(),
    }
}

/// Scores `count` pairs produced lazily by `load`, in input order.
///
/// Failures are reported per record; a failing pair does not stop the batch.
pub fn score_batch_with<F>(count: usize, cfg: &ScoreConfig, jobs: Option<usize>, load: F) -> Vec<Result<QualityReport>>
where
    F: Fn(usize) -> Result<(RasterImage, RasterImage)> + Sync,
{
    with_jobs(jobs, || {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let (r, d) = load(i)?;
                evaluate_pair(&r, &d, cfg)
            })
            .collect()
    })
}

pub fn score_batch(
    pairs: &[(RasterImage, RasterImage)],
    cfg: &ScoreConfig,
    jobs: Option<usize>,
) -> Vec<Result<QualityReport>> {
    with_jobs(jobs, || {
        pairs.par_iter().map(|(r, d)| evaluate_pair(r, d, cfg)).collect()
    })
}
