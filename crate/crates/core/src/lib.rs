//! Full-reference image quality scoring from wavelet feature sets.
//!
//! A reference and a distorted image are each decomposed into a multi-level
//! four-subband wavelet pyramid, refined into a set of per-site feature
//! vectors, and compared with the exact Hausdorff distance. The resulting
//! similarity is attenuated by the Hellinger distance between the images'
//! color histograms:
//!
//! ```
//! use waveliq::{evaluate_pair, RasterImage, ScoreConfig};
//!
//! let img = RasterImage::from_fn(32, 32, 3, |x, y, c| ((x ^ y) + c) as f64 / 40.0).unwrap();
//! let report = evaluate_pair(&img, &img, &ScoreConfig::default()).unwrap();
//! assert_eq!(report.q_p, 1.0);
//! ```
//!
//! The [`bench`] module scores dataset manifests and reports PLCC/SRCC
//! against subjective scores.

pub mod bench;
pub mod chroma;
pub mod error;
pub mod grid;
pub mod imgio;
pub mod refine;
pub mod score;
pub mod simdist;
pub mod wavelet;

pub use error::{Error, Result, Shape};
pub use grid::Grid;
pub use imgio::{
    check_pair, decode_image, load_manifest, read_image, to_luma, DatasetManifest, LumaImage, RasterImage,
};
pub use refine::{refine, FeatureSet, RefineConfig};
pub use score::{evaluate_pair, score_batch, QualityReport, ScoreConfig, ScoreMode};
pub use simdist::{coupled_distance, hausdorff, map_similarity, GroundMetric};
pub use wavelet::{decompose, default_filters, FilterBank, WaveletPyramid};
