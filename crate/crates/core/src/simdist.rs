//! Point-set distances between [`FeatureSet`]s.
//!
//! [`hausdorff`] is exact. The directed pass for each query point scans the
//! other set starting at the proportionally co-located index (feature sets
//! built from same-sized images share their site layout, so the nearest
//! neighbour is usually found within a few steps) and stops as soon as the
//! running minimum drops below the best directed distance found so far.
//! Distances are accumulated in the metric's monotone "partial" form
//! (squared for L2) and abandoned once they exceed the current minimum.
//! None of this pruning can change the returned value.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::refine::FeatureSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroundMetric {
    L1,
    #[default]
    L2,
}

impl GroundMetric {
    /// Distance before the final monotone transform (sum of squares for L2).
    #[inline]
    fn partial(self, a: &[f64], b: &[f64], limit: f64) -> f64 {
        let mut acc = 0.0;
        match self {
            GroundMetric::L1 => {
                for (x, y) in a.iter().zip(b) {
                    acc += (x - y).abs();
                    if acc > limit {
                        return acc;
                    }
                }
            }
            GroundMetric::L2 => {
                for (x, y) in a.iter().zip(b) {
                    let d = x - y;
                    acc += d * d;
                    if acc > limit {
                        return acc;
                    }
                }
            }
        }
        acc
    }

    #[inline]
    fn finish(self, partial: f64) -> f64 {
        match self {
            GroundMetric::L1 => partial,
            GroundMetric::L2 => partial.sqrt(),
        }
    }

    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        self.finish(self.partial(a, b, f64::INFINITY))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    /// Pairs the i-th point of one set with the i-th point of the other.
    #[default]
    Aligned,
}

fn check_sets(a: &FeatureSet, b: &FeatureSet) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(())
}

const CHUNK: usize = 256;

/// Monotone max over non-negative f64 values stored as bits.
struct SharedMax(AtomicU64);

impl SharedMax {
    fn get(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Relaxed))
    }

    fn raise(&self, v: f64) {
        // non-negative f64s order the same as their bit patterns
        self.0.fetch_max(v.to_bits(), Ordering::Relaxed);
    }
}

fn directed_partial(a: &FeatureSet, b: &FeatureSet, metric: GroundMetric) -> f64 {
    let (n, m) = (a.len(), b.len());
    let best = SharedMax(AtomicU64::new(0f64.to_bits()));
    (0..n.div_ceil(CHUNK)).into_par_iter().for_each(|chunk| {
        let mut cmax = best.get();
        for i in chunk * CHUNK..((chunk + 1) * CHUNK).min(n) {
            let x = a.point(i);
            let start = if n == m { i } else { i * m / n };
            let mut cmin = f64::INFINITY;
            let mut pruned = false;
            for j in (start..m).chain(0..start) {
                let d = metric.partial(x, b.point(j), cmin);
                if d < cmin {
                    cmin = d;
                    if cmin < cmax {
                        pruned = true;
                        break;
                    }
                }
            }
            if !pruned && cmin > cmax {
                best.raise(cmin);
            }
            cmax = best.get();
        }
    });
    best.get()
}

/// `sup_{x∈a} inf_{y∈b} d(x, y)`.
pub fn directed_hausdorff(a: &FeatureSet, b: &FeatureSet, metric: GroundMetric) -> Result<f64> {
    check_sets(a, b)?;
    Ok(metric.finish(directed_partial(a, b, metric)))
}

/// Both directed distances, `(a→b, b→a)`.
pub fn directed_pair(a: &FeatureSet, b: &FeatureSet, metric: GroundMetric) -> Result<(f64, f64)> {
    check_sets(a, b)?;
    Ok((
        metric.finish(directed_partial(a, b, metric)),
        metric.finish(directed_partial(b, a, metric)),
    ))
}

pub fn hausdorff(a: &FeatureSet, b: &FeatureSet, metric: GroundMetric) -> Result<f64> {
    let (ab, ba) = directed_pair(a, b, metric)?;
    Ok(ab.max(ba))
}

/// Mean ground distance over the pairs selected by `coupling`.
pub fn coupled_distance(a: &FeatureSet, b: &FeatureSet, coupling: Coupling, metric: GroundMetric) -> Result<f64> {
    match coupling {
        Coupling::Aligned => {
            if a.dim() != b.dim() {
                return Err(Error::DimMismatch {
                    left: a.dim(),
                    right: b.dim(),
                });
            }
            if a.len() != b.len() {
                return Err(Error::CouplingUnavailable(format!(
                    "aligned coupling needs equal cardinality, got {} and {}",
                    a.len(),
                    b.len()
                )));
            }
            if a.is_empty() {
                return Err(Error::EmptySet);
            }
            let total: f64 = a.points().zip(b.points()).map(|(x, y)| metric.distance(x, y)).sum();
            Ok(total / a.len() as f64)
        }
    }
}

/// Maps a distance to a similarity in `(0, 1]` as `1 / (1 + d)`.
pub fn map_similarity(d: f64) -> Result<f64> {
    if !d.is_finite() || d < 0.0 {
        return Err(Error::InvalidDistance(d));
    }
    Ok(1.0 / (1.0 + d))
}

pub const TENSOR_MAGIC: &[u8; 4] = b"WLFS";
pub const TENSOR_VERSION: u32 = 1;
const TENSOR_HEADER_LEN: usize = 4 + 4 + 4 + 8;

/// Serializes as `WLFS | version | dim | count | f64 payload | crc32(payload)`, little-endian.
pub fn encode_features(fs: &FeatureSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(TENSOR_HEADER_LEN + fs.as_flat().len() * 8 + 4);
    out.extend_from_slice(TENSOR_MAGIC);
    out.extend_from_slice(&TENSOR_VERSION.to_le_bytes());
    out.extend_from_slice(&(fs.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(fs.len() as u64).to_le_bytes());
    let payload_start = out.len();
    for v in fs.as_flat() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&out[payload_start..]);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn decode_features(bytes: &[u8], origin: impl Into<String>) -> Result<FeatureSet> {
    let fail = |m: &str| Error::Format(m.to_string());
    if bytes.len() < TENSOR_HEADER_LEN {
        return Err(fail("truncated header"));
    }
    if &bytes[..4] != TENSOR_MAGIC {
        return Err(fail("bad magic"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != TENSOR_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    if dim == 0 {
        return Err(fail("zero dimension"));
    }
    let payload_len = usize::try_from(count)
        .ok()
        .and_then(|c| c.checked_mul(dim))
        .and_then(|v| v.checked_mul(8))
        .ok_or_else(|| fail("payload size overflows"))?;
    let expected = TENSOR_HEADER_LEN + payload_len + 4;
    if bytes.len() < expected {
        return Err(Error::Format(format!(
            "truncated payload: expected {expected} bytes, got {}",
            bytes.len()
        )));
    }
    if bytes.len() > expected {
        return Err(fail("trailing bytes after checksum"));
    }
    let payload = &bytes[TENSOR_HEADER_LEN..TENSOR_HEADER_LEN + payload_len];
    let stored = u32::from_le_bytes(bytes[expected - 4..].try_into().unwrap());
    if crc32fast::hash(payload) != stored {
        return Err(fail("checksum mismatch"));
    }
    let data: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    FeatureSet::new(dim, data, origin)
}

pub fn write_feature_file(fs: &FeatureSet, path: &Path) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&encode_features(fs)).map_err(|e| Error::io(path, e))
}

pub fn load_feature_file(path: &Path) -> Result<FeatureSet> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_features(&bytes, path.display().to_string())
}

/// Writes a coefficient grid in the tensor format, one vector per row.
pub fn write_grid_file(grid: &Grid, path: &Path) -> Result<()> {
    let fs = FeatureSet::new(grid.cols().max(1), grid.as_slice().to_vec(), "grid")?;
    write_feature_file(&fs, path)
}

/// Outcome of checking `hausdorff ≤ coupled_distance` on random aligned pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingStudy {
    pub trials: usize,
    pub bound_held: usize,
    pub fraction_held: f64,
    /// A constructed instance where the inequality fails.
    pub counterexample: CouplingViolation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingViolation {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub hausdorff: f64,
    pub coupled: f64,
}

/// Nine points at the origin plus one outlier, against ten points at the origin.
pub fn coincident_outlier_instance(outlier: f64) -> (FeatureSet, FeatureSet) {
    let mut a = vec![vec![0.0]; 9];
    a.push(vec![outlier]);
    let b = vec![vec![0.0]; 10];
    (
        FeatureSet::from_points(&a, "coincident+outlier").unwrap(),
        FeatureSet::from_points(&b, "coincident").unwrap(),
    )
}

/// Tabulates how often the coupled distance bounds the Hausdorff distance.
pub fn coupling_bound_study(trials: usize, seed: u64, metric: GroundMetric) -> Result<CouplingStudy> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut held = 0;
    for _ in 0..trials {
        let n = rng.random_range(1..=32);
        let dim = rng.random_range(1..=8);
        let draw = |rng: &mut ChaCha8Rng| (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
        let a = FeatureSet::new(dim, draw(&mut rng), "a")?;
        let b = FeatureSet::new(dim, draw(&mut rng), "b")?;
        if hausdorff(&a, &b, metric)? <= coupled_distance(&a, &b, Coupling::Aligned, metric)? {
            held += 1;
        }
    }
    let (a, b) = coincident_outlier_instance(10.0);
    let counterexample = CouplingViolation {
        hausdorff: hausdorff(&a, &b, metric)?,
        coupled: coupled_distance(&a, &b, Coupling::Aligned, metric)?,
        a: a.points().map(<[f64]>::to_vec).collect(),
        b: b.points().map(<[f64]>::to_vec).collect(),
    };
    Ok(CouplingStudy {
        trials,
        bound_held: held,
        fraction_held: if trials == 0 { 0.0 } else { held as f64 / trials as f64 },
        counterexample,
    })
}
