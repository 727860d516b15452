//! Benchmark harness: score a manifest, correlate against MOS, report.

pub mod distort;
pub mod ladder;
pub mod logistic;
pub mod stats;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::imgio::{read_image, DatasetManifest};
use crate::score::{score_batch_with, ScoreConfig};

pub use distort::{synthesize, DistortionKind};
pub use logistic::{fit_logistic4, Logistic4};
pub use stats::{average_ranks, plcc, srcc, CorrelationResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordScore {
    pub record_id: String,
    pub q_p: Option<f64>,
    pub mos: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distortion_tag: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// SRCC restricted to the records sharing one distortion tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagCorrelation {
    pub tag: String,
    pub n: usize,
    /// `None` when the group is too small or degenerate.
    pub srcc: Option<f64>,
}

/// Which values PLCC was computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlccMapping {
    Logistic4,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub dataset_name: String,
    pub config_fingerprint: String,
    pub records: Vec<RecordScore>,
    pub plcc: Option<f64>,
    pub srcc: Option<f64>,
    /// Records that entered the correlations.
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logistic_params: Option<[f64; 4]>,
    pub plcc_mapping: PlccMapping,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation_error: Option<String>,
    /// Per-tag SRCC, in order of first appearance; empty for untagged manifests.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_tag: Vec<TagCorrelation>,
    /// Mean of the defined per-tag SRCC values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_tag_srcc: Option<f64>,
}

impl BenchmarkReport {
    pub fn correlations(&self) -> Option<CorrelationResult> {
        Some(CorrelationResult {
            plcc: self.plcc?,
            srcc: self.srcc?,
            n: self.n,
            logistic_params: self.logistic_params,
        })
    }

    pub fn failed_records(&self) -> impl Iterator<Item = &RecordScore> {
        self.records.iter().filter(|r| r.error.is_some())
    }

    pub fn summary_line(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
        let mapping = match self.plcc_mapping {
            PlccMapping::Logistic4 => "logistic4",
            PlccMapping::None => "raw",
        };
        let per_tag = if self.per_tag.is_empty() {
            String::new()
        } else {
            format!(" tag_SRCC={}", fmt(self.mean_tag_srcc))
        };
        format!(
            "{}: PLCC={} ({mapping}) SRCC={}{per_tag} n={} failed={} config={}",
            self.dataset_name,
            fmt(self.plcc),
            fmt(self.srcc),
            self.n,
            self.failed_records().count(),
            self.config_fingerprint
        )
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    /// `record_id,q_p,mos`; failed records have an empty `q_p`.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(["record_id", "q_p", "mos"]).map_err(fail)?;
        for r in &self.records {
            let q = r.q_p.map(|v| format!("{v:?}")).unwrap_or_default();
            w.write_record([r.record_id.as_str(), &q, &format!("{:?}", r.mos)])
                .map_err(fail)?;
        }
        w.into_inner().map_err(|e| Error::Format(e.to_string()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }
}

/// Short stable hash of the scoring configuration and mapping choice.
pub fn config_fingerprint(cfg: &ScoreConfig, use_logistic: bool) -> String {
    let canonical = serde_json::to_vec(&(cfg, use_logistic)).expect("config serializes");
    let digest = Sha256::digest(&canonical);
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Correlates `(q_p, mos)` pairs; PLCC optionally after a logistic fit.
///
/// Returns the correlation result and the mapping actually used. A logistic
/// fit that cannot run (too few points) falls back to raw PLCC.
pub fn correlate(q: &[f64], mos: &[f64], use_logistic: bool) -> Result<(CorrelationResult, PlccMapping)> {
    let srcc = srcc(q, mos)?;
    if use_logistic {
        match fit_logistic4(q, mos) {
            Ok(fit) => {
                if !fit.converged {
                    log::warn!("logistic fit did not converge; using best parameters found");
                }
                let mapped: Vec<f64> = q.iter().map(|v| fit.apply(*v)).collect();
                let plcc = plcc(&mapped, mos)?;
                return Ok((
                    CorrelationResult {
                        plcc,
                        srcc,
                        n: q.len(),
                        logistic_params: Some(fit.params),
                    },
                    PlccMapping::Logistic4,
                ));
            }
            Err(e) => log::warn!("logistic mapping skipped: {e}"),
        }
    }
    Ok((
        CorrelationResult {
            plcc: plcc(q, mos)?,
            srcc,
            n: q.len(),
            logistic_params: None,
        },
        PlccMapping::None,
    ))
}

/// SRCC of each tag group over successfully scored records.
pub fn tag_correlations(records: &[RecordScore]) -> Vec<TagCorrelation> {
    let mut groups: Vec<(String, Vec<f64>, Vec<f64>)> = Vec::new();
    for r in records {
        let (Some(tag), Some(q)) = (&r.distortion_tag, r.q_p) else {
            continue;
        };
        match groups.iter_mut().find(|g| &g.0 == tag) {
            Some(g) => {
                g.1.push(q);
                g.2.push(r.mos);
            }
            None => groups.push((tag.clone(), vec![q], vec![r.mos])),
        }
    }
    groups
        .into_iter()
        .map(|(tag, q, mos)| TagCorrelation {
            n: q.len(),
            srcc: srcc(&q, &mos).ok(),
            tag,
        })
        .collect()
}

/// Scores every manifest record and correlates the successes with MOS.
pub fn run_benchmark(
    dataset_name: &str,
    manifest: &DatasetManifest,
    cfg: &ScoreConfig,
    use_logistic: bool,
    jobs: Option<usize>,
) -> Result<BenchmarkReport> {
    cfg.validate()?;
    let results = score_batch_with(manifest.len(), cfg, jobs, |i| {
        let rec = &manifest.records[i];
        Ok((read_image(&rec.ref_path)?, read_image(&rec.dist_path)?))
    });

    let mut records = Vec::with_capacity(manifest.len());
    let (mut q, mut mos) = (Vec::new(), Vec::new());
    for (rec, res) in manifest.records.iter().zip(results) {
        match res {
            Ok(report) => {
                q.push(report.q_p);
                mos.push(rec.mos);
                records.push(RecordScore {
                    record_id: rec.record_id.clone(),
                    q_p: Some(report.q_p),
                    mos: rec.mos,
                    distortion_tag: rec.distortion_tag.clone(),
                    error: None,
                });
            }
            Err(e) => {
                log::warn!("record {} failed: {e}", rec.record_id);
                records.push(RecordScore {
                    record_id: rec.record_id.clone(),
                    q_p: None,
                    mos: rec.mos,
                    distortion_tag: rec.distortion_tag.clone(),
                    error: Some(e.to_string()),
                });
            }
        }
    }

    let per_tag = tag_correlations(&records);
    let defined: Vec<f64> = per_tag.iter().filter_map(|t| t.srcc).collect();
    let mean_tag_srcc = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    let mut report = BenchmarkReport {
        dataset_name: dataset_name.to_string(),
        config_fingerprint: config_fingerprint(cfg, use_logistic),
        records,
        plcc: None,
        srcc: None,
        n: q.len(),
        logistic_params: None,
        plcc_mapping: PlccMapping::None,
        correlation_error: None,
        per_tag,
        mean_tag_srcc,
    };
    match correlate(&q, &mos, use_logistic) {
        Ok((corr, mapping)) => {
            report.plcc = Some(corr.plcc);
            report.srcc = Some(corr.srcc);
            report.logistic_params = corr.logistic_params;
            report.plcc_mapping = mapping;
        }
        Err(e) => report.correlation_error = Some(e.to_string()),
    }
    Ok(report)
}
