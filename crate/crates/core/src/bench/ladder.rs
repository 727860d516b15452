//! Distortion ladders written to disk with a ready-to-benchmark manifest.

use std::fs;
use std::path::{Path, PathBuf};

use crate::bench::distort::{synthesize, DistortionKind, LEVELS};
use crate::error::{Error, Result};
use crate::imgio::{write_manifest, write_png, DatasetManifest, ManifestRecord, RasterImage};

pub const MANIFEST_NAME: &str = "manifest.csv";

#[derive(Debug, Clone)]
pub struct LadderRung {
    pub kind: DistortionKind,
    pub level: usize,
    pub image: RasterImage,
}

/// Every kind at every level, kind-major.
pub fn build_ladder(reference: &RasterImage, seed: u64) -> Result<Vec<LadderRung>> {
    let mut rungs = Vec::with_capacity(DistortionKind::ALL.len() * LEVELS);
    for kind in DistortionKind::ALL {
        for level in 1..=LEVELS {
            rungs.push(LadderRung {
                kind,
                level,
                image: synthesize(reference, kind, level, seed)?,
            });
        }
    }
    Ok(rungs)
}

pub fn rung_file_name(kind: DistortionKind, level: usize) -> String {
    format!("{}_{level}.png", kind.tag())
}

/// Writes the ladder PNGs and `manifest.csv` into `out_dir`.
///
/// MOS is the negated level, so higher is better. Distorted paths are written
/// relative to the manifest; the reference path is written as given.
pub fn write_ladder(reference: &RasterImage, ref_path: &Path, out_dir: &Path, seed: u64) -> Result<DatasetManifest> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let stem = ref_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("ref")
        .to_string();
    let mut records = Vec::new();
    for rung in build_ladder(reference, seed)? {
        let name = rung_file_name(rung.kind, rung.level);
        write_png(&rung.image, &out_dir.join(&name))?;
        records.push(ManifestRecord {
            record_id: format!("{stem}_{}_{}", rung.kind.tag(), rung.level),
            ref_path: ref_path.to_path_buf(),
            dist_path: PathBuf::from(name),
            mos: -(rung.level as f64),
            distortion_tag: Some(rung.kind.tag().to_string()),
        });
    }
    let manifest = DatasetManifest { records };
    write_manifest(&manifest, &out_dir.join(MANIFEST_NAME))?;
    Ok(manifest)
}
