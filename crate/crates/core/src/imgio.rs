//! Image decoding, luma conversion, pair validation and dataset manifests.
//!
//! Decoded samples are always normalized to `[0, 1]`: 8-bit values are
//! divided by 255 and 16-bit values by 65535. Alpha is dropped; CMYK
//! payloads are rejected.

use std::collections::HashSet;
use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ExtendedColorType, ImageDecoder, ImageReader};
use log::warn;

use crate::error::{Error, Result, Shape};
use crate::grid::Grid;

/// Decoded pixel grid with channel-interleaved samples in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<f64>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, samples: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidRaster(format!(
                "channel count must be 1 or 3, got {channels}"
            )));
        }
        if samples.len() != width * height * channels {
            return Err(Error::InvalidRaster(format!(
                "expected {} samples for {width}x{height}x{channels}, got {}",
                width * height * channels,
                samples.len()
            )));
        }
        if let Some(bad) = samples.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidRaster(format!("sample {bad} outside [0, 1]")));
        }
        Ok(RasterImage {
            width,
            height,
            channels,
            samples,
        })
    }

    /// Builds an image from a per-pixel closure returning one value per channel.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    samples.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, channels, samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn shape(&self) -> Shape {
        Shape {
            width: self.width,
            height: self.height,
            channels: self.channels,
        }
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn sample(&self, x: usize, y: usize, c: usize) -> f64 {
        self.samples[(y * self.width + x) * self.channels + c]
    }
}

/// Single-channel intensity image.
#[derive(Debug, Clone, PartialEq)]
pub struct LumaImage {
    width: usize,
    height: usize,
    samples: Vec<f64>,
}

impl LumaImage {
    pub fn new(width: usize, height: usize, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != width * height {
            return Err(Error::InvalidRaster(format!(
                "expected {} luma samples, got {}",
                width * height,
                samples.len()
            )));
        }
        Ok(LumaImage { width, height, samples })
    }

    pub fn from_grid(grid: &Grid) -> Self {
        LumaImage {
            width: grid.cols(),
            height: grid.rows(),
            samples: grid.as_slice().to_vec(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn to_grid(&self) -> Grid {
        Grid::from_vec(self.height, self.width, self.samples.clone())
    }
}

/// BT.601 luma weights.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

pub fn to_luma(img: &RasterImage) -> LumaImage {
    let samples = match img.channels {
        1 => img.samples.clone(),
        _ => img
            .samples
            .chunks_exact(3)
            .map(|p| LUMA_WEIGHTS[0] * p[0] + LUMA_WEIGHTS[1] * p[1] + LUMA_WEIGHTS[2] * p[2])
            // the weighted sum can round a hair above 1.0
            .map(|v| v.clamp(0.0, 1.0))
            .collect(),
    };
    LumaImage {
        width: img.width,
        height: img.height,
        samples,
    }
}

pub fn read_image(path: &Path) -> Result<RasterImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes)
}

/// Decodes a PNG, BMP or baseline JPEG payload.
pub fn decode_image(bytes: &[u8]) -> Result<RasterImage> {
    if bytes.is_empty() {
        return Err(Error::Decode("empty input".into()));
    }
    if let Some(4) = jpeg_component_count(bytes) {
        return Err(Error::UnsupportedChannels("CMYK JPEG".into()));
    }
    let reader = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| Error::Decode(e.to_string()))?;
    let decoder = reader.into_decoder().map_err(|e| Error::Decode(e.to_string()))?;
    if matches!(
        decoder.original_color_type(),
        ExtendedColorType::Cmyk8 | ExtendedColorType::Cmyk16
    ) {
        return Err(Error::UnsupportedChannels("CMYK".into()));
    }
    let img = DynamicImage::from_decoder(decoder).map_err(|e| Error::Decode(e.to_string()))?;
    from_dynamic(img)
}

fn from_dynamic(img: DynamicImage) -> Result<RasterImage> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let scale8 = |v: &u8| f64::from(*v) / 255.0;
    let scale16 = |v: &u16| f64::from(*v) / 65535.0;
    let (channels, samples): (usize, Vec<f64>) = match img {
        DynamicImage::ImageLuma8(b) => (1, b.as_raw().iter().map(scale8).collect()),
        DynamicImage::ImageRgb8(b) => (3, b.as_raw().iter().map(scale8).collect()),
        DynamicImage::ImageLuma16(b) => (1, b.as_raw().iter().map(scale16).collect()),
        DynamicImage::ImageRgb16(b) => (3, b.as_raw().iter().map(scale16).collect()),
        DynamicImage::ImageLumaA8(b) => {
            warn!("dropping alpha channel");
            (1, b.as_raw().chunks_exact(2).map(|p| scale8(&p[0])).collect())
        }
        DynamicImage::ImageLumaA16(b) => {
            warn!("dropping alpha channel");
            (1, b.as_raw().chunks_exact(2).map(|p| scale16(&p[0])).collect())
        }
        DynamicImage::ImageRgba8(b) => {
            warn!("dropping alpha channel");
            (3, drop_alpha(b.as_raw(), scale8))
        }
        DynamicImage::ImageRgba16(b) => {
            warn!("dropping alpha channel");
            (3, drop_alpha(b.as_raw(), scale16))
        }
        other => {
            if other.color().has_alpha() {
                warn!("dropping alpha channel");
            }
            let rgb = other.to_rgb32f();
            (3, rgb.as_raw().iter().map(|v| f64::from(*v).clamp(0.0, 1.0)).collect())
        }
    };
    RasterImage::new(w, h, channels, samples)
}

fn drop_alpha<T>(raw: &[T], scale: impl Fn(&T) -> f64) -> Vec<f64> {
    raw.chunks_exact(4)
        .flat_map(|p| [scale(&p[0]), scale(&p[1]), scale(&p[2])])
        .collect()
}

/// Number of components declared in the first JPEG frame header, if any.
fn jpeg_component_count(bytes: &[u8]) -> Option<u8> {
    if bytes.len() < 4 || bytes[0] != 0xFF || bytes[1] != 0xD8 {
        return None;
    }
    let mut pos = 2;
    while pos + 4 <= bytes.len() {
        if bytes[pos] != 0xFF {
            return None;
        }
        let marker = bytes[pos + 1];
        if marker == 0xFF {
            pos += 1;
            continue;
        }
        let len = usize::from(u16::from_be_bytes([bytes[pos + 2], bytes[pos + 3]]));
        // SOF0..SOF15 except DHT (C4), JPG (C8) and DAC (CC)
        if (0xC0..=0xCF).contains(&marker) && !matches!(marker, 0xC4 | 0xC8 | 0xCC) {
            return bytes.get(pos + 9).copied();
        }
        if marker == 0xDA {
            return None;
        }
        pos += 2 + len;
    }
    None
}

/// Encodes as an 8-bit PNG, rounding samples to the nearest 1/255 step.
pub fn encode_png(img: &RasterImage) -> Result<Vec<u8>> {
    use image::ImageEncoder;
    let raw: Vec<u8> = img
        .samples
        .iter()
        .map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    let color = if img.channels == 1 {
        ExtendedColorType::L8
    } else {
        ExtendedColorType::Rgb8
    };
    let mut buf = Vec::new();
    image::codecs::png::PngEncoder::new(&mut buf)
        .write_image(&raw, img.width as u32, img.height as u32, color)
        .map_err(|e| Error::Decode(format!("png encode: {e}")))?;
    Ok(buf)
}

pub fn write_png(img: &RasterImage, path: &Path) -> Result<()> {
    let bytes = encode_png(img)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// A reference/distorted pair whose geometry has been checked.
#[derive(Debug, Clone, Copy)]
pub struct ValidatedPair<'a> {
    pub reference: &'a RasterImage,
    pub distorted: &'a RasterImage,
}

pub fn check_pair<'a>(reference: &'a RasterImage, distorted: &'a RasterImage) -> Result<ValidatedPair<'a>> {
    if reference.shape() != distorted.shape() {
        return Err(Error::GeometryMismatch {
            reference: reference.shape(),
            distorted: distorted.shape(),
        });
    }
    Ok(ValidatedPair { reference, distorted })
}

pub const MANIFEST_HEADER: [&str; 5] = ["record_id", "ref_path", "dist_path", "mos", "distortion_tag"];

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRecord {
    pub record_id: String,
    pub ref_path: PathBuf,
    pub dist_path: PathBuf,
    pub mos: f64,
    pub distortion_tag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetManifest {
    pub records: Vec<ManifestRecord>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_manifest(&bytes, base)
}

/// Parses manifest CSV text; relative paths are joined onto `base_dir`.
pub fn parse_manifest(bytes: &[u8], base_dir: &Path) -> Result<DatasetManifest> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut rows = reader.records();

    let header = match rows.next() {
        Some(row) => row.map_err(csv_error)?,
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "missing header".into(),
            })
        }
    };
    if header.iter().ne(MANIFEST_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("header must be `{}`", MANIFEST_HEADER.join(",")),
        });
    }

    let resolve = |p: &str| {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base_dir.join(p)
        }
    };

    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for row in rows {
        let row = row.map_err(csv_error)?;
        let line = row.position().map_or(0, csv::Position::line);
        if row.len() != MANIFEST_HEADER.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} columns, found {}", MANIFEST_HEADER.len(), row.len()),
            });
        }
        let mos_text = &row[3];
        let mos: f64 = mos_text.trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("mos {mos_text:?} is not a number"),
        })?;
        if !mos.is_finite() {
            return Err(Error::Parse {
                line,
                message: format!("mos {mos_text:?} is not finite"),
            });
        }
        let record_id = row[0].to_string();
        if record_id.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty record_id".into(),
            });
        }
        if !seen.insert(record_id.clone()) {
            return Err(Error::DuplicateId { id: record_id, line });
        }
        let tag = &row[4];
        records.push(ManifestRecord {
            record_id,
            ref_path: resolve(&row[1]),
            dist_path: resolve(&row[2]),
            mos,
            distortion_tag: (!tag.is_empty()).then(|| tag.to_string()),
        });
    }
    Ok(DatasetManifest { records })
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, csv::Position::line);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Serializes a manifest with paths written verbatim.
pub fn manifest_to_csv(manifest: &DatasetManifest) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Format(format!("manifest write: {e}"));
    writer.write_record(MANIFEST_HEADER).map_err(fail)?;
    for r in &manifest.records {
        let path_str = |p: &Path| {
            p.to_str()
                .map(str::to_owned)
                .ok_or_else(|| Error::Format(format!("non UTF-8 path {}", p.display())))
        };
        writer
            .write_record([
                r.record_id.clone(),
                path_str(&r.ref_path)?,
                path_str(&r.dist_path)?,
                format!("{:?}", r.mos),
                r.distortion_tag.clone().unwrap_or_default(),
            ])
            .map_err(fail)?;
    }
    writer
        .into_inner()
        .map_err(|e| Error::Format(format!("manifest write: {e}")))
}

pub fn write_manifest(manifest: &DatasetManifest, path: &Path) -> Result<()> {
    let bytes = manifest_to_csv(manifest)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
