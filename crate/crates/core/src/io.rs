//! On-disk formats: sequence manifests and frame loading, mask images,
//! line-delimited ROI records and configuration files.
//!
//! A sequence directory looks like
//!
//! ```text
//! <root>/manifest.toml      (optional)
//! <root>/rgb/000000.png     8-bit RGB
//! <root>/depth/000000.png   16-bit grey, 0 = no reading
//! <root>/thermal/000000.png 8- or 16-bit grey
//! ```

use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use image::{DynamicImage, GrayImage, ImageFormat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{BitDepth, ForegroundMask, FrameStack, PipelineConfig, RegionOfInterest};

pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modality {
    Rgb,
    Depth,
    Thermal,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Rgb, Modality::Depth, Modality::Thermal];

    pub fn name(self) -> &'static str {
        match self {
            Modality::Rgb => "rgb",
            Modality::Depth => "depth",
            Modality::Thermal => "thermal",
        }
    }
}

/// Layout of a per-modality frame directory tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SequenceManifest {
    #[serde(skip)]
    pub root: PathBuf,
    pub rgb_dir: String,
    pub depth_dir: String,
    pub thermal_dir: String,
    /// File name is `{prefix}{index:0digits}.{extension}`.
    pub prefix: String,
    pub digits: usize,
    pub extension: String,
    pub frame_count: usize,
    pub depth_bits: BitDepth,
    pub thermal_bits: BitDepth,
}

impl Default for SequenceManifest {
    fn default() -> Self {
        Self {
            root: PathBuf::new(),
            rgb_dir: "rgb".into(),
            depth_dir: "depth".into(),
            thermal_dir: "thermal".into(),
            prefix: String::new(),
            digits: 6,
            extension: "png".into(),
            frame_count: 0,
            depth_bits: BitDepth::Sixteen,
            thermal_bits: BitDepth::Eight,
        }
    }
}

impl SequenceManifest {
    pub fn new(root: impl Into<PathBuf>, frame_count: usize, thermal_bits: BitDepth) -> Self {
        Self {
            root: root.into(),
            frame_count,
            thermal_bits,
            ..Default::default()
        }
    }

    /// Reads `<root>/manifest.toml` if present. Otherwise uses the default
    /// layout and counts the RGB frames that match the naming pattern.
    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref();
        let path = root.join(MANIFEST_FILE);
        if path.is_file() {
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let mut manifest: SequenceManifest = toml::from_str(&text).map_err(|e| Error::Parse {
                path: path.clone(),
                message: e.to_string(),
            })?;
            manifest.root = root.to_path_buf();
            return Ok(manifest);
        }
        let mut manifest = SequenceManifest {
            root: root.to_path_buf(),
            ..Default::default()
        };
        let rgb_dir = manifest.modality_dir(Modality::Rgb);
        let entries = fs::read_dir(&rgb_dir).map_err(|e| Error::io(&rgb_dir, e))?;
        let mut count = 0;
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(&rgb_dir, e))?;
            if manifest.parse_index(&entry.file_name().to_string_lossy()).is_some() {
                count += 1;
            }
        }
        manifest.frame_count = count;
        Ok(manifest)
    }

    pub fn save(&self) -> Result<()> {
        let path = self.root.join(MANIFEST_FILE);
        let text = toml::to_string(self).expect("manifest serialises");
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    pub fn modality_dir(&self, modality: Modality) -> PathBuf {
        let dir = match modality {
            Modality::Rgb => &self.rgb_dir,
            Modality::Depth => &self.depth_dir,
            Modality::Thermal => &self.thermal_dir,
        };
        self.root.join(dir)
    }

    pub fn file_name(&self, index: usize) -> String {
        format!(
            "{}{:0width$}.{}",
            self.prefix,
            index,
            self.extension,
            width = self.digits
        )
    }

    pub fn frame_path(&self, modality: Modality, index: usize) -> PathBuf {
        self.modality_dir(modality).join(self.file_name(index))
    }

    fn parse_index(&self, name: &str) -> Option<usize> {
        let stem = name
            .strip_prefix(&self.prefix)?
            .strip_suffix(&self.extension)?
            .strip_suffix('.')?;
        (stem.len() >= self.digits && stem.bytes().all(|b| b.is_ascii_digit()))
            .then(|| stem.parse().ok())
            .flatten()
    }

    /// Every index in `[0, frame_count)` must resolve to a file per modality.
    pub fn validate(&self) -> Result<()> {
        if self.digits == 0 || self.extension.is_empty() {
            return Err(Error::InvalidManifest("digits and extension must be non-empty".into()));
        }
        for index in 0..self.frame_count {
            for modality in Modality::ALL {
                let path = self.frame_path(modality, index);
                if !path.is_file() {
                    return Err(Error::MissingFrame {
                        index,
                        modality: modality.name(),
                        path,
                    });
                }
            }
        }
        Ok(())
    }
}

fn open_image(path: &Path) -> Result<DynamicImage> {
    image::open(path).map_err(|source| match source {
        image::ImageError::IoError(e) => Error::io(path, e),
        source => Error::Image {
            path: path.to_path_buf(),
            source,
        },
    })
}

fn decode_error(path: &Path, message: String) -> Error {
    Error::Image {
        path: path.to_path_buf(),
        source: image::ImageError::Decoding(image::error::DecodingError::new(
            image::error::ImageFormatHint::Unknown,
            message,
        )),
    }
}

/// Single-channel plane as raw values, without rescaling 8-bit data.
fn grey_plane(path: &Path, bits: BitDepth) -> Result<(u32, u32, Vec<u16>)> {
    let img = open_image(path)?;
    let (w, h) = (img.width(), img.height());
    let data: Vec<u16> = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(u16::from).collect(),
        DynamicImage::ImageLuma16(buf) => buf.into_raw(),
        other => {
            return Err(decode_error(
                path,
                format!("expected a single-channel image, found {:?}", other.color()),
            ))
        }
    };
    if let Some(&bad) = data.iter().find(|&&v| v > bits.max_value()) {
        return Err(decode_error(
            path,
            format!("value {bad} exceeds declared {}-bit depth", bits.bits()),
        ));
    }
    Ok((w, h, data))
}

fn rgb_plane(path: &Path) -> Result<(u32, u32, Vec<u8>)> {
    let img = open_image(path)?;
    let (w, h) = (img.width(), img.height());
    match img {
        DynamicImage::ImageRgb8(buf) => Ok((w, h, buf.into_raw())),
        DynamicImage::ImageRgba8(buf) => Ok((w, h, DynamicImage::ImageRgba8(buf).to_rgb8().into_raw())),
        other => Err(decode_error(
            path,
            format!("expected an 8-bit RGB image, found {:?}", other.color()),
        )),
    }
}

/// Reads frame `index` of the sequence.
pub fn load_frame(manifest: &SequenceManifest, index: usize) -> Result<FrameStack> {
    let rgb_path = manifest.frame_path(Modality::Rgb, index);
    let (w, h, rgb) = rgb_plane(&rgb_path)?;
    let mut planes = Vec::with_capacity(2);
    for (modality, bits) in [
        (Modality::Depth, manifest.depth_bits),
        (Modality::Thermal, manifest.thermal_bits),
    ] {
        let path = manifest.frame_path(modality, index);
        let (pw, ph, data) = grey_plane(&path, bits)?;
        if (pw, ph) != (w, h) {
            return Err(Error::DimensionMismatch {
                what: format!("{} plane of frame {index}", modality.name()),
                expected_width: w,
                expected_height: h,
                width: pw,
                height: ph,
            });
        }
        planes.push(data);
    }
    let thermal = planes.pop().unwrap();
    let depth = planes.pop().unwrap();
    FrameStack::new(w, h, rgb, depth, thermal, manifest.thermal_bits, index as u64)
}

/// Lazily decodes frames in index order. Only one frame is resident at a time.
pub struct SequenceReader {
    manifest: SequenceManifest,
    next: usize,
    end: usize,
}

impl Iterator for SequenceReader {
    type Item = Result<FrameStack>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.end {
            return None;
        }
        let frame = load_frame(&self.manifest, self.next);
        self.next += 1;
        Some(frame)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.end - self.next;
        (left, Some(left))
    }
}

impl SequenceReader {
    /// Stop after the first `n` frames.
    pub fn take_prefix(mut self, n: usize) -> Self {
        self.end = self.end.min(n);
        self
    }
}

/// Validates the manifest, then returns a frame iterator.
pub fn load_sequence(manifest: &SequenceManifest) -> Result<SequenceReader> {
    manifest.validate()?;
    Ok(SequenceReader {
        manifest: manifest.clone(),
        next: 0,
        end: manifest.frame_count,
    })
}

/// Writes the three planes of `frame` under the manifest's directories.
pub fn write_frame(manifest: &SequenceManifest, frame: &FrameStack) -> Result<()> {
    let index = frame.frame_index() as usize;
    let (w, h) = (frame.width(), frame.height());
    for modality in Modality::ALL {
        let dir = manifest.modality_dir(modality);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    let save = |img: DynamicImage, modality: Modality| -> Result<()> {
        let path = manifest.frame_path(modality, index);
        img.save(&path).map_err(|source| Error::Image { path, source })
    };
    let rgb = image::RgbImage::from_raw(w, h, frame.rgb_plane().to_vec()).expect("plane sizes checked");
    save(DynamicImage::ImageRgb8(rgb), Modality::Rgb)?;
    let depth = image::ImageBuffer::from_raw(w, h, frame.depth_plane().to_vec()).expect("plane sizes checked");
    save(DynamicImage::ImageLuma16(depth), Modality::Depth)?;
    let thermal = match frame.thermal_bits() {
        BitDepth::Eight => DynamicImage::ImageLuma8(
            GrayImage::from_raw(w, h, frame.thermal_plane().iter().map(|&v| v as u8).collect())
                .expect("plane sizes checked"),
        ),
        BitDepth::Sixteen => DynamicImage::ImageLuma16(
            image::ImageBuffer::from_raw(w, h, frame.thermal_plane().to_vec()).expect("plane sizes checked"),
        ),
    };
    save(thermal, Modality::Thermal)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaskFormat {
    #[default]
    Png,
    Pgm,
}

impl MaskFormat {
    pub fn extension(self) -> &'static str {
        match self {
            MaskFormat::Png => "png",
            MaskFormat::Pgm => "pgm",
        }
    }
}

impl FromStr for MaskFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "png" => Ok(MaskFormat::Png),
            "pgm" => Ok(MaskFormat::Pgm),
            other => Err(format!("unknown mask format {other:?}, expected png or pgm")),
        }
    }
}

/// Saves `mask` as an 8-bit grey image: 0 background, 255 foreground.
pub fn write_mask(mask: &ForegroundMask, path: &Path, format: MaskFormat) -> Result<()> {
    let data = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    let img = GrayImage::from_raw(mask.width(), mask.height(), data).expect("mask size matches");
    let fmt = match format {
        MaskFormat::Png => ImageFormat::Png,
        MaskFormat::Pgm => ImageFormat::Pnm,
    };
    img.save_with_format(path, fmt).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

/// Any non-zero pixel reads back as foreground.
pub fn read_mask(path: &Path) -> Result<ForegroundMask> {
    let img = open_image(path)?.to_luma8();
    let (w, h) = img.dimensions();
    ForegroundMask::from_bits(w, h, img.into_raw().into_iter().map(|v| v != 0).collect())
}

/// One line of the ROI stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoiRecord {
    pub frame_index: u64,
    pub rois: Vec<RegionOfInterest>,
}

/// Appends one JSON record for `frame_index`, even when `rois` is empty.
pub fn write_rois<W: Write>(rois: &[RegionOfInterest], frame_index: u64, stream: &mut W) -> std::io::Result<()> {
    let record = RoiRecord {
        frame_index,
        rois: rois.to_vec(),
    };
    serde_json::to_writer(&mut *stream, &record)?;
    stream.write_all(b"\n")
}

pub fn read_roi_records<R: BufRead>(reader: R) -> std::result::Result<Vec<RoiRecord>, String> {
    reader
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|line| {
            let line = line.map_err(|e| e.to_string())?;
            serde_json::from_str(&line).map_err(|e| e.to_string())
        })
        .collect()
}

pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_names_follow_pattern() {
        let m = SequenceManifest::new("/x", 3, BitDepth::Eight);
        assert_eq!(m.file_name(7), "000007.png");
        assert_eq!(m.parse_index("000007.png"), Some(7));
        assert_eq!(m.parse_index("7.png"), None);
        assert_eq!(m.parse_index("000007.jpg"), None);
    }

    #[test]
    fn roi_record_schema() {
        let roi = RegionOfInterest {
            blob_id: 3,
            x_min: 1,
            y_min: 2,
            x_max: 4,
            y_max: 5,
            area: 9,
        };
        let mut buf = Vec::new();
        write_rois(&[roi], 12, &mut buf).unwrap();
        write_rois(&[], 13, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            r#"{"frame_index":12,"rois":[{"blob_id":3,"x_min":1,"y_min":2,"x_max":4,"y_max":5,"area":9}]}"#
        );
        assert_eq!(lines[1], r#"{"frame_index":13,"rois":[]}"#);
        let back = read_roi_records(&buf[..]).unwrap();
        assert_eq!(back[0].rois, vec![roi]);
        assert!(back[1].rois.is_empty());
    }

    #[test]
    fn mask_format_parsing() {
        assert_eq!("PGM".parse::<MaskFormat>().unwrap(), MaskFormat::Pgm);
        assert!("bmp".parse::<MaskFormat>().is_err());
    }
}
