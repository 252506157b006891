//! Shared data model: frames, observations, bandwidths, masks, regions and
//! pipeline configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sample width of a single-channel sensor plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn bits(self) -> u8 {
        match self {
            BitDepth::Eight => 8,
            BitDepth::Sixteen => 16,
        }
    }

    /// Largest representable raw value, `2^bits - 1`.
    pub fn max_value(self) -> u16 {
        match self {
            BitDepth::Eight => u8::MAX as u16,
            BitDepth::Sixteen => u16::MAX,
        }
    }
}

impl TryFrom<u8> for BitDepth {
    type Error = String;

    fn try_from(bits: u8) -> Result<Self, String> {
        match bits {
            8 => Ok(BitDepth::Eight),
            16 => Ok(BitDepth::Sixteen),
            other => Err(format!("unsupported bit depth {other}, expected 8 or 16")),
        }
    }
}

impl From<BitDepth> for u8 {
    fn from(depth: BitDepth) -> u8 {
        depth.bits()
    }
}

/// One pixel-aligned RGB + depth + thermal capture.
///
/// Depth is raw sensor units (millimetres) with 0 reserved for "no reading".
/// Thermal is raw intensity at the declared [`BitDepth`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameStack {
    width: u32,
    height: u32,
    rgb: Vec<u8>,
    depth: Vec<u16>,
    thermal: Vec<u16>,
    thermal_bits: BitDepth,
    frame_index: u64,
}

impl FrameStack {
    /// Builds a frame from row-major planes. `rgb` is interleaved, three bytes
    /// per pixel.
    pub fn new(
        width: u32,
        height: u32,
        rgb: Vec<u8>,
        depth: Vec<u16>,
        thermal: Vec<u16>,
        thermal_bits: BitDepth,
        frame_index: u64,
    ) -> Result<Self> {
        let pixels = width as usize * height as usize;
        let plane_dims = |what: &str, len: usize, per_pixel: usize| -> Result<()> {
            if len == pixels * per_pixel {
                Ok(())
            } else {
                Err(Error::PlaneLength {
                    what: format!("{what} plane of frame {frame_index}"),
                    width,
                    height,
                    expected: pixels * per_pixel,
                    len,
                })
            }
        };
        plane_dims("rgb", rgb.len(), 3)?;
        plane_dims("depth", depth.len(), 1)?;
        plane_dims("thermal", thermal.len(), 1)?;
        if let Some(&bad) = thermal.iter().find(|&&t| t > thermal_bits.max_value()) {
            return Err(Error::OutOfRange {
                what: "thermal intensity",
                value: bad as u64,
            });
        }
        Ok(Self {
            width,
            height,
            rgb,
            depth,
            thermal,
            thermal_bits,
            frame_index,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn frame_index(&self) -> u64 {
        self.frame_index
    }

    pub fn thermal_bits(&self) -> BitDepth {
        self.thermal_bits
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x < self.width && y < self.height
    }

    #[inline]
    pub(crate) fn offset(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    #[inline]
    pub(crate) fn rgb_at(&self, idx: usize) -> [u8; 3] {
        [self.rgb[3 * idx], self.rgb[3 * idx + 1], self.rgb[3 * idx + 2]]
    }

    #[inline]
    pub(crate) fn depth_at(&self, idx: usize) -> u16 {
        self.depth[idx]
    }

    #[inline]
    pub(crate) fn thermal_at(&self, idx: usize) -> u16 {
        self.thermal[idx]
    }

    pub fn rgb(&self, x: u32, y: u32) -> [u8; 3] {
        self.rgb_at(self.offset(x, y))
    }

    pub fn depth(&self, x: u32, y: u32) -> u16 {
        self.depth[self.offset(x, y)]
    }

    pub fn thermal(&self, x: u32, y: u32) -> u16 {
        self.thermal[self.offset(x, y)]
    }

    pub fn rgb_plane(&self) -> &[u8] {
        &self.rgb
    }

    pub fn depth_plane(&self) -> &[u16] {
        &self.depth
    }

    pub fn thermal_plane(&self) -> &[u16] {
        &self.thermal
    }
}

/// A single pixel's fused measurement in normalised units.
///
/// `depth` is `None` for an absent depth observation (ADO); the flag and the
/// value cannot disagree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationVector {
    pub r: f64,
    pub g: f64,
    pub depth: Option<f64>,
    pub thermal: f64,
}

impl ObservationVector {
    pub fn new(r: f64, g: f64, depth: Option<f64>, thermal: f64) -> Self {
        Self { r, g, depth, thermal }
    }

    /// True when the depth sensor returned nothing for this pixel.
    pub fn ado(&self) -> bool {
        self.depth.is_none()
    }
}

/// Per-channel kernel standard deviations, the diagonal of the bandwidth
/// matrix (entries are squared when used as variances).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthVector {
    pub sigma_r: f64,
    pub sigma_g: f64,
    pub sigma_depth: f64,
    pub sigma_thermal: f64,
}

impl BandwidthVector {
    pub fn new(sigma_r: f64, sigma_g: f64, sigma_depth: f64, sigma_thermal: f64) -> Result<Self> {
        let bw = Self {
            sigma_r,
            sigma_g,
            sigma_depth,
            sigma_thermal,
        };
        if let Some(bad) = bw.as_array().into_iter().find(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidBandwidth(format!(
                "every sigma must be finite and positive, got {bad}"
            )));
        }
        Ok(bw)
    }

    pub fn uniform(sigma: f64) -> Result<Self> {
        Self::new(sigma, sigma, sigma, sigma)
    }

    /// `[r, g, depth, thermal]`.
    pub fn as_array(&self) -> [f64; 4] {
        [self.sigma_r, self.sigma_g, self.sigma_depth, self.sigma_thermal]
    }

    /// Raises every channel to at least `floor`.
    pub fn with_floor(self, floor: f64) -> Self {
        Self {
            sigma_r: self.sigma_r.max(floor),
            sigma_g: self.sigma_g.max(floor),
            sigma_depth: self.sigma_depth.max(floor),
            sigma_thermal: self.sigma_thermal.max(floor),
        }
    }
}

/// Binary per-pixel classification of one frame; `true` is foreground.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ForegroundMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl ForegroundMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width as usize * height as usize {
            return Err(Error::PlaneLength {
                what: "mask bits".into(),
                width,
                height,
                expected: width as usize * height as usize,
                len: bits.len(),
            });
        }
        Ok(Self { width, height, bits })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub(crate) fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.bits
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        self.bits[y as usize * self.width as usize + x as usize] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Fraction of pixels marked foreground; 0 for a zero-area mask.
    pub fn fraction(&self) -> f64 {
        if self.bits.is_empty() {
            0.0
        } else {
            self.count() as f64 / self.bits.len() as f64
        }
    }

    pub fn same_dimensions(&self, other: &ForegroundMask) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Every foreground pixel of `self` is also foreground in `other`.
    pub fn is_subset_of(&self, other: &ForegroundMask) -> bool {
        self.same_dimensions(other) && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub(crate) fn check_dimensions(&self, other: &ForegroundMask, what: &str) -> Result<()> {
        if self.same_dimensions(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                what: what.to_string(),
                expected_width: self.width,
                expected_height: self.height,
                width: other.width,
                height: other.height,
            })
        }
    }
}

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: u32,
    pub y_min: u32,
    pub x_max: u32,
    pub y_max: u32,
}

impl BoundingBox {
    pub fn new(x_min: u32, y_min: u32, x_max: u32, y_max: u32) -> Self {
        debug_assert!(x_min <= x_max && y_min <= y_max);
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn width(&self) -> u64 {
        (self.x_max - self.x_min) as u64 + 1
    }

    pub fn height(&self) -> u64 {
        (self.y_max - self.y_min) as u64 + 1
    }

    pub fn area(&self) -> u64 {
        self.width() * self.height()
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }

    pub fn intersection(&self, other: &BoundingBox) -> Option<BoundingBox> {
        let x_min = self.x_min.max(other.x_min);
        let y_min = self.y_min.max(other.y_min);
        let x_max = self.x_max.min(other.x_max);
        let y_max = self.y_max.min(other.y_max);
        (x_min <= x_max && y_min <= y_max).then(|| BoundingBox::new(x_min, y_min, x_max, y_max))
    }

    /// Intersection over union of pixel areas, in `[0, 1]`.
    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let inter = self.intersection(other).map_or(0, |b| b.area());
        let union = self.area() + other.area() - inter;
        inter as f64 / union as f64
    }
}

/// Bounding box of one surviving foreground blob.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegionOfInterest {
    pub blob_id: u32,
    pub x_min: u32,
    pub y_min: u32,
    pub x_max: u32,
    pub y_max: u32,
    pub area: usize,
}

impl RegionOfInterest {
    pub fn bbox(&self) -> BoundingBox {
        BoundingBox::new(self.x_min, self.y_min, self.x_max, self.y_max)
    }
}

/// Tunables for the whole pipeline. Every field has a default so partial
/// configuration files are accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Samples kept per pixel.
    pub window_n: usize,
    /// Density below which a pixel is foreground.
    pub foreground_threshold: f64,
    /// Lower bound on every kernel standard deviation.
    pub sigma_floor: f64,
    /// Multiplier applied to the estimated thermal bandwidth.
    pub thermal_bandwidth_factor: f64,
    pub min_blob_area: usize,
    pub opening_radius: usize,
    /// Raw depth mapped to 1.0.
    pub depth_max: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            window_n: 100,
            foreground_threshold: 1e-4,
            sigma_floor: 2e-3,
            thermal_bandwidth_factor: 8.0,
            min_blob_area: 50,
            opening_radius: 1,
            depth_max: 8000.0,
        }
    }
}

impl PipelineConfig {
    /// Checks every invariant in field order and reports the first failure.
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        let checks: [(bool, &'static str, &'static str); 7] = [
            (self.window_n >= 2, "window_n", "window_n ≥ 2"),
            (
                positive(self.foreground_threshold),
                "foreground_threshold",
                "foreground_threshold > 0",
            ),
            (positive(self.sigma_floor), "sigma_floor", "sigma_floor > 0"),
            (
                self.thermal_bandwidth_factor.is_finite() && self.thermal_bandwidth_factor >= 1.0,
                "thermal_bandwidth_factor",
                "thermal_bandwidth_factor ≥ 1",
            ),
            (self.min_blob_area >= 1, "min_blob_area", "min_blob_area ≥ 1"),
            (self.opening_radius >= 1, "opening_radius", "opening_radius ≥ 1"),
            (positive(self.depth_max), "depth_max", "depth_max > 0"),
        ];
        match checks.into_iter().find(|(ok, _, _)| !ok) {
            Some((_, field, requirement)) => Err(Error::InvalidConfig { field, requirement }),
            None => Ok(()),
        }
    }
}

/// Returns `config` unchanged if it satisfies every invariant.
pub fn validate_config(config: PipelineConfig) -> Result<PipelineConfig> {
    config.validate()?;
    Ok(config)
}
