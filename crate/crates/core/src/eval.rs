//! Synthetic RGB-D-thermal sequences with exact ground truth, and scoring of
//! predicted masks and regions against it.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{write_frame, write_mask, MaskFormat, SequenceManifest};
use crate::types::{BitDepth, BoundingBox, ForegroundMask, FrameStack, PipelineConfig, RegionOfInterest};

/// Raw sensor values of one synthetic material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelValues {
    pub rgb: [u8; 3],
    /// Millimetres; 0 would read as a missing depth sample.
    pub depth: u16,
    pub thermal: u16,
}

/// Standard deviation of the additive noise, in raw units per channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseStd {
    pub rgb: f64,
    pub depth: f64,
    pub thermal: f64,
}

/// Top-left corner of the square object at a given frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Waypoint {
    pub frame: usize,
    pub x: u32,
    pub y: u32,
}

/// The object is drawn only on frames that have a waypoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub width: u32,
    pub height: u32,
    pub background: ChannelValues,
    pub noise: NoiseStd,
    pub object_size: u32,
    pub object: ChannelValues,
    pub trajectory: Vec<Waypoint>,
    pub ado_speckle_rate: f64,
    pub frame_count: usize,
    pub thermal_bits: BitDepth,
}

/// Noise of 2/255 of full scale on every channel, with depth scaled to an
/// 8 m range.
pub const PRESET_NOISE: NoiseStd = NoiseStd {
    rgb: 2.0,
    depth: 2.0 / 255.0 * 8000.0,
    thermal: 2.0,
};

pub const PRESET_BACKGROUND: ChannelValues = ChannelValues {
    rgb: [110, 120, 100],
    depth: 4200,
    thermal: 90,
};

pub const PRESET_OBJECT: ChannelValues = ChannelValues {
    rgb: [170, 90, 70],
    depth: 2500,
    thermal: 180,
};

/// Names accepted by [`SynthParams::preset`].
pub const PRESETS: [&str; 3] = ["static", "moving-square", "halting-square"];

/// Bounce along one axis between 0 and `span`.
fn bounce(pos: i64, span: i64) -> u32 {
    let period = 2 * span;
    let p = pos.rem_euclid(period);
    (if p <= span { p } else { period - p }) as u32
}

/// Square path sweeping the frame diagonally, reflecting off the borders.
/// Horizontal and vertical speeds differ so the object keeps visiting new
/// ground instead of retracing one diagonal.
pub fn sweep_trajectory(
    width: u32,
    height: u32,
    size: u32,
    first_frame: usize,
    frames: usize,
    speed: (i64, i64),
) -> Vec<Waypoint> {
    let span_x = (width - size) as i64;
    let span_y = (height - size) as i64;
    (0..frames)
        .map(|k| {
            let k = k as i64;
            Waypoint {
                frame: first_frame + k as usize,
                x: bounce(k * speed.0, span_x),
                y: bounce(3 + k * speed.1, span_y),
            }
        })
        .collect()
}

impl SynthParams {
    /// 64×64 sequence of 200 object-free frames, with the preset noise.
    fn base(frame_count: usize) -> Self {
        Self {
            width: 64,
            height: 64,
            background: PRESET_BACKGROUND,
            noise: PRESET_NOISE,
            object_size: 12,
            object: PRESET_OBJECT,
            trajectory: Vec::new(),
            ado_speckle_rate: 0.01,
            frame_count,
            thermal_bits: BitDepth::Eight,
        }
    }

    /// * `static`: 200 background frames.
    /// * `moving-square`: 200 background frames, then 100 frames of a 12×12
    ///   square sweeping the frame.
    /// * `halting-square`: as above for 40 moving frames, after which the
    ///   square stops and stays put for 200 frames.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "static" => Some(Self::base(200)),
            "moving-square" => {
                let mut p = Self::base(300);
                p.trajectory = sweep_trajectory(64, 64, 12, 200, 100, MOVING_SPEED);
                Some(p)
            }
            "halting-square" => {
                let mut p = Self::base(440);
                p.trajectory = sweep_trajectory(64, 64, 12, 200, 40, MOVING_SPEED);
                let last = *p.trajectory.last().unwrap();
                p.trajectory.extend((240..440).map(|frame| Waypoint { frame, ..last }));
                Some(p)
            }
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        if self.width == 0 || self.height == 0 {
            return fail("frame dimensions must be positive".into());
        }
        if self.object_size == 0 {
            return fail("object_size must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.ado_speckle_rate) {
            return fail(format!("ado_speckle_rate {} outside [0, 1]", self.ado_speckle_rate));
        }
        let noise = [self.noise.rgb, self.noise.depth, self.noise.thermal];
        if noise.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return fail("noise standard deviations must be finite and non-negative".into());
        }
        let max = self.thermal_bits.max_value();
        if self.background.thermal > max || self.object.thermal > max {
            return fail(format!("thermal value exceeds {}-bit range", self.thermal_bits.bits()));
        }
        let mut seen = vec![false; self.frame_count];
        for w in &self.trajectory {
            if w.frame >= self.frame_count {
                return fail(format!("waypoint frame {} outside [0, {})", w.frame, self.frame_count));
            }
            if std::mem::replace(&mut seen[w.frame], true) {
                return fail(format!("duplicate waypoint for frame {}", w.frame));
            }
            if w.x as u64 + self.object_size as u64 > self.width as u64
                || w.y as u64 + self.object_size as u64 > self.height as u64
            {
                return fail(format!(
                    "object at ({}, {}) does not fit in frame {}",
                    w.x, w.y, w.frame
                ));
            }
        }
        Ok(())
    }

    pub fn waypoint(&self, frame: usize) -> Option<&Waypoint> {
        self.trajectory.iter().find(|w| w.frame == frame)
    }

    /// Ground-truth box of the object on `frame`, if drawn.
    pub fn object_box(&self, frame: usize) -> Option<BoundingBox> {
        self.waypoint(frame)
            .map(|w| BoundingBox::new(w.x, w.y, w.x + self.object_size - 1, w.y + self.object_size - 1))
    }
}

/// Density threshold matched to the presets' noise level.
///
/// With 2/255 noise the estimated bandwidths are about 0.005 on the colour
/// and depth channels, putting the four-channel peak density near 2e6. A
/// threshold at roughly 5% of that peak keeps an object pixel foreground
/// while only a few of its window's samples come from the object.
pub const PRESET_FOREGROUND_THRESHOLD: f64 = 1e5;

/// Pipeline configuration used with the synthetic presets: defaults apart
/// from [`PRESET_FOREGROUND_THRESHOLD`].
pub fn preset_config() -> PipelineConfig {
    PipelineConfig {
        foreground_threshold: PRESET_FOREGROUND_THRESHOLD,
        ..PipelineConfig::default()
    }
}

/// Horizontal and vertical pixels per frame of the preset sweep.
pub const MOVING_SPEED: (i64, i64) = (5, 3);

#[derive(Debug, Clone)]
pub struct SyntheticSequence {
    pub params: SynthParams,
    pub frames: Vec<FrameStack>,
    pub gt_masks: Vec<ForegroundMask>,
    /// Empty on frames without the object.
    pub gt_boxes: Vec<Vec<BoundingBox>>,
}

fn noisy<R: Rng>(rng: &mut R, base: u16, normal: &Option<Normal<f64>>, max: f64) -> u16 {
    match normal {
        Some(n) => (base as f64 + n.sample(rng)).round().clamp(0.0, max) as u16,
        None => base,
    }
}

fn normal(std: f64) -> Option<Normal<f64>> {
    (std > 0.0).then(|| Normal::new(0.0, std).expect("validated std"))
}

/// Renders the sequence deterministically from `seed`. Background and object
/// pixels get independent Gaussian noise rounded and clamped to each
/// channel's range; noisy depth is clamped to at least 1 so that only the
/// speckle produces missing readings.
pub fn synth_sequence(params: &SynthParams, seed: u64) -> Result<SyntheticSequence> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (params.width, params.height);
    let pixels = w as usize * h as usize;
    let rgb_noise = normal(params.noise.rgb);
    let depth_noise = normal(params.noise.depth);
    let thermal_noise = normal(params.noise.thermal);
    let thermal_max = params.thermal_bits.max_value() as f64;

    let mut frames = Vec::with_capacity(params.frame_count);
    let mut gt_masks = Vec::with_capacity(params.frame_count);
    let mut gt_boxes = Vec::with_capacity(params.frame_count);
    for index in 0..params.frame_count {
        let bbox = params.object_box(index);
        let mut gt = ForegroundMask::new(w, h);
        let mut rgb = Vec::with_capacity(3 * pixels);
        let mut depth = Vec::with_capacity(pixels);
        let mut thermal = Vec::with_capacity(pixels);
        for y in 0..h {
            for x in 0..w {
                let inside = bbox.is_some_and(|b| b.contains(x, y));
                gt.set(x, y, inside);
                let values = if inside { &params.object } else { &params.background };
                for c in values.rgb {
                    rgb.push(noisy(&mut rng, c as u16, &rgb_noise, 255.0) as u8);
                }
                let d = noisy(&mut rng, values.depth, &depth_noise, u16::MAX as f64).max(1);
                let speckle = params.ado_speckle_rate > 0.0 && rng.random_bool(params.ado_speckle_rate);
                depth.push(if speckle { 0 } else { d });
                thermal.push(noisy(&mut rng, values.thermal, &thermal_noise, thermal_max));
            }
        }
        frames.push(FrameStack::new(
            w,
            h,
            rgb,
            depth,
            thermal,
            params.thermal_bits,
            index as u64,
        )?);
        gt_masks.push(gt);
        gt_boxes.push(bbox.into_iter().collect());
    }
    Ok(SyntheticSequence {
        params: params.clone(),
        frames,
        gt_masks,
        gt_boxes,
    })
}

pub const GT_DIR: &str = "gt";
pub const GT_BOX_FILE: &str = "gt_boxes.jsonl";
pub const CONFIG_FILE: &str = "config.toml";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GtBoxRecord {
    pub frame_index: u64,
    pub boxes: Vec<BoundingBox>,
}

/// Writes the sequence in the loader's layout plus `gt/` masks,
/// `gt_boxes.jsonl` and a `config.toml` holding [`preset_config`].
pub fn write_synthetic(seq: &SyntheticSequence, root: &Path) -> Result<SequenceManifest> {
    let manifest = SequenceManifest::new(root, seq.frames.len(), seq.params.thermal_bits);
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    for frame in &seq.frames {
        write_frame(&manifest, frame)?;
    }
    manifest.save()?;
    let gt_dir = root.join(GT_DIR);
    fs::create_dir_all(&gt_dir).map_err(|e| Error::io(&gt_dir, e))?;
    for (i, mask) in seq.gt_masks.iter().enumerate() {
        write_mask(mask, &gt_dir.join(format!("{i:06}.png")), MaskFormat::Png)?;
    }
    let box_path = root.join(GT_BOX_FILE);
    let file = fs::File::create(&box_path).map_err(|e| Error::io(&box_path, e))?;
    let mut out = BufWriter::new(file);
    for (i, boxes) in seq.gt_boxes.iter().enumerate() {
        let record = GtBoxRecord {
            frame_index: i as u64,
            boxes: boxes.clone(),
        };
        serde_json::to_writer(&mut out, &record).expect("record serialises");
        out.write_all(b"\n").map_err(|e| Error::io(&box_path, e))?;
    }
    out.flush().map_err(|e| Error::io(&box_path, e))?;
    let config_path = root.join(CONFIG_FILE);
    let text = toml::to_string(&preset_config()).expect("config serialises");
    fs::write(&config_path, text).map_err(|e| Error::io(&config_path, e))?;
    Ok(manifest)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

/// Pixel precision, recall and F-measure. Two empty masks score 1 on all
/// three; any undefined ratio otherwise scores 0.
pub fn mask_metrics(pred: &ForegroundMask, gt: &ForegroundMask) -> Result<MaskMetrics> {
    gt.check_dimensions(pred, "predicted mask")?;
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    for (&p, &g) in pred.bits().iter().zip(gt.bits()) {
        match (p, g) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => {}
        }
    }
    if tp + fp == 0 && tp + fneg == 0 {
        return Ok(MaskMetrics {
            precision: 1.0,
            recall: 1.0,
            f_measure: 1.0,
        });
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fneg);
    let f_measure = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(MaskMetrics {
        precision,
        recall,
        f_measure,
    })
}

/// Greedy one-to-one matching by descending IoU. Returns, per ground-truth
/// box, whether some prediction matched it with IoU ≥ `iou_threshold`.
pub fn roi_match(pred: &[RegionOfInterest], gt_boxes: &[BoundingBox], iou_threshold: f64) -> Result<Vec<bool>> {
    if !(iou_threshold > 0.0 && iou_threshold <= 1.0) {
        return Err(Error::InvalidIouThreshold(iou_threshold));
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(pred.len() * gt_boxes.len());
    for (i, p) in pred.iter().enumerate() {
        for (j, g) in gt_boxes.iter().enumerate() {
            pairs.push((p.bbox().iou(g), i, j));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut pred_used = vec![false; pred.len()];
    let mut hits = vec![false; gt_boxes.len()];
    for (iou, i, j) in pairs {
        if iou < iou_threshold {
            break;
        }
        if !pred_used[i] && !hits[j] {
            pred_used[i] = true;
            hits[j] = true;
        }
    }
    Ok(hits)
}
