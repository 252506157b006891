//! Diagonal-bandwidth Gaussian kernel density over a pixel's sample window,
//! threshold classification, and bandwidth estimation from frame history.
//!
//! Samples are split by whether their depth was present. A query with valid
//! depth is scored against the valid-depth samples with the four-channel
//! kernel; a query without depth is scored against the depth-absent samples
//! with the three-channel `(r, g, thermal)` kernel. Both branches share the
//! `1 / count` weight, so the two partial densities carry masses
//! `valid_count / count` and `ado_count / count`.

use std::f64::consts::PI;

use crate::cue::observation_at;
use crate::error::{Error, Result};
use crate::pixel_model::PixelModel;
use crate::types::{BandwidthVector, FrameStack, ObservationVector, PipelineConfig};

/// Robust standard-deviation estimate from the median absolute difference of
/// consecutive samples: a normal difference has spread `σ√2` and its absolute
/// value has median `≈ 0.68 · σ√2`.
const MEDIAN_ABS_DIFF_SCALE: f64 = 0.68;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Foreground,
    Background,
}

impl Classification {
    pub fn is_foreground(self) -> bool {
        self == Classification::Foreground
    }
}

/// Bandwidth-dependent constants, precomputed once per bandwidth vector.
#[derive(Debug, Clone, Copy)]
pub struct Kernel {
    /// `1 / (2σ_j²)` for `[r, g, depth, thermal]`.
    half_inv_var: [f64; 4],
    /// `Π_j 1/√(2πσ_j²)` over all four channels.
    norm_valid: f64,
    /// Same product without the depth channel.
    norm_ado: f64,
}

impl Kernel {
    pub fn new(bw: &BandwidthVector) -> Self {
        let sigmas = bw.as_array();
        let half_inv_var = sigmas.map(|s| 0.5 / (s * s));
        let peak = sigmas.map(|s| 1.0 / (2.0 * PI * s * s).sqrt());
        Self {
            half_inv_var,
            norm_valid: peak[0] * peak[1] * peak[2] * peak[3],
            norm_ado: peak[0] * peak[1] * peak[3],
        }
    }

    /// Density of `obs` under `model`, or 0 for an empty model.
    #[inline]
    pub(crate) fn density_unchecked(&self, obs: &ObservationVector, model: &PixelModel) -> f64 {
        let n = model.count();
        if n == 0 {
            return 0.0;
        }
        let [kr, kg, kd, kt] = self.half_inv_var;
        let (r, g, t) = (obs.r, obs.g, obs.thermal);
        let mut acc = 0.0;
        match obs.depth {
            Some(d) => {
                if model.valid_count() == 0 {
                    return 0.0;
                }
                for s in model.raw_samples() {
                    if s.is_ado() {
                        continue;
                    }
                    let dr = r - s.r as f64;
                    let dg = g - s.g as f64;
                    let dd = d - s.depth as f64;
                    let dt = t - s.thermal as f64;
                    acc += (-(kr * dr * dr + kg * dg * dg + kd * dd * dd + kt * dt * dt)).exp();
                }
                acc * self.norm_valid / n as f64
            }
            None => {
                if model.ado_count() == 0 {
                    return 0.0;
                }
                for s in model.raw_samples() {
                    if !s.is_ado() {
                        continue;
                    }
                    let dr = r - s.r as f64;
                    let dg = g - s.g as f64;
                    let dt = t - s.thermal as f64;
                    acc += (-(kr * dr * dr + kg * dg * dg + kt * dt * dt)).exp();
                }
                acc * self.norm_ado / n as f64
            }
        }
    }

    pub fn density(&self, obs: &ObservationVector, model: &PixelModel) -> Result<f64> {
        if model.is_empty() {
            return Err(Error::EmptyModel);
        }
        Ok(self.density_unchecked(obs, model))
    }

    /// Foreground iff density is strictly below `threshold`. An empty model
    /// always yields background.
    #[inline]
    pub fn classify(&self, obs: &ObservationVector, model: &PixelModel, threshold: f64) -> Classification {
        if !model.is_empty() && self.density_unchecked(obs, model) < threshold {
            Classification::Foreground
        } else {
            Classification::Background
        }
    }
}

pub fn kde_density(obs: &ObservationVector, model: &PixelModel, bw: &BandwidthVector) -> Result<f64> {
    Kernel::new(bw).density(obs, model)
}

pub fn classify(obs: &ObservationVector, model: &PixelModel, bw: &BandwidthVector, threshold: f64) -> Classification {
    Kernel::new(bw).classify(obs, model, threshold)
}

/// Blind update: `obs` always enters the window.
pub fn update(model: &mut PixelModel, obs: &ObservationVector) {
    model.update(obs);
}

/// Streaming accumulator for [`estimate_bandwidths`]. Holds the previous
/// frame's observations plus every absolute consecutive difference seen so
/// far, in single precision.
#[derive(Debug, Default)]
pub struct BandwidthEstimator {
    previous: Option<(u32, u32, Vec<ObservationVector>)>,
    frames: usize,
    diffs: [Vec<f32>; 4],
}

impl BandwidthEstimator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn frames_seen(&self) -> usize {
        self.frames
    }

    pub fn push(&mut self, frame: &FrameStack, config: &PipelineConfig) -> Result<()> {
        let current: Vec<ObservationVector> = (0..frame.pixel_count())
            .map(|i| observation_at(frame, i, config.depth_max))
            .collect();
        if let Some((w, h, prev)) = &self.previous {
            if (*w, *h) != (frame.width(), frame.height()) {
                return Err(Error::DimensionMismatch {
                    what: format!("frame {} in bandwidth history", frame.frame_index()),
                    expected_width: *w,
                    expected_height: *h,
                    width: frame.width(),
                    height: frame.height(),
                });
            }
            for (a, b) in prev.iter().zip(&current) {
                self.diffs[0].push((a.r - b.r).abs() as f32);
                self.diffs[1].push((a.g - b.g).abs() as f32);
                if let (Some(da), Some(db)) = (a.depth, b.depth) {
                    self.diffs[2].push((da - db).abs() as f32);
                }
                self.diffs[3].push((a.thermal - b.thermal).abs() as f32);
            }
        }
        self.previous = Some((frame.width(), frame.height(), current));
        self.frames += 1;
        Ok(())
    }

    pub fn finish(mut self, config: &PipelineConfig) -> Result<BandwidthVector> {
        if self.frames < 2 {
            return Err(Error::HistoryTooShort(self.frames));
        }
        let floor = config.sigma_floor;
        let sigma = |diffs: &mut Vec<f32>| {
            let m = median(diffs).unwrap_or(0.0);
            (m / (MEDIAN_ABS_DIFF_SCALE * std::f64::consts::SQRT_2)).max(floor)
        };
        let [r, g, d, t] = &mut self.diffs;
        BandwidthVector::new(sigma(r), sigma(g), sigma(d), sigma(t) * config.thermal_bandwidth_factor)
    }
}

fn median(values: &mut [f32]) -> Option<f64> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mid = n / 2;
    let (lower, upper, _) = values.select_nth_unstable_by(mid, f32::total_cmp);
    let upper = *upper as f64;
    if n % 2 == 1 {
        Some(upper)
    } else {
        let below = lower.iter().copied().fold(f32::NEG_INFINITY, f32::max) as f64;
        Some(0.5 * (below + upper))
    }
}

/// Per-channel bandwidths from the median absolute consecutive difference
/// over all pixels, floored at `sigma_floor`, with the thermal channel
/// widened by `thermal_bandwidth_factor`.
pub fn estimate_bandwidths(history: &[FrameStack], config: &PipelineConfig) -> Result<BandwidthVector> {
    if history.len() < 2 {
        return Err(Error::HistoryTooShort(history.len()));
    }
    let mut est = BandwidthEstimator::new();
    for frame in history {
        est.push(frame, config)?;
    }
    est.finish(config)
}
