//! End-to-end driver: bandwidth warm-up on a sequence prefix, then per-frame
//! classify/update, opening, labelling and ROI extraction.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{load_sequence, write_mask, write_rois, MaskFormat, SequenceManifest};
use crate::kde::BandwidthEstimator;
use crate::postprocess::{connected_components, extract_rois, open, StructuringElement};
use crate::scene::SceneModel;
use crate::types::{BandwidthVector, ForegroundMask, FrameStack, PipelineConfig, RegionOfInterest};

pub const MASK_DIR: &str = "masks";
pub const ROI_FILE: &str = "rois.jsonl";
pub const REPORT_FILE: &str = "report.json";

/// Everything produced for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOutput {
    pub frame_index: u64,
    /// Density-threshold classification before clean-up.
    pub raw_mask: ForegroundMask,
    /// `raw_mask` after opening; this is what gets written and labelled.
    pub mask: ForegroundMask,
    pub rois: Vec<RegionOfInterest>,
}

/// Stateful per-sequence processor.
#[derive(Debug, Clone)]
pub struct Pipeline {
    scene: SceneModel,
    element: StructuringElement,
}

impl Pipeline {
    pub fn new(width: u32, height: u32, bandwidths: BandwidthVector, config: PipelineConfig) -> Result<Self> {
        let element = StructuringElement::square(config.opening_radius)?;
        Ok(Self {
            scene: SceneModel::new(width, height, bandwidths, config)?,
            element,
        })
    }

    pub fn scene(&self) -> &SceneModel {
        &self.scene
    }

    pub fn process(&mut self, frame: &FrameStack) -> Result<FrameOutput> {
        let raw_mask = self.scene.process_frame(frame)?;
        let mask = open(&raw_mask, &self.element);
        let components = connected_components(&mask);
        let rois = extract_rois(&components.blobs, self.scene.config().min_blob_area);
        Ok(FrameOutput {
            frame_index: frame.frame_index(),
            raw_mask,
            mask,
            rois,
        })
    }
}

/// Number of leading frames used for bandwidth estimation.
pub fn warmup_len(config: &PipelineConfig, frame_count: usize) -> usize {
    config.window_n.min(frame_count / 4)
}

/// Estimates bandwidths from `frames`. With fewer than two frames every
/// channel falls back to the floor, thermal still widened by its factor.
pub fn bandwidths_from_prefix<I>(frames: I, config: &PipelineConfig) -> Result<BandwidthVector>
where
    I: IntoIterator<Item = Result<FrameStack>>,
{
    let mut estimator = BandwidthEstimator::new();
    for frame in frames {
        estimator.push(&frame?, config)?;
    }
    if estimator.frames_seen() < 2 {
        let f = config.sigma_floor;
        return BandwidthVector::new(f, f, f, f * config.thermal_bandwidth_factor);
    }
    estimator.finish(config)
}

/// Runs the full pipeline over in-memory frames.
pub fn run_frames(config: &PipelineConfig, frames: &[FrameStack]) -> Result<(BandwidthVector, Vec<FrameOutput>)> {
    config.validate()?;
    let Some(first) = frames.first() else {
        return Ok((BandwidthVector::uniform(config.sigma_floor)?, Vec::new()));
    };
    let warmup = warmup_len(config, frames.len());
    let bandwidths = bandwidths_from_prefix(frames[..warmup].iter().cloned().map(Ok), config)?;
    let mut pipeline = Pipeline::new(first.width(), first.height(), bandwidths, config.clone())?;
    let outputs = frames.iter().map(|f| pipeline.process(f)).collect::<Result<Vec<_>>>()?;
    Ok((*pipeline.scene().bandwidths(), outputs))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub mask_format: MaskFormat,
}

/// Summary written to `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub frame_count: usize,
    pub frames_processed: usize,
    pub warmup_frames: usize,
    pub bandwidths: Option<BandwidthVector>,
    /// Mean over processed frames of the cleaned-mask foreground fraction.
    pub mean_foreground_fraction: f64,
    pub frame_times_ms: Vec<f64>,
    /// Set when processing stopped early; outputs cover only
    /// `frames_processed` frames.
    pub partial: bool,
    pub error: Option<String>,
}

impl RunReport {
    fn empty(frame_count: usize) -> Self {
        Self {
            frame_count,
            frames_processed: 0,
            warmup_frames: 0,
            bandwidths: None,
            mean_foreground_fraction: 0.0,
            frame_times_ms: Vec::new(),
            partial: false,
            error: None,
        }
    }
}

pub fn mask_path(output_dir: &Path, frame_index: u64, format: MaskFormat) -> PathBuf {
    output_dir
        .join(MASK_DIR)
        .join(format!("{frame_index:06}.{}", format.extension()))
}

fn write_report(output_dir: &Path, report: &RunReport) -> Result<()> {
    let path = output_dir.join(REPORT_FILE);
    let text = serde_json::to_string_pretty(report).expect("report serialises");
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
}

/// Streams the sequence through the pipeline, writing one mask image per
/// frame under `masks/`, one line per frame to `rois.jsonl`, and
/// `report.json`. An empty sequence writes nothing.
pub fn run(
    config: &PipelineConfig,
    manifest: &SequenceManifest,
    output_dir: &Path,
    options: RunOptions,
) -> Result<RunReport> {
    config.validate()?;
    let frames = load_sequence(manifest)?;
    let frame_count = manifest.frame_count;
    if frame_count == 0 {
        return Ok(RunReport::empty(0));
    }

    let warmup = warmup_len(config, frame_count);
    let bandwidths = bandwidths_from_prefix(load_sequence(manifest)?.take_prefix(warmup), config)?;

    let mask_dir = output_dir.join(MASK_DIR);
    fs::create_dir_all(&mask_dir).map_err(|e| Error::io(&mask_dir, e))?;
    let roi_path = output_dir.join(ROI_FILE);
    let mut roi_stream = BufWriter::new(File::create(&roi_path).map_err(|e| Error::io(&roi_path, e))?);

    let mut report = RunReport {
        warmup_frames: warmup,
        bandwidths: None,
        ..RunReport::empty(frame_count)
    };
    let mut fraction_sum = 0.0;
    let mut pipeline: Option<Pipeline> = None;

    let mut step = |frame: Result<FrameStack>, report: &mut RunReport| -> Result<()> {
        let start = Instant::now();
        let frame = frame?;
        let pipe = match &mut pipeline {
            Some(p) => p,
            None => {
                let p = Pipeline::new(frame.width(), frame.height(), bandwidths, config.clone())?;
                report.bandwidths = Some(*p.scene().bandwidths());
                pipeline.insert(p)
            }
        };
        let out = pipe.process(&frame)?;
        write_mask(
            &out.mask,
            &mask_path(output_dir, out.frame_index, options.mask_format),
            options.mask_format,
        )?;
        write_rois(&out.rois, out.frame_index, &mut roi_stream).map_err(|e| Error::io(&roi_path, e))?;
        fraction_sum += out.mask.fraction();
        report.frames_processed += 1;
        report.frame_times_ms.push(start.elapsed().as_secs_f64() * 1e3);
        Ok(())
    };

    let mut failure = None;
    for frame in frames {
        if let Err(e) = step(frame, &mut report) {
            failure = Some(e);
            break;
        }
    }
    if let Err(e) = roi_stream.flush() {
        failure.get_or_insert(Error::io(&roi_path, e));
    }
    if report.frames_processed > 0 {
        report.mean_foreground_fraction = fraction_sum / report.frames_processed as f64;
    }
    if let Some(e) = &failure {
        report.partial = true;
        report.error = Some(e.to_string());
    }
    write_report(output_dir, &report)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(report),
    }
}
