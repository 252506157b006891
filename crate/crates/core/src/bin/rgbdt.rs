use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rgbdt_core::eval::{self, SynthParams};
use rgbdt_core::io::{self, MaskFormat, SequenceManifest};
use rgbdt_core::pipeline::{self, RunOptions};
use rgbdt_core::{Error, PipelineConfig, Result};

#[derive(Parser)]
#[command(
    name = "rgbdt",
    version,
    about = "Moving-object regions from RGB-D-thermal sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a sequence and write masks, ROI records and a run report.
    Run(RunArgs),
    /// Generate a synthetic sequence with ground truth.
    Synth {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Score predicted masks against ground truth, as CSV.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with any subset of the pipeline fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value = "png")]
    mask_format: MaskFormat,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    window_n: Option<usize>,
    #[arg(long)]
    foreground_threshold: Option<f64>,
    #[arg(long)]
    sigma_floor: Option<f64>,
    #[arg(long)]
    thermal_bandwidth_factor: Option<f64>,
    #[arg(long)]
    min_blob_area: Option<usize>,
    #[arg(long)]
    opening_radius: Option<usize>,
    #[arg(long)]
    depth_max: Option<f64>,
}

impl RunArgs {
    fn config(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => io::load_config(path)?,
            None => PipelineConfig::default(),
        };
        macro_rules! overlay {
            ($($field:ident),*) => { $(if let Some(v) = self.$field { cfg.$field = v; })* };
        }
        overlay!(
            window_n,
            foreground_threshold,
            sigma_floor,
            thermal_bandwidth_factor,
            min_blob_area,
            opening_radius,
            depth_max
        );
        rgbdt_core::validate_config(cfg)
    }
}

fn run(args: RunArgs) -> Result<()> {
    let config = args.config()?;
    if let Some(n) = args.threads {
        // Only fails if a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let manifest = SequenceManifest::open(&args.input)?;
    let report = pipeline::run(
        &config,
        &manifest,
        &args.output,
        RunOptions {
            mask_format: args.mask_format,
        },
    )?;
    eprintln!(
        "processed {}/{} frames, mean foreground fraction {:.5}",
        report.frames_processed, report.frame_count, report.mean_foreground_fraction
    );
    Ok(())
}

fn synth(preset: &str, output: &Path, seed: u64) -> Result<()> {
    let params = SynthParams::preset(preset).ok_or_else(|| {
        Error::InvalidParams(format!(
            "unknown preset {preset:?}, expected one of {:?}",
            eval::PRESETS
        ))
    })?;
    let seq = eval::synth_sequence(&params, seed)?;
    eval::write_synthetic(&seq, output)?;
    eprintln!("wrote {} frames to {}", seq.frames.len(), output.display());
    Ok(())
}

/// Mask images in `dir`, or in its `masks/` or `gt/` subdirectory, keyed by
/// the frame index in the file name.
fn mask_files(dir: &Path) -> Result<Vec<(u64, PathBuf)>> {
    let dir = [pipeline::MASK_DIR, eval::GT_DIR]
        .iter()
        .map(|sub| dir.join(sub))
        .find(|d| d.is_dir())
        .unwrap_or_else(|| dir.to_path_buf());
    let mut files = Vec::new();
    for entry in fs::read_dir(&dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })? {
        let path = entry
            .map_err(|e| Error::Io {
                path: dir.clone(),
                source: e,
            })?
            .path();
        let index = path
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(|s| s.parse::<u64>().ok());
        if let Some(index) = index {
            files.push((index, path));
        }
    }
    files.sort();
    Ok(files)
}

fn evaluate(pred: &Path, gt: &Path, output: Option<&Path>) -> Result<()> {
    let gt_files = mask_files(gt)?;
    let pred_files: std::collections::HashMap<u64, PathBuf> = mask_files(pred)?.into_iter().collect();
    let mut csv = String::from("frame_index,precision,recall,f_measure\n");
    let mut sums = [0.0; 3];
    for (index, gt_path) in &gt_files {
        let gt_mask = io::read_mask(gt_path)?;
        let pred_mask = match pred_files.get(index) {
            Some(path) => io::read_mask(path)?,
            None => {
                return Err(Error::MissingFrame {
                    index: *index as usize,
                    modality: "predicted mask",
                    path: pred.to_path_buf(),
                })
            }
        };
        let m = eval::mask_metrics(&pred_mask, &gt_mask)?;
        csv.push_str(&format!(
            "{index},{:.6},{:.6},{:.6}\n",
            m.precision, m.recall, m.f_measure
        ));
        sums[0] += m.precision;
        sums[1] += m.recall;
        sums[2] += m.f_measure;
    }
    let n = gt_files.len().max(1) as f64;
    csv.push_str(&format!(
        "mean,{:.6},{:.6},{:.6}\n",
        sums[0] / n,
        sums[1] / n,
        sums[2] / n
    ));
    match output {
        Some(path) => fs::write(path, csv).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => std::io::stdout().write_all(csv.as_bytes()).map_err(|e| Error::Io {
            path: "<stdout>".into(),
            source: e,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Synth { preset, output, seed } => synth(&preset, &output, seed),
        Command::Eval { pred, gt, output } => evaluate(&pred, &gt, output.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
