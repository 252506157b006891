//! Moving-object segmentation for pixel-aligned RGB, depth and thermal
//! sequences.
//!
//! Each pixel keeps a window of its most recent observations in a fused
//! `(r, g, depth, thermal)` space, with `(r, g)` the colour chromaticity. A
//! new observation is foreground when its Gaussian kernel density under that
//! window falls below a threshold. Missing depth readings are scored in a
//! separate three-channel branch instead of being discarded. The raw mask is
//! cleaned with a morphological opening and every sufficiently large
//! 8-connected blob becomes a bounding-box region of interest.
//!
//! ```no_run
//! use rgbdt_core::{eval, pipeline, PipelineConfig};
//!
//! let params = eval::SynthParams::preset("moving-square").unwrap();
//! let seq = eval::synth_sequence(&params, 0).unwrap();
//! let (_bw, outputs) = pipeline::run_frames(&PipelineConfig::default(), &seq.frames).unwrap();
//! println!("{} ROIs on the last frame", outputs.last().unwrap().rois.len());
//! ```

pub mod cue;
pub mod error;
pub mod eval;
pub mod io;
pub mod kde;
pub mod pipeline;
mod pixel_model;
pub mod postprocess;
pub mod scene;
mod types;

pub use error::{Error, Result};
pub use kde::{classify, estimate_bandwidths, kde_density, update, BandwidthEstimator, Classification, Kernel};
pub use pixel_model::PixelModel;
pub use scene::SceneModel;
pub use types::{
    validate_config, BandwidthVector, BitDepth, BoundingBox, ForegroundMask, FrameStack, ObservationVector,
    PipelineConfig, RegionOfInterest,
};
