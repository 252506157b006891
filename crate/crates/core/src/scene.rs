use rayon::prelude::*;

use crate::cue::observation_at;
use crate::error::{Error, Result};
use crate::kde::Kernel;
use crate::pixel_model::PixelModel;
use crate::types::{BandwidthVector, ForegroundMask, FrameStack, PipelineConfig};

/// One [`PixelModel`] per pixel plus the shared kernel bandwidths.
#[derive(Debug, Clone)]
pub struct SceneModel {
    width: u32,
    height: u32,
    grid: Vec<PixelModel>,
    bandwidths: BandwidthVector,
    kernel: Kernel,
    config: PipelineConfig,
}

impl SceneModel {
    /// Bandwidths below `config.sigma_floor` are raised to it.
    pub fn new(width: u32, height: u32, bandwidths: BandwidthVector, config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let bandwidths = bandwidths.with_floor(config.sigma_floor);
        let pixels = width as usize * height as usize;
        Ok(Self {
            width,
            height,
            grid: vec![PixelModel::new(config.window_n); pixels],
            kernel: Kernel::new(&bandwidths),
            bandwidths,
            config,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bandwidths(&self) -> &BandwidthVector {
        &self.bandwidths
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn pixel(&self, x: u32, y: u32) -> &PixelModel {
        &self.grid[y as usize * self.width as usize + x as usize]
    }

    /// Classifies every pixel of `frame` against its current window, then
    /// inserts the pixel's observation. Rows are processed in parallel.
    pub fn process_frame(&mut self, frame: &FrameStack) -> Result<ForegroundMask> {
        if (frame.width(), frame.height()) != (self.width, self.height) {
            return Err(Error::DimensionMismatch {
                what: format!("frame {}", frame.frame_index()),
                expected_width: self.width,
                expected_height: self.height,
                width: frame.width(),
                height: frame.height(),
            });
        }
        let mut mask = ForegroundMask::new(self.width, self.height);
        if self.grid.is_empty() {
            return Ok(mask);
        }
        let width = self.width as usize;
        let kernel = self.kernel;
        let threshold = self.config.foreground_threshold;
        let depth_max = self.config.depth_max;
        self.grid
            .par_chunks_mut(width)
            .zip(mask.bits_mut().par_chunks_mut(width))
            .enumerate()
            .for_each(|(y, (models, bits))| {
                let row = y * width;
                for (x, (model, bit)) in models.iter_mut().zip(bits).enumerate() {
                    let obs = observation_at(frame, row + x, depth_max);
                    *bit = kernel.classify(&obs, model, threshold).is_foreground();
                    model.update(&obs);
                }
            });
        Ok(mask)
    }
}
