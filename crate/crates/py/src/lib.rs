//! Python bindings for `rgbdt-core`.
//!
//! Images cross the boundary as flat row-major lists (or `bytes` for the
//! interleaved RGB plane); masks are `Mask` objects that convert to and from
//! lists of booleans.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use rgbdt_core as rc;
use rgbdt_core::eval::{self, SynthParams};
use rgbdt_core::io::{MaskFormat, SequenceManifest};
use rgbdt_core::pipeline::{self, RunOptions};
use rgbdt_core::postprocess::{self, StructuringElement};

fn to_py(err: rc::Error) -> PyErr {
    match err {
        rc::Error::Io { .. } | rc::Error::Image { .. } | rc::Error::MissingFrame { .. } => {
            PyIOError::new_err(err.to_string())
        }
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn bit_depth(bits: u8) -> PyResult<rc::BitDepth> {
    rc::BitDepth::try_from(bits).map_err(PyValueError::new_err)
}

/// Tunable parameters of the pipeline. Keyword arguments override the
/// defaults; `validate()` raises `ValueError` on the first bad field.
#[pyclass(name = "PipelineConfig", module = "rgbdt", from_py_object)]
#[derive(Clone)]
struct PyPipelineConfig {
    inner: rc::PipelineConfig,
}

#[pymethods]
impl PyPipelineConfig {
    #[new]
    #[pyo3(signature = (
        window_n=None,
        foreground_threshold=None,
        sigma_floor=None,
        thermal_bandwidth_factor=None,
        min_blob_area=None,
        opening_radius=None,
        depth_max=None,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        window_n: Option<usize>,
        foreground_threshold: Option<f64>,
        sigma_floor: Option<f64>,
        thermal_bandwidth_factor: Option<f64>,
        min_blob_area: Option<usize>,
        opening_radius: Option<usize>,
        depth_max: Option<f64>,
    ) -> Self {
        let d = rc::PipelineConfig::default();
        Self {
            inner: rc::PipelineConfig {
                window_n: window_n.unwrap_or(d.window_n),
                foreground_threshold: foreground_threshold.unwrap_or(d.foreground_threshold),
                sigma_floor: sigma_floor.unwrap_or(d.sigma_floor),
                thermal_bandwidth_factor: thermal_bandwidth_factor.unwrap_or(d.thermal_bandwidth_factor),
                min_blob_area: min_blob_area.unwrap_or(d.min_blob_area),
                opening_radius: opening_radius.unwrap_or(d.opening_radius),
                depth_max: depth_max.unwrap_or(d.depth_max),
            },
        }
    }

    /// Configuration tuned for the synthetic presets.
    #[staticmethod]
    fn for_synthetic() -> Self {
        Self {
            inner: eval::preset_config(),
        }
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: rc::io::load_config(&path).map_err(to_py)?,
        })
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(to_py)
    }

    #[getter]
    fn window_n(&self) -> usize {
        self.inner.window_n
    }
    #[setter]
    fn set_window_n(&mut self, v: usize) {
        self.inner.window_n = v;
    }
    #[getter]
    fn foreground_threshold(&self) -> f64 {
        self.inner.foreground_threshold
    }
    #[setter]
    fn set_foreground_threshold(&mut self, v: f64) {
        self.inner.foreground_threshold = v;
    }
    #[getter]
    fn sigma_floor(&self) -> f64 {
        self.inner.sigma_floor
    }
    #[setter]
    fn set_sigma_floor(&mut self, v: f64) {
        self.inner.sigma_floor = v;
    }
    #[getter]
    fn thermal_bandwidth_factor(&self) -> f64 {
        self.inner.thermal_bandwidth_factor
    }
    #[setter]
    fn set_thermal_bandwidth_factor(&mut self, v: f64) {
        self.inner.thermal_bandwidth_factor = v;
    }
    #[getter]
    fn min_blob_area(&self) -> usize {
        self.inner.min_blob_area
    }
    #[setter]
    fn set_min_blob_area(&mut self, v: usize) {
        self.inner.min_blob_area = v;
    }
    #[getter]
    fn opening_radius(&self) -> usize {
        self.inner.opening_radius
    }
    #[setter]
    fn set_opening_radius(&mut self, v: usize) {
        self.inner.opening_radius = v;
    }
    #[getter]
    fn depth_max(&self) -> f64 {
        self.inner.depth_max
    }
    #[setter]
    fn set_depth_max(&mut self, v: f64) {
        self.inner.depth_max = v;
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "PipelineConfig(window_n={}, foreground_threshold={:e}, sigma_floor={}, thermal_bandwidth_factor={}, \
             min_blob_area={}, opening_radius={}, depth_max={})",
            c.window_n,
            c.foreground_threshold,
            c.sigma_floor,
            c.thermal_bandwidth_factor,
            c.min_blob_area,
            c.opening_radius,
            c.depth_max
        )
    }
}

/// Per-channel kernel standard deviations in normalised units.
#[pyclass(name = "Bandwidths", module = "rgbdt", frozen, from_py_object)]
#[derive(Clone)]
struct PyBandwidths {
    inner: rc::BandwidthVector,
}

#[pymethods]
impl PyBandwidths {
    #[new]
    fn new(sigma_r: f64, sigma_g: f64, sigma_depth: f64, sigma_thermal: f64) -> PyResult<Self> {
        Ok(Self {
            inner: rc::BandwidthVector::new(sigma_r, sigma_g, sigma_depth, sigma_thermal).map_err(to_py)?,
        })
    }

    #[getter]
    fn sigma_r(&self) -> f64 {
        self.inner.sigma_r
    }
    #[getter]
    fn sigma_g(&self) -> f64 {
        self.inner.sigma_g
    }
    #[getter]
    fn sigma_depth(&self) -> f64 {
        self.inner.sigma_depth
    }
    #[getter]
    fn sigma_thermal(&self) -> f64 {
        self.inner.sigma_thermal
    }

    fn as_tuple(&self) -> (f64, f64, f64, f64) {
        let [r, g, d, t] = self.inner.as_array();
        (r, g, d, t)
    }

    fn __repr__(&self) -> String {
        let b = &self.inner;
        format!(
            "Bandwidths(sigma_r={}, sigma_g={}, sigma_depth={}, sigma_thermal={})",
            b.sigma_r, b.sigma_g, b.sigma_depth, b.sigma_thermal
        )
    }
}

/// One registered RGB + depth + thermal capture.
#[pyclass(name = "Frame", module = "rgbdt", frozen)]
struct PyFrame {
    inner: rc::FrameStack,
}

#[pymethods]
impl PyFrame {
    /// `rgb` holds `width * height * 3` interleaved bytes; `depth` and
    /// `thermal` hold `width * height` raw values in row-major order.
    #[new]
    #[pyo3(signature = (width, height, rgb, depth, thermal, thermal_bits=8, frame_index=0))]
    fn new(
        width: u32,
        height: u32,
        rgb: Vec<u8>,
        depth: Vec<u16>,
        thermal: Vec<u16>,
        thermal_bits: u8,
        frame_index: u64,
    ) -> PyResult<Self> {
        let bits = bit_depth(thermal_bits)?;
        Ok(Self {
            inner: rc::FrameStack::new(width, height, rgb, depth, thermal, bits, frame_index).map_err(to_py)?,
        })
    }

    #[getter]
    fn width(&self) -> u32 {
        self.inner.width()
    }
    #[getter]
    fn height(&self) -> u32 {
        self.inner.height()
    }
    #[getter]
    fn frame_index(&self) -> u64 {
        self.inner.frame_index()
    }
    #[getter]
    fn thermal_bits(&self) -> u8 {
        self.inner.thermal_bits().bits()
    }

    fn rgb<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, self.inner.rgb_plane())
    }
    fn depth(&self) -> Vec<u16> {
        self.inner.depth_plane().to_vec()
    }
    fn thermal(&self) -> Vec<u16> {
        self.inner.thermal_plane().to_vec()
    }

    /// Normalised observation `(r, g, depth or None, thermal)` at a pixel.
    fn observation(&self, x: u32, y: u32, config: &PyPipelineConfig) -> PyResult<(f64, f64, Option<f64>, f64)> {
        let o = rc::cue::build_observation(&self.inner, x, y, &config.inner).map_err(to_py)?;
        Ok((o.r, o.g, o.depth, o.thermal))
    }

    fn __repr__(&self) -> String {
        format!(
            "Frame(index={}, {}x{}, thermal_bits={})",
            self.inner.frame_index(),
            self.inner.width(),
            self.inner.height(),
            self.inner.thermal_bits().bits()
        )
    }
}

/// Binary foreground mask.
#[pyclass(name = "Mask", module = "rgbdt", from_py_object)]
#[derive(Clone)]
struct PyMask {
    inner: rc::ForegroundMask,
}

impl From<rc::ForegroundMask> for PyMask {
    fn from(inner: rc::ForegroundMask) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyMask {
    /// All-background mask, or one built from `width * height` row-major
    /// booleans.
    #[new]
    #[pyo3(signature = (width, height, bits=None))]
    fn new(width: u32, height: u32, bits: Option<Vec<bool>>) -> PyResult<Self> {
        let inner = match bits {
            Some(bits) => rc::ForegroundMask::from_bits(width, height, bits).map_err(to_py)?,
            None => rc::ForegroundMask::new(width, height),
        };
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(rc::io::read_mask(&path).map_err(to_py)?.into())
    }

    #[pyo3(signature = (path, format="png"))]
    fn save(&self, path: PathBuf, format: &str) -> PyResult<()> {
        let format: MaskFormat = format.parse().map_err(PyValueError::new_err)?;
        rc::io::write_mask(&self.inner, &path, format).map_err(to_py)
    }

    #[getter]
    fn width(&self) -> u32 {
        self.inner.width()
    }
    #[getter]
    fn height(&self) -> u32 {
        self.inner.height()
    }

    fn get(&self, x: u32, y: u32) -> PyResult<bool> {
        self.check(x, y)?;
        Ok(self.inner.get(x, y))
    }

    fn set(&mut self, x: u32, y: u32, value: bool) -> PyResult<()> {
        self.check(x, y)?;
        self.inner.set(x, y, value);
        Ok(())
    }

    fn count(&self) -> usize {
        self.inner.count()
    }

    fn fraction(&self) -> f64 {
        self.inner.fraction()
    }

    fn to_list(&self) -> Vec<bool> {
        self.inner.bits().to_vec()
    }

    fn __eq__(&self, other: PyRef<'_, PyMask>) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Mask({}x{}, foreground={})",
            self.inner.width(),
            self.inner.height(),
            self.inner.count()
        )
    }
}

impl PyMask {
    fn check(&self, x: u32, y: u32) -> PyResult<()> {
        if x < self.inner.width() && y < self.inner.height() {
            Ok(())
        } else {
            Err(pyo3::exceptions::PyIndexError::new_err(format!(
                "({x}, {y}) outside {}x{} mask",
                self.inner.width(),
                self.inner.height()
            )))
        }
    }
}

/// Bounding box of one retained blob; coordinates are inclusive.
#[pyclass(name = "Roi", module = "rgbdt", frozen, from_py_object)]
#[derive(Clone)]
struct PyRoi {
    inner: rc::RegionOfInterest,
}

#[pymethods]
impl PyRoi {
    #[new]
    fn new(blob_id: u32, x_min: u32, y_min: u32, x_max: u32, y_max: u32, area: usize) -> Self {
        Self {
            inner: rc::RegionOfInterest {
                blob_id,
                x_min,
                y_min,
                x_max,
                y_max,
                area,
            },
        }
    }

    #[getter]
    fn blob_id(&self) -> u32 {
        self.inner.blob_id
    }
    #[getter]
    fn x_min(&self) -> u32 {
        self.inner.x_min
    }
    #[getter]
    fn y_min(&self) -> u32 {
        self.inner.y_min
    }
    #[getter]
    fn x_max(&self) -> u32 {
        self.inner.x_max
    }
    #[getter]
    fn y_max(&self) -> u32 {
        self.inner.y_max
    }
    #[getter]
    fn area(&self) -> usize {
        self.inner.area
    }

    fn bbox(&self) -> (u32, u32, u32, u32) {
        (self.inner.x_min, self.inner.y_min, self.inner.x_max, self.inner.y_max)
    }

    fn __repr__(&self) -> String {
        let r = &self.inner;
        format!(
            "Roi(blob_id={}, x=[{}, {}], y=[{}, {}], area={})",
            r.blob_id, r.x_min, r.x_max, r.y_min, r.y_max, r.area
        )
    }
}

fn rois(list: Vec<rc::RegionOfInterest>) -> Vec<PyRoi> {
    list.into_iter().map(|inner| PyRoi { inner }).collect()
}

/// Per-pixel background models for a fixed image size.
#[pyclass(name = "SceneModel", module = "rgbdt")]
struct PySceneModel {
    inner: rc::SceneModel,
}

#[pymethods]
impl PySceneModel {
    #[new]
    fn new(width: u32, height: u32, bandwidths: &PyBandwidths, config: &PyPipelineConfig) -> PyResult<Self> {
        Ok(Self {
            inner: rc::SceneModel::new(width, height, bandwidths.inner, config.inner.clone()).map_err(to_py)?,
        })
    }

    /// Classifies every pixel of `frame`, then adds it to the models.
    fn process_frame(&mut self, py: Python<'_>, frame: &PyFrame) -> PyResult<PyMask> {
        let inner = &mut self.inner;
        let frame = &frame.inner;
        Ok(py.detach(|| inner.process_frame(frame)).map_err(to_py)?.into())
    }

    #[getter]
    fn bandwidths(&self) -> PyBandwidths {
        PyBandwidths {
            inner: *self.inner.bandwidths(),
        }
    }

    /// Number of samples held by the model at `(x, y)`.
    fn sample_count(&self, x: u32, y: u32) -> PyResult<usize> {
        if x >= self.inner.width() || y >= self.inner.height() {
            return Err(pyo3::exceptions::PyIndexError::new_err(format!(
                "({x}, {y}) outside scene"
            )));
        }
        Ok(self.inner.pixel(x, y).count())
    }
}

/// Scene model followed by opening, labelling and ROI extraction.
#[pyclass(name = "Pipeline", module = "rgbdt")]
struct PyPipeline {
    inner: pipeline::Pipeline,
}

#[pymethods]
impl PyPipeline {
    #[new]
    fn new(width: u32, height: u32, bandwidths: &PyBandwidths, config: &PyPipelineConfig) -> PyResult<Self> {
        Ok(Self {
            inner: pipeline::Pipeline::new(width, height, bandwidths.inner, config.inner.clone()).map_err(to_py)?,
        })
    }

    /// Returns `(raw_mask, cleaned_mask, rois)` for one frame.
    fn process(&mut self, py: Python<'_>, frame: &PyFrame) -> PyResult<(PyMask, PyMask, Vec<PyRoi>)> {
        let inner = &mut self.inner;
        let frame = &frame.inner;
        let out = py.detach(|| inner.process(frame)).map_err(to_py)?;
        Ok((out.raw_mask.into(), out.mask.into(), rois(out.rois)))
    }
}

#[pyfunction]
fn to_chromaticity(r: u8, g: u8, b: u8) -> (f64, f64) {
    rc::cue::to_chromaticity([r, g, b])
}

/// Normalised depth, or `None` for a missing (zero) reading.
#[pyfunction]
fn normalize_depth(raw: u16, depth_max: f64) -> Option<f64> {
    rc::cue::normalize_depth(raw, depth_max)
}

#[pyfunction]
#[pyo3(signature = (raw, bits=8))]
fn normalize_thermal(raw: u16, bits: u8) -> PyResult<f64> {
    rc::cue::normalize_thermal(raw, bit_depth(bits)?).map_err(to_py)
}

type Observation = (f64, f64, Option<f64>, f64);

fn observation((r, g, depth, thermal): Observation) -> rc::ObservationVector {
    rc::ObservationVector::new(r, g, depth, thermal)
}

/// Density of `obs` under a window of `samples`, each given as
/// `(r, g, depth or None, thermal)`.
#[pyfunction]
fn kde_density(obs: Observation, samples: Vec<Observation>, bandwidths: &PyBandwidths) -> PyResult<f64> {
    let samples: Vec<_> = samples.into_iter().map(observation).collect();
    let model = rc::PixelModel::from_samples(samples.len().max(1), &samples);
    rc::kde_density(&observation(obs), &model, &bandwidths.inner).map_err(to_py)
}

#[pyfunction]
fn estimate_bandwidths(
    py: Python<'_>,
    frames: Vec<PyRef<'_, PyFrame>>,
    config: &PyPipelineConfig,
) -> PyResult<PyBandwidths> {
    let frames: Vec<rc::FrameStack> = frames.iter().map(|f| f.inner.clone()).collect();
    let config = &config.inner;
    let inner = py.detach(|| rc::estimate_bandwidths(&frames, config)).map_err(to_py)?;
    Ok(PyBandwidths { inner })
}

fn element(radius: usize) -> PyResult<StructuringElement> {
    StructuringElement::square(radius).map_err(to_py)
}

#[pyfunction]
fn erode(mask: &PyMask, radius: usize) -> PyResult<PyMask> {
    Ok(postprocess::erode(&mask.inner, &element(radius)?).into())
}

#[pyfunction]
fn dilate(mask: &PyMask, radius: usize) -> PyResult<PyMask> {
    Ok(postprocess::dilate(&mask.inner, &element(radius)?).into())
}

#[pyfunction]
fn open_mask(mask: &PyMask, radius: usize) -> PyResult<PyMask> {
    Ok(postprocess::open(&mask.inner, &element(radius)?).into())
}

/// 8-connected labelling. Returns the row-major label image (0 is
/// background) and the number of blobs.
#[pyfunction]
fn connected_components(mask: &PyMask) -> (Vec<u32>, usize) {
    let c = postprocess::connected_components(&mask.inner);
    let n = c.blobs.len();
    (c.labels, n)
}

/// ROIs of the blobs in `mask` with at least `min_blob_area` pixels.
#[pyfunction]
fn extract_rois(mask: &PyMask, min_blob_area: usize) -> Vec<PyRoi> {
    let c = postprocess::connected_components(&mask.inner);
    rois(postprocess::extract_rois(&c.blobs, min_blob_area))
}

/// `(precision, recall, f_measure)` of `pred` against `gt`.
#[pyfunction]
fn mask_metrics(pred: &PyMask, gt: &PyMask) -> PyResult<(f64, f64, f64)> {
    let m = eval::mask_metrics(&pred.inner, &gt.inner).map_err(to_py)?;
    Ok((m.precision, m.recall, m.f_measure))
}

/// For each ground-truth box `(x_min, y_min, x_max, y_max)`, whether some
/// predicted ROI overlaps it with IoU at least `iou_threshold`.
#[pyfunction]
#[pyo3(signature = (pred, gt_boxes, iou_threshold=0.5))]
fn roi_match(pred: Vec<PyRoi>, gt_boxes: Vec<(u32, u32, u32, u32)>, iou_threshold: f64) -> PyResult<Vec<bool>> {
    let pred: Vec<_> = pred.into_iter().map(|r| r.inner).collect();
    let gt: Vec<_> = gt_boxes
        .into_iter()
        .map(|(x0, y0, x1, y1)| rc::BoundingBox::new(x0, y0, x1, y1))
        .collect();
    eval::roi_match(&pred, &gt, iou_threshold).map_err(to_py)
}

/// Generates a synthetic preset. Returns `(frames, gt_masks)`.
#[pyfunction]
#[pyo3(signature = (preset, seed=0))]
fn synth(py: Python<'_>, preset: &str, seed: u64) -> PyResult<(Vec<PyFrame>, Vec<PyMask>)> {
    let params = SynthParams::preset(preset).ok_or_else(|| {
        PyValueError::new_err(format!(
            "unknown preset {preset:?}, expected one of {:?}",
            eval::PRESETS
        ))
    })?;
    let seq = py.detach(|| eval::synth_sequence(&params, seed)).map_err(to_py)?;
    let frames = seq.frames.into_iter().map(|inner| PyFrame { inner }).collect();
    let masks = seq.gt_masks.into_iter().map(PyMask::from).collect();
    Ok((frames, masks))
}

/// Writes a synthetic preset to `output` in the on-disk sequence layout.
#[pyfunction]
#[pyo3(signature = (preset, output, seed=0))]
fn write_synthetic(py: Python<'_>, preset: &str, output: PathBuf, seed: u64) -> PyResult<usize> {
    let params = SynthParams::preset(preset).ok_or_else(|| {
        PyValueError::new_err(format!(
            "unknown preset {preset:?}, expected one of {:?}",
            eval::PRESETS
        ))
    })?;
    py.detach(|| {
        let seq = eval::synth_sequence(&params, seed)?;
        eval::write_synthetic(&seq, &output).map(|m| m.frame_count)
    })
    .map_err(to_py)
}

/// Processes the sequence under `input`, writing masks, ROIs and a report
/// to `output`. Returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (input, output, config=None, mask_format="png"))]
fn run_sequence<'py>(
    py: Python<'py>,
    input: PathBuf,
    output: PathBuf,
    config: Option<PyRef<'py, PyPipelineConfig>>,
    mask_format: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let config = config.map(|c| c.inner.clone()).unwrap_or_default();
    let options = RunOptions {
        mask_format: mask_format.parse().map_err(PyValueError::new_err)?,
    };
    let report = py
        .detach(|| {
            let manifest = SequenceManifest::open(&input)?;
            pipeline::run(&config, &manifest, &output, options)
        })
        .map_err(to_py)?;

    let dict = PyDict::new(py);
    dict.set_item("frame_count", report.frame_count)?;
    dict.set_item("frames_processed", report.frames_processed)?;
    dict.set_item("warmup_frames", report.warmup_frames)?;
    dict.set_item("bandwidths", report.bandwidths.map(|inner| PyBandwidths { inner }))?;
    dict.set_item("mean_foreground_fraction", report.mean_foreground_fraction)?;
    dict.set_item("frame_times_ms", report.frame_times_ms)?;
    Ok(dict)
}

#[pymodule]
fn rgbdt(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPipelineConfig>()?;
    m.add_class::<PyBandwidths>()?;
    m.add_class::<PyFrame>()?;
    m.add_class::<PyMask>()?;
    m.add_class::<PyRoi>()?;
    m.add_class::<PySceneModel>()?;
    m.add_class::<PyPipeline>()?;
    m.add_function(wrap_pyfunction!(to_chromaticity, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_depth, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_thermal, m)?)?;
    m.add_function(wrap_pyfunction!(kde_density, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_bandwidths, m)?)?;
    m.add_function(wrap_pyfunction!(erode, m)?)?;
    m.add_function(wrap_pyfunction!(dilate, m)?)?;
    m.add_function(wrap_pyfunction!(open_mask, m)?)?;
    m.add_function(wrap_pyfunction!(connected_components, m)?)?;
    m.add_function(wrap_pyfunction!(extract_rois, m)?)?;
    m.add_function(wrap_pyfunction!(mask_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(roi_match, m)?)?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    m.add_function(wrap_pyfunction!(write_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(run_sequence, m)?)?;
    m.add("PRESETS", eval::PRESETS.to_vec())?;
    Ok(())
}
