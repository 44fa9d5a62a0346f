//! Python bindings. Structured values (configs, frames, reports) cross the
//! boundary as plain dicts and lists with the same shape as the JSON files
//! and wire messages.

use cwip_avr_core::calibration::{self, SpeedSampleSet, DEFAULT_ROUNDING};
use cwip_avr_core::config::EngineConfig;
use cwip_avr_core::geometry::{RoomFile, RoomModel, Vec2};
use cwip_avr_core::locomotion::{self, LocomotionConfig};
use cwip_avr_core::service::{self, InputCommand};
use cwip_avr_core::sim::{self, GaitParams, SimConfig};
use cwip_avr_core::tracking::SkeletonFrame;
use cwip_avr_core::warning::{self, ZoneConfig};
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn core_err(e: cwip_avr_core::Error) -> PyErr {
    match e {
        cwip_avr_core::Error::UnknownSession(id) => PyKeyError::new_err(id),
        other => value_err(other),
    }
}

/// Python object → Rust value, through `json.dumps`.
fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = match obj.extract::<String>() {
        Ok(s) => s,
        Err(_) => obj
            .py()
            .import("json")?
            .call_method1("dumps", (obj,))?
            .extract()?,
    };
    serde_json::from_str(&text).map_err(value_err)
}

/// Rust value → Python object, through `json.loads`.
fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(value_err)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn engine_config(config: Option<&Bound<'_, PyAny>>) -> PyResult<EngineConfig> {
    let cfg: EngineConfig = match config {
        Some(c) if !c.is_none() => from_py(c)?,
        _ => EngineConfig::default(),
    };
    cfg.validate().map_err(core_err)?;
    Ok(cfg)
}

/// A validated room: boundary polygon plus box obstacles.
#[pyclass(module = "cwip_avr", name = "Room")]
pub struct PyRoom {
    inner: RoomModel,
}

#[pymethods]
impl PyRoom {
    /// Builds a room from a room-file dict or its JSON text.
    #[new]
    fn new(room: &Bound<'_, PyAny>) -> PyResult<Self> {
        let file: RoomFile = from_py(room)?;
        let inner = RoomModel::try_from(file).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn square(side: f64) -> PyResult<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(PyValueError::new_err("side must be positive"));
        }
        Ok(Self {
            inner: RoomModel::square(side),
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn vertices(&self) -> Vec<(f64, f64)> {
        self.inner.vertices().iter().map(|v| (v.x, v.z)).collect()
    }

    #[getter]
    fn hazard_ids(&self) -> Vec<String> {
        self.inner.hazards().map(|h| h.id().to_owned()).collect()
    }

    fn centroid(&self) -> (f64, f64) {
        let c = self.inner.centroid();
        (c.x, c.z)
    }

    fn contains(&self, x: f64, z: f64) -> bool {
        self.inner.contains(Vec2::new(x, z))
    }

    /// Distance from a ground point to every hazard, keyed by id.
    fn distances(&self, x: f64, z: f64) -> Vec<(String, f64)> {
        let p = Vec2::new(x, z);
        self.inner
            .hazards()
            .map(|h| (h.id().to_owned(), h.distance(p)))
            .collect()
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Room(name={:?}, vertices={}, obstacles={})",
            self.inner.name,
            self.inner.vertices().len(),
            self.inner.obstacles().len()
        )
    }
}

/// The per-frame pipeline over one room: feed skeleton frames, get frame
/// records back.
#[pyclass(module = "cwip_avr", name = "Engine")]
pub struct PyEngine {
    inner: sim::Pipeline,
}

#[pymethods]
impl PyEngine {
    #[new]
    #[pyo3(signature = (room, config=None))]
    fn new(room: &PyRoom, config: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        let cfg = engine_config(config)?;
        let inner = sim::Pipeline::new(room.inner.clone(), cfg).map_err(core_err)?;
        Ok(Self { inner })
    }

    /// Processes one skeleton frame dict and returns the frame record.
    fn step(&mut self, py: Python<'_>, frame: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
        let frame: SkeletonFrame = from_py(frame)?;
        let record = self.inner.step(&frame).map_err(core_err)?;
        to_py(py, &record)
    }

    #[getter]
    fn mode(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.mode())
    }

    fn metrics(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.metrics())
    }
}

/// Interactive sessions steered by input commands.
#[pyclass(module = "cwip_avr", name = "SessionManager")]
#[derive(Default)]
pub struct PySessionManager {
    inner: service::SessionManager,
}

#[pymethods]
impl PySessionManager {
    #[new]
    fn new() -> Self {
        Self::default()
    }

    #[pyo3(signature = (room, config=None))]
    fn create_session(
        &mut self,
        room: &PyRoom,
        config: Option<&Bound<'_, PyAny>>,
    ) -> PyResult<String> {
        let cfg = engine_config(config)?;
        self.inner
            .create_session(room.inner.clone(), cfg)
            .map_err(core_err)
    }

    /// Holds `command` (an input dict) until the next one arrives.
    fn apply_input(&mut self, session: &str, command: &Bound<'_, PyAny>) -> PyResult<()> {
        let cmd: InputCommand = from_py(command)?;
        self.inner.apply_input(session, cmd).map_err(core_err)
    }

    #[pyo3(signature = (session, dt=1.0/30.0))]
    fn tick(&mut self, py: Python<'_>, session: &str, dt: f64) -> PyResult<Py<PyAny>> {
        let msg = self.inner.tick(session, dt).map_err(core_err)?;
        to_py(py, &service::ServerMessage::Frame(msg))
    }

    fn close(&mut self, session: &str) -> PyResult<()> {
        self.inner.close(session).map_err(core_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Zone name for a hazard distance in metres.
#[pyfunction]
#[pyo3(signature = (distance, config=None))]
fn classify_zone(
    py: Python<'_>,
    distance: f64,
    config: Option<&Bound<'_, PyAny>>,
) -> PyResult<Py<PyAny>> {
    let cfg = zone_config(config)?;
    to_py(py, &warning::classify_zone(distance, &cfg))
}

/// `(visible, [r, g, b, a])` of the indicator at `distance`.
#[pyfunction]
#[pyo3(signature = (distance, config=None))]
fn indicator_appearance(
    distance: f64,
    config: Option<&Bound<'_, PyAny>>,
) -> PyResult<(bool, [f64; 4])> {
    let cfg = zone_config(config)?;
    let a = warning::indicator_appearance(distance, &cfg);
    Ok((a.visible, a.rgba))
}

fn zone_config(config: Option<&Bound<'_, PyAny>>) -> PyResult<ZoneConfig> {
    let cfg: ZoneConfig = match config {
        Some(c) if !c.is_none() => from_py(c)?,
        _ => ZoneConfig::default(),
    };
    cfg.validate().map_err(core_err)?;
    Ok(cfg)
}

/// Quartiles and Tukey fences of a speed sample list.
#[pyfunction]
fn boxplot_fences(py: Python<'_>, samples: Vec<f64>) -> PyResult<Py<PyAny>> {
    let set = SpeedSampleSet::new(samples, "python").map_err(core_err)?;
    to_py(py, &calibration::boxplot_fences(&set).map_err(core_err)?)
}

/// Walking-speed threshold: upper fence rounded up to the `rounding` grid.
#[pyfunction]
#[pyo3(signature = (samples, rounding=DEFAULT_ROUNDING))]
fn calibrate_threshold(samples: Vec<f64>, rounding: f64) -> PyResult<f64> {
    let set = SpeedSampleSet::new(samples, "python").map_err(core_err)?;
    calibration::calibrate_threshold(&set, rounding).map_err(core_err)
}

/// Virtual forward speed while walking in place, m/s.
#[pyfunction]
#[pyo3(signature = (pace, peak_height, config=None))]
fn wip_virtual_speed(
    pace: f64,
    peak_height: f64,
    config: Option<&Bound<'_, PyAny>>,
) -> PyResult<f64> {
    let cfg: LocomotionConfig = match config {
        Some(c) if !c.is_none() => from_py(c)?,
        _ => LocomotionConfig::default(),
    };
    cfg.validate().map_err(core_err)?;
    Ok(locomotion::wip_virtual_speed(pace, peak_height, &cfg))
}

/// Synthesizes a skeleton trace from gait parameters (dict or JSON text).
#[pyfunction]
fn generate_gait(py: Python<'_>, params: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
    let params: GaitParams = from_py(params)?;
    let frames = sim::generate_gait(&params).map_err(core_err)?;
    to_py(py, &frames)
}

/// Runs a whole trace; returns `(metrics, frame_records)`.
#[pyfunction]
#[pyo3(signature = (room, trace, config=None))]
fn run_trace(
    py: Python<'_>,
    room: &PyRoom,
    trace: &Bound<'_, PyAny>,
    config: Option<&Bound<'_, PyAny>>,
) -> PyResult<(Py<PyAny>, Py<PyAny>)> {
    let frames: Vec<SkeletonFrame> = from_py(trace)?;
    let cfg = SimConfig {
        room: room.inner.clone(),
        engine: engine_config(config)?,
    };
    let out = sim::run_trace(&cfg, &frames).map_err(core_err)?;
    Ok((to_py(py, &out.metrics)?, to_py(py, &out.frames)?))
}

#[pymodule]
pub fn cwip_avr(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRoom>()?;
    m.add_class::<PyEngine>()?;
    m.add_class::<PySessionManager>()?;
    m.add_function(wrap_pyfunction!(classify_zone, m)?)?;
    m.add_function(wrap_pyfunction!(indicator_appearance, m)?)?;
    m.add_function(wrap_pyfunction!(boxplot_fences, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(wip_virtual_speed, m)?)?;
    m.add_function(wrap_pyfunction!(generate_gait, m)?)?;
    m.add_function(wrap_pyfunction!(run_trace, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
