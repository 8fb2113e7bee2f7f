//! Python bindings. Reports cross the boundary as plain dicts decoded from
//! the same JSON the CLI writes.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use reid_temporal::dataset::{self as ds, CameraTopology};
use reid_temporal::metrics::{compute_distances, Metric, ValidityMask};
use reid_temporal::prior::{self as prior, Family, FitOptions, LocPolicy};
use reid_temporal::rerank::{RerankConfig, SpatialMode};
use reid_temporal::synth::{self, BenchSpec, SynthConfig};
use reid_temporal::temporal::{reduce_gallery, TimeWindow};

create_exception!(reid_temporal, ReidError, PyValueError, "Raised for invalid inputs; `args[0]` is the error code.");

fn err<E: std::fmt::Display>(code: &str, e: E) -> PyErr {
    ReidError::new_err((code.to_string(), e.to_string()))
}

macro_rules! lib_err {
    ($e:expr) => {
        $e.map_err(|e| err(e.code(), &e))
    };
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (value.to_string(),))
}

fn parse<T: std::str::FromStr>(what: &str, s: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e| err("InvalidConfig", format!("bad {what} {s:?}: {e}")))
}

#[pyclass(name = "Dataset", module = "reid_temporal", frozen)]
struct PyDataset {
    inner: ds::Dataset,
}

#[pymethods]
impl PyDataset {
    #[staticmethod]
    fn load(manifest: PathBuf, features: PathBuf) -> PyResult<Self> {
        Ok(PyDataset {
            inner: lib_err!(ds::load_dataset(&manifest, &features))?,
        })
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    #[getter]
    fn num_queries(&self) -> usize {
        self.inner.num_queries()
    }

    #[getter]
    fn num_gallery(&self) -> usize {
        self.inner.num_gallery()
    }

    fn query_filenames(&self) -> Vec<String> {
        self.inner.queries().iter().map(ds::ImageRecord::filename).collect()
    }

    fn gallery_filenames(&self) -> Vec<String> {
        self.inner.gallery().iter().map(ds::ImageRecord::filename).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(queries={}, gallery={}, dimension={})",
            self.inner.num_queries(),
            self.inner.num_gallery(),
            self.inner.dimension()
        )
    }
}

#[pyclass(name = "PriorSpec", module = "reid_temporal", frozen)]
struct PyPriorSpec {
    inner: prior::PriorSpec,
}

#[pymethods]
impl PyPriorSpec {
    #[new]
    #[pyo3(signature = (family, loc=0.0, scale=1.0, **shape))]
    fn new(family: &str, loc: f64, scale: f64, shape: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let family: Family = parse("family", family)?;
        let mut params = serde_json::Map::new();
        if let Some(d) = shape {
            for (k, v) in d.iter() {
                params.insert(k.extract::<String>()?, serde_json::json!(v.extract::<f64>()?));
            }
        }
        let value = serde_json::json!({ "family": family, "shape": params, "loc": loc, "scale": scale });
        serde_json::from_value(value)
            .map(|inner| PyPriorSpec { inner })
            .map_err(|e| err("InvalidParameters", e))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text)
            .map(|inner| PyPriorSpec { inner })
            .map_err(|e| err("InvalidParameters", e))
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("spec serializes")
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.inner.family().name()
    }

    #[getter]
    fn loc(&self) -> f64 {
        self.inner.loc()
    }

    #[getter]
    fn scale(&self) -> f64 {
        self.inner.scale()
    }

    #[getter]
    fn shape(&self) -> std::collections::BTreeMap<String, f64> {
        self.inner.shape().clone()
    }

    fn pdf(&self, x: f64) -> f64 {
        self.inner.pdf(x)
    }

    fn log_pdf(&self, x: f64) -> f64 {
        self.inner.log_pdf(x)
    }

    fn sample(&self, n: usize, seed: u64) -> PyResult<Vec<f64>> {
        lib_err!(prior::sample_prior(&self.inner, n, seed))
    }

    fn __repr__(&self) -> String {
        format!("PriorSpec({})", self.to_json())
    }
}

/// Appearance-only evaluation, optionally restricted to a `(min, max)` window in minutes.
#[pyfunction]
#[pyo3(signature = (dataset, metric="euclidean", window=None))]
fn evaluate<'py>(
    py: Python<'py>,
    dataset: &PyDataset,
    metric: &str,
    window: Option<(f64, f64)>,
) -> PyResult<Bound<'py, PyAny>> {
    let metric: Metric = parse("metric", metric)?;
    let d = &dataset.inner;
    let mask = match window {
        Some((lo, hi)) => reduce_gallery(d, &lib_err!(TimeWindow::new(lo, hi))?),
        None => ValidityMask::exclusion(d),
    };
    let dist = lib_err!(compute_distances(d, metric))?;
    let report = lib_err!(reid_temporal::metrics::evaluate(d, &dist, &mask))?;
    json_to_py(py, &serde_json::to_value(&report).expect("report serializes"))
}

/// Posterior re-ranking. Returns `(rankings, report)`.
#[pyfunction]
#[pyo3(signature = (dataset, sigma, prior, window=None, spatial="off", sigma_s=50.0, topology_csv=None))]
#[allow(clippy::too_many_arguments)]
fn rerank<'py>(
    py: Python<'py>,
    dataset: &PyDataset,
    sigma: f64,
    prior: &PyPriorSpec,
    window: Option<(f64, f64)>,
    spatial: &str,
    sigma_s: f64,
    topology_csv: Option<PathBuf>,
) -> PyResult<(Vec<Vec<usize>>, Bound<'py, PyAny>)> {
    let mode: SpatialMode = parse("spatial mode", spatial)?;
    let mut config = RerankConfig::new(sigma, prior.inner.clone());
    if mode != SpatialMode::Off {
        config = config.with_spatial(mode, sigma_s);
    }
    let window = window.map(|(lo, hi)| lib_err!(TimeWindow::new(lo, hi))).transpose()?;
    let topology = topology_csv
        .map(|p| lib_err!(CameraTopology::read_csv(&p)))
        .transpose()?;
    let d = &dataset.inner;
    let out = lib_err!(reid_temporal::rerank::rerank(d, &config, window.as_ref(), topology.as_ref()))?;
    let report = lib_err!(out.evaluate(d))?;
    let report = json_to_py(py, &serde_json::to_value(&report).expect("report serializes"))?;
    Ok((out.rankings, report))
}

/// Maximum-likelihood fit. Returns `(spec, log_likelihood)`.
#[pyfunction]
#[pyo3(signature = (samples, family, loc=None, grid_points=20))]
fn fit_prior(samples: Vec<f64>, family: &str, loc: Option<f64>, grid_points: usize) -> PyResult<(PyPriorSpec, f64)> {
    let family: Family = parse("family", family)?;
    let opts = FitOptions {
        loc: match loc {
            Some(l) => LocPolicy::Fixed(l),
            None => LocPolicy::Profile { grid_points },
        },
        ..FitOptions::default()
    };
    let fit = lib_err!(prior::fit_prior(&samples, family, &opts))?;
    Ok((PyPriorSpec { inner: fit.spec }, fit.log_likelihood))
}

/// Generates a synthetic dataset from a JSON config (defaults when `None`),
/// writing the files when `output_dir` is given.
#[pyfunction]
#[pyo3(signature = (config_json=None, output_dir=None, seed=None))]
fn synth_generate(config_json: Option<&str>, output_dir: Option<PathBuf>, seed: Option<u64>) -> PyResult<PyDataset> {
    let mut config: SynthConfig = match config_json {
        Some(t) => serde_json::from_str(t).map_err(|e| err("InvalidConfig", e))?,
        None => SynthConfig::default(),
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    let out = lib_err!(synth::generate(&config))?;
    if let Some(dir) = output_dir {
        lib_err!(out.write(&dir))?;
    }
    Ok(PyDataset { inner: out.dataset })
}

/// Four-way benchmark; returns a list of row dicts.
#[pyfunction]
#[pyo3(signature = (config_json=None))]
fn run_benchmark<'py>(py: Python<'py>, config_json: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let spec: BenchSpec = match config_json {
        Some(t) => serde_json::from_str(t).map_err(|e| err("InvalidConfig", e))?,
        None => BenchSpec::default(),
    };
    let table = lib_err!(synth::run_benchmark(&spec.synth, &spec.bench))?;
    json_to_py(py, &serde_json::to_value(&table.rows).expect("rows serialize"))
}

/// Parses `<pid>_c<cam>_t<secs>_frame<frame>_<bbox>.jpg` into a dict.
#[pyfunction]
fn parse_filename<'py>(py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyAny>> {
    let r = lib_err!(ds::parse_image_filename(name))?;
    json_to_py(py, &serde_json::to_value(&r).expect("record serializes"))
}

#[pymodule]
#[pyo3(name = "reid_temporal")]
fn init_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ReidError", m.py().get_type::<ReidError>())?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyPriorSpec>()?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(rerank, m)?)?;
    m.add_function(wrap_pyfunction!(fit_prior, m)?)?;
    m.add_function(wrap_pyfunction!(synth_generate, m)?)?;
    m.add_function(wrap_pyfunction!(run_benchmark, m)?)?;
    m.add_function(wrap_pyfunction!(parse_filename, m)?)?;
    Ok(())
}
