//! Python bindings. Results of the sampling routines come back as plain
//! dicts built from the same JSON the command-line reports use.

use std::sync::Arc;

use contracta_core::certificates::{Certificate as CoreCertificate, MeirKeelerModulus};
use contracta_core::picard::banach_a_priori_bound;
use contracta_core::sampling::check_metric_axioms;
use contracta_core::verifier::{self, VerificationConfig};
use contracta_core::{
    library, picard_iterate, BanachCertificate, Expr as CoreExpr, Interval, MetricKind, MetricSpace, Point, Sampler,
    SelfMap, SimulationFunction, StoppingRule, Strictness, WeaklyTypeTriple,
};
use contracta_cli::config::ExperimentConfig;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn core_err(e: contracta_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn point(coords: Vec<f64>) -> PyResult<Point> {
    Point::new(coords).map_err(core_err)
}

fn metric_kind(name: &str) -> PyResult<MetricKind> {
    serde_json::from_value(serde_json::Value::String(name.to_owned()))
        .map_err(|_| PyValueError::new_err(format!("unknown metric `{name}`")))
}

fn intervals(bounds: Vec<(Option<f64>, Option<f64>)>) -> Vec<Interval> {
    bounds
        .into_iter()
        .map(|(lo, hi)| Interval::new(lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY)))
        .collect()
}

fn config(n_pairs: u64, seed: u64, slack: f64, epsilon_grid: Option<Vec<f64>>) -> VerificationConfig {
    let mut cfg = VerificationConfig {
        n_pairs,
        seed,
        slack,
        ..VerificationConfig::default()
    };
    if let Some(grid) = epsilon_grid {
        cfg.epsilon_grid = grid;
    }
    cfg
}

/// A box in R^n with a metric. `None` bounds are infinite; unbounded
/// spaces need a finite `sampling_box`.
#[pyclass(frozen, module = "contracta")]
struct Space(Arc<MetricSpace>);

#[pymethods]
impl Space {
    #[new]
    #[pyo3(signature = (bounds, metric = "euclidean", name = "X", sampling_box = None))]
    fn new(
        bounds: Vec<(Option<f64>, Option<f64>)>,
        metric: &str,
        name: &str,
        sampling_box: Option<Vec<(f64, f64)>>,
    ) -> PyResult<Self> {
        let sampling = sampling_box.map(|b| b.into_iter().map(|(lo, hi)| Interval::new(lo, hi)).collect());
        let space = MetricSpace::new(name, intervals(bounds), sampling, metric_kind(metric)?).map_err(core_err)?;
        Ok(Space(Arc::new(space)))
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.0.dimension()
    }

    fn contains(&self, p: Vec<f64>) -> PyResult<bool> {
        Ok(self.0.contains(&point(p)?))
    }

    fn distance(&self, p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
        self.0.distance(&point(p)?, &point(q)?).map_err(core_err)
    }

    #[pyo3(signature = (n_triples = 10_000, seed = 0))]
    fn check_metric<'py>(&self, py: Python<'py>, n_triples: u64, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let report = check_metric_axioms(&self.0, &Sampler::uniform(seed), n_triples).map_err(core_err)?;
        to_py(py, &report)
    }

    fn __repr__(&self) -> String {
        format!("Space({:?}, dimension={})", self.0.name(), self.0.dimension())
    }
}

/// A self-map given coordinate-wise by expressions in x1..xn, or by name
/// from the built-in library.
#[pyclass(frozen, module = "contracta")]
struct Map(SelfMap);

#[pymethods]
impl Map {
    #[new]
    #[pyo3(signature = (space, exprs = None, builtin = None, name = "T"))]
    fn new(space: &Space, exprs: Option<Vec<String>>, builtin: Option<&str>, name: &str) -> PyResult<Self> {
        let space = Arc::clone(&space.0);
        let map = match (exprs, builtin) {
            (Some(e), None) => SelfMap::parse(name, space, &e),
            (None, Some(b)) => library::builtin_map(b, space),
            _ => return Err(PyValueError::new_err("give exactly one of `exprs` or `builtin`")),
        };
        map.map(Map).map_err(core_err)
    }

    fn __call__(&self, p: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.0.apply(&point(p)?).map_err(core_err)?.into_inner())
    }

    fn __repr__(&self) -> String {
        let exprs: Vec<String> = self.0.exprs().iter().map(ToString::to_string).collect();
        format!("Map({:?}, [{}])", self.0.name(), exprs.join(", "))
    }
}

/// A parsed expression over named variables.
#[pyclass(frozen, module = "contracta")]
struct Expr(CoreExpr);

#[pymethods]
impl Expr {
    #[new]
    #[pyo3(signature = (source, variables = vec!["t".to_owned()]))]
    fn new(source: &str, variables: Vec<String>) -> PyResult<Self> {
        CoreExpr::parse(source, &variables)
            .map(Expr)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __call__(&self, values: Vec<f64>) -> PyResult<f64> {
        self.0.eval(&values).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Expr({:?})", self.0.to_string())
    }
}

#[pyclass(frozen, module = "contracta")]
struct Certificate(CoreCertificate);

#[pymethods]
impl Certificate {
    #[staticmethod]
    fn banach(lam: f64) -> PyResult<Self> {
        let c = BanachCertificate::new(lam).map_err(core_err)?;
        Ok(Certificate(CoreCertificate::Banach(c)))
    }

    /// Simulation function ζ(t, s): `t` is d(Tx, Ty), `s` is d(x, y).
    #[staticmethod]
    #[pyo3(signature = (zeta, name = "zeta"))]
    fn zeta(zeta: &str, name: &str) -> PyResult<Self> {
        let z = SimulationFunction::parse(name, zeta).map_err(core_err)?;
        Ok(Certificate(CoreCertificate::Zeta(z)))
    }

    /// δ(ε) as an expression in `eps`.
    #[staticmethod]
    fn meir_keeler(delta: &str) -> PyResult<Self> {
        let m = MeirKeelerModulus::parse(delta).map_err(core_err)?;
        Ok(Certificate(CoreCertificate::MeirKeeler(m)))
    }

    /// ψ, α, β as expressions in `t`; `strictness` is "strict" or "relaxed".
    #[staticmethod]
    #[pyo3(signature = (psi, alpha, beta, strictness = "strict"))]
    fn weakly_type(psi: &str, alpha: &str, beta: &str, strictness: &str) -> PyResult<Self> {
        let s: Strictness = serde_json::from_value(serde_json::Value::String(strictness.to_owned()))
            .map_err(|_| PyValueError::new_err(format!("unknown strictness `{strictness}`")))?;
        let w = WeaklyTypeTriple::parse(psi, alpha, beta, s).map_err(core_err)?;
        Ok(Certificate(CoreCertificate::WeaklyType(w)))
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind()
    }

    fn __repr__(&self) -> String {
        format!("Certificate({})", self.0.label())
    }
}

#[pyfunction]
#[pyo3(signature = (certificate, map, n_pairs = 100_000, seed = 0, slack = 0.0, epsilon_grid = None))]
fn verify<'py>(
    py: Python<'py>,
    certificate: &Certificate,
    map: &Map,
    n_pairs: u64,
    seed: u64,
    slack: f64,
    epsilon_grid: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config(n_pairs, seed, slack, epsilon_grid);
    let outcome = py
        .detach(|| verifier::verify_certificate(&certificate.0, &map.0, &cfg))
        .map_err(core_err)?;
    to_py(py, &outcome)
}

#[pyfunction]
#[pyo3(signature = (map, epsilon, n_pairs = 100_000, seed = 0, shrink_levels = 8, width_factor = 4.0))]
fn estimate_modulus<'py>(
    py: Python<'py>,
    map: &Map,
    epsilon: f64,
    n_pairs: u64,
    seed: u64,
    shrink_levels: u32,
    width_factor: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = VerificationConfig {
        shrink_levels,
        width_factor,
        ..config(n_pairs, seed, 0.0, None)
    };
    let est = py
        .detach(|| verifier::estimate_mk_modulus(&map.0, epsilon, &cfg))
        .map_err(core_err)?;
    to_py(py, &est)
}

/// Estimate λ̂ and test the built-in ζ and (ψ, α, β) libraries on `map`.
#[pyfunction]
#[pyo3(signature = (map, n_pairs = 100_000, seed = 0, slack = 0.0, epsilon_grid = None))]
fn classify<'py>(
    py: Python<'py>,
    map: &Map,
    n_pairs: u64,
    seed: u64,
    slack: f64,
    epsilon_grid: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config(n_pairs, seed, slack, epsilon_grid);
    let report = py
        .detach(|| verifier::classify(&map.0, &library::zeta_library(), &library::triple_library(), &cfg))
        .map_err(core_err)?;
    to_py(py, &report)
}

/// Modulus table over the built-in Z and weakly-type instances.
#[pyfunction]
#[pyo3(signature = (n_pairs = 100_000, seed = 0, epsilon_grid = None))]
fn containment_demo<'py>(
    py: Python<'py>,
    n_pairs: u64,
    seed: u64,
    epsilon_grid: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config(n_pairs, seed, 0.0, epsilon_grid);
    let table = py
        .detach(|| verifier::containment_demo(&library::all_instances(), &cfg))
        .map_err(core_err)?;
    to_py(py, &table)
}

#[pyfunction]
#[pyo3(signature = (map, x0, tol = 1e-9, max_iter = 100_000, divergence_radius = None))]
fn picard<'py>(
    py: Python<'py>,
    map: &Map,
    x0: Vec<f64>,
    tol: f64,
    max_iter: u64,
    divergence_radius: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let stop = match divergence_radius {
        Some(r) => StoppingRule::new(tol, max_iter, r),
        None => StoppingRule::for_map(&map.0, tol, max_iter),
    }
    .map_err(core_err)?;
    let x0 = point(x0)?;
    let trace = py.detach(|| picard_iterate(&map.0, &x0, &stop)).map_err(core_err)?;
    to_py(py, &trace)
}

/// λⁿ/(1−λ)·d(x0, x1).
#[pyfunction]
fn a_priori_bound(lam: f64, d01: f64, n: u32) -> PyResult<f64> {
    banach_a_priori_bound(lam, d01, n).map_err(core_err)
}

/// Run a command-line command on a JSON config string. Returns the exit
/// code and the rendered report.
#[pyfunction]
#[pyo3(signature = (command, config_json, seed = None))]
fn run(py: Python<'_>, command: &str, config_json: &str, seed: Option<u64>) -> PyResult<(i32, String)> {
    let mut cfg = ExperimentConfig::from_json(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    if let Some(s) = seed {
        cfg.verification.seed = s;
    }
    let rendered = py
        .detach(|| contracta_cli::commands::run(command, &cfg))
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok((rendered.exit_code, rendered.body))
}

#[pymodule]
fn contracta(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Space>()?;
    m.add_class::<Map>()?;
    m.add_class::<Expr>()?;
    m.add_class::<Certificate>()?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_modulus, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(containment_demo, m)?)?;
    m.add_function(wrap_pyfunction!(picard, m)?)?;
    m.add_function(wrap_pyfunction!(a_priori_bound, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
