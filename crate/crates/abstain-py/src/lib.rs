//! Python bindings: states, divergences, exponent regions, exact classical
//! tests, pinching scans and the sequential protocol.
//!
//! Exponents are in nats. Errors surface as subclasses of `AbstainError`
//! matching the CLI exit-code classes.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use abstain::divergences::{self, Family};
use abstain::states::{ClassicalDistribution, DensityMatrix};
use abstain::{io, pinching, regions, sequential, types};

create_exception!(abstain_py, AbstainError, PyException);
create_exception!(abstain_py, InputError, AbstainError);
create_exception!(abstain_py, NumericalError, AbstainError);
create_exception!(abstain_py, BudgetError, AbstainError);

fn to_py(e: abstain::Error) -> PyErr {
    let msg = e.to_string();
    match e.exit_code() {
        3 => NumericalError::new_err(msg),
        4 => BudgetError::new_err(msg),
        _ => InputError::new_err(msg),
    }
}

trait OrPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> OrPy<T> for abstain::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Parses serialized JSON into Python objects.
fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (value.to_string(),))
}

fn family(name: &str) -> PyResult<Family> {
    match name {
        "petz" => Ok(Family::Petz),
        "sandwiched" => Ok(Family::Sandwiched),
        "reverse_sandwiched" => Ok(Family::ReverseSandwiched),
        other => Err(InputError::new_err(format!("unknown family '{other}'"))),
    }
}

/// A validated density matrix.
#[pyclass(name = "DensityMatrix", module = "abstain_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDensityMatrix {
    inner: DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    /// Builds a state from rows of complex entries; full rank is required.
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let m = abstain::linalg::CMat::from_rows(rows).py_err()?;
        Ok(PyDensityMatrix { inner: abstain::states::validate_state(&m, true).py_err()? })
    }

    #[staticmethod]
    fn diagonal(probs: Vec<f64>) -> PyResult<Self> {
        Ok(PyDensityMatrix { inner: DensityMatrix::from_probs(&probs).py_err()? })
    }

    /// `[[a, b], [conj(b), 1 - a]]`.
    #[staticmethod]
    fn qubit(a: f64, b: Complex64) -> PyResult<Self> {
        Ok(PyDensityMatrix { inner: abstain::states::qubit(a, b).py_err()? })
    }

    /// Reads the JSON state or distribution file format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let input = io::parse_state_or_distribution(text, true).py_err()?;
        Ok(PyDensityMatrix { inner: input.to_density().py_err()? })
    }

    fn to_json(&self) -> String {
        io::state_to_json(&self.inner)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Eigenvalues in descending order.
    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.spectrum().values.clone()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        self.inner.matrix().rows()
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(dim={}, eigenvalues={:?})", self.inner.dim(), self.inner.spectrum().values)
    }
}

type State<'a> = PyRef<'a, PyDensityMatrix>;

#[pyfunction]
fn relative_entropy(rho: State, sigma: State) -> PyResult<f64> {
    divergences::relative_entropy(&rho.inner, &sigma.inner).py_err()
}

/// Rényi divergence of order `s` from the named family.
#[pyfunction]
#[pyo3(signature = (s, rho, sigma, family="petz"))]
fn renyi(s: f64, rho: State, sigma: State, family: &str) -> PyResult<f64> {
    let fam = divergences::DivergenceFamily::new(self::family(family)?, s).py_err()?;
    divergences::renyi(fam, &rho.inner, &sigma.inner).py_err()
}

#[pyfunction]
fn max_relative_entropy(rho: State, sigma: State) -> PyResult<f64> {
    divergences::max_relative_entropy(&rho.inner, &sigma.inner).py_err()
}

#[pyfunction]
fn fidelity(rho: State, sigma: State) -> f64 {
    divergences::fidelity(&rho.inner, &sigma.inner)
}

#[pyfunction]
fn chernoff(rho: State, sigma: State) -> PyResult<f64> {
    divergences::chernoff(&rho.inner, &sigma.inner).py_err()
}

#[pyfunction]
fn d_star(rho: State, sigma: State) -> PyResult<f64> {
    Ok(divergences::d_star(&rho.inner, &sigma.inner).py_err()?.value)
}

/// Returns `(value, quality)`.
#[pyfunction]
fn measured_relative_entropy(rho: State, sigma: State) -> PyResult<(f64, String)> {
    let m = abstain::measured::measured_relative_entropy(&rho.inner, &sigma.inner).py_err()?;
    Ok((m.value, format!("{:?}", m.quality)))
}

/// Returns `(D_Omega, D_Xi)`.
#[pyfunction]
fn projective_metrics(rho: State, sigma: State) -> PyResult<(f64, f64)> {
    divergences::projective_metrics(&rho.inner, &sigma.inner).py_err()
}

#[pyfunction]
#[pyo3(signature = (a, rho, sigma, family="petz"))]
fn hoeffding(a: f64, rho: State, sigma: State, family: &str) -> PyResult<f64> {
    regions::hoeffding(a, &rho.inner, &sigma.inner, self::family(family)?).py_err()
}

#[pyfunction]
fn han_kobayashi(r: f64, rho: State, sigma: State) -> PyResult<f64> {
    regions::han_kobayashi(r, &rho.inner, &sigma.inner).py_err()
}

/// Returns `(inside, slack1, slack2)`.
#[pyfunction]
#[pyo3(signature = (a, b, rho, sigma, k=0.0, l=0.0))]
fn conclusive_region(a: f64, b: f64, rho: State, sigma: State, k: f64, l: f64) -> PyResult<(bool, f64, f64)> {
    let q = regions::ExponentQuery::new(a, b, k, l).py_err()?;
    let r = regions::conclusive_region(&q, &rho.inner, &sigma.inner).py_err()?;
    Ok((r.inside, r.slack1, r.slack2))
}

#[pyfunction]
fn min_conclusiveness_exponent(a: f64, b: f64, rho: State, sigma: State) -> PyResult<f64> {
    regions::min_conclusiveness_exponent(a, b, &rho.inner, &sigma.inner).py_err()
}

#[pyfunction]
#[pyo3(signature = (z, rho, sigma, mode="average", prior=0.5))]
fn symmetric_boundary(z: f64, rho: State, sigma: State, mode: &str, prior: f64) -> PyResult<f64> {
    let mode = match mode {
        "average" => regions::SymmetricMode::Average,
        "maximal" => regions::SymmetricMode::Maximal,
        other => return Err(InputError::new_err(format!("unknown mode '{other}'"))),
    };
    let q = regions::SymmetricQuery::new(0.0, z, prior, mode).py_err()?;
    regions::symmetric_boundary(&q, &rho.inner, &sigma.inner).py_err()
}

/// Samples a boundary; returns a list of `(x, y)` pairs in nats.
#[pyfunction]
#[pyo3(signature = (kind, rho, sigma, samples=256, k=0.0, l=0.0))]
fn boundary_scan(kind: &str, rho: State, sigma: State, samples: usize, k: f64, l: f64) -> PyResult<Vec<(f64, f64)>> {
    let kind = regions::BoundaryKind::parse(kind).py_err()?;
    let params = regions::ScanParams { k, l, ..regions::ScanParams::default() };
    let b = regions::boundary_scan(kind, &params, &rho.inner, &sigma.inner, samples).py_err()?;
    Ok(b.points.iter().map(|p| (p.x, p.y)).collect())
}

fn distribution(p: Vec<f64>) -> PyResult<ClassicalDistribution> {
    ClassicalDistribution::new(p).py_err()
}

/// Exact statistics of a classical three-outcome test as a dict.
///
/// `mode` is `stein` (uses `delta`, default `n^(-1/3)`), `reject` (uses `k`
/// and `l`) or `hoeffding` (uses `a`).
#[pyfunction]
#[pyo3(signature = (p, q, n, mode, delta=None, k=0.0, l=0.0, a=0.0))]
#[allow(clippy::too_many_arguments)]
fn classical_test<'py>(
    py: Python<'py>,
    p: Vec<f64>,
    q: Vec<f64>,
    n: u64,
    mode: &str,
    delta: Option<f64>,
    k: f64,
    l: f64,
    a: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let (p, q) = (distribution(p)?, distribution(q)?);
    let cfg = types::EngineConfig::exact_only();
    let stats = py
        .detach(|| match mode {
            "stein" => types::eval_stein_test(&p, &q, n, delta.unwrap_or_else(|| types::stein_delta(n)), &cfg),
            "reject" => types::eval_reject_test(&p, &q, n, k, l, &cfg),
            "hoeffding" => types::eval_hoeffding_test(&p, &q, n, a, &cfg),
            other => Err(abstain::Error::InvalidInput(format!("unknown mode '{other}'"))),
        })
        .py_err()?;
    json_to_py(py, &stats.to_json())
}

/// Rows of `{k, rate, target, gap, bound}` for `k = 1..k_max`.
#[pyfunction]
#[pyo3(signature = (s, rho, sigma, k_max=8, direction="pinch_first_arg"))]
fn pinching_scan<'py>(
    py: Python<'py>,
    s: f64,
    rho: State,
    sigma: State,
    k_max: usize,
    direction: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let dir = pinching::PinchDirection::parse(direction).py_err()?;
    let rows = pinching::pinching_scan(s, &rho.inner, &sigma.inner, k_max, dir).py_err()?;
    json_to_py(py, &serde_json::to_value(rows).expect("rows serialize"))
}

/// Monte Carlo report of the adaptive protocol; `epsilon` is in nats.
#[pyfunction]
#[pyo3(signature = (rho, sigma, n=400, epsilon=0.3 * std::f64::consts::LN_2, trials=100_000, seed=0x5EED))]
fn simulate_sequential<'py>(
    py: Python<'py>,
    rho: State,
    sigma: State,
    n: usize,
    epsilon: f64,
    trials: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let (r, s) = (rho.inner.clone(), sigma.inner.clone());
    let report = py
        .detach(move || {
            let pair = sequential::optimal_measurements(&r, &s)?;
            let cfg = sequential::ProtocolConfig::new(&pair, n, epsilon, seed, trials)?;
            sequential::estimate_statistics(&pair, &cfg)
        })
        .py_err()?;
    json_to_py(py, &serde_json::to_value(&report).expect("report serializes"))
}

#[pymodule]
fn abstain_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("AbstainError", py.get_type::<AbstainError>())?;
    m.add("InputError", py.get_type::<InputError>())?;
    m.add("NumericalError", py.get_type::<NumericalError>())?;
    m.add("BudgetError", py.get_type::<BudgetError>())?;
    m.add_class::<PyDensityMatrix>()?;
    m.add_function(wrap_pyfunction!(relative_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(renyi, m)?)?;
    m.add_function(wrap_pyfunction!(max_relative_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(chernoff, m)?)?;
    m.add_function(wrap_pyfunction!(d_star, m)?)?;
    m.add_function(wrap_pyfunction!(measured_relative_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(projective_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(hoeffding, m)?)?;
    m.add_function(wrap_pyfunction!(han_kobayashi, m)?)?;
    m.add_function(wrap_pyfunction!(conclusive_region, m)?)?;
    m.add_function(wrap_pyfunction!(min_conclusiveness_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(symmetric_boundary, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_scan, m)?)?;
    m.add_function(wrap_pyfunction!(classical_test, m)?)?;
    m.add_function(wrap_pyfunction!(pinching_scan, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_sequential, m)?)?;
    Ok(())
}
