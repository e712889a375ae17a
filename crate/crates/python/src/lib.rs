//! Python bindings for the gradual release mechanism.

use gradual_core::audit::{run_suite, Suite};
use gradual_core::mechanism::{naive_composition_release, tighten_for_third_party};
use gradual_core::{
    Error, JumpChain, LevelPair, MechanismState, PrivacyLevel, PrivateVector, RandomSource,
    Response,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

create_exception!(gradual_release, BridgeUnsupportedError, PyValueError);

fn to_py(err: Error) -> PyErr {
    match err {
        Error::BridgeUnsupported { .. } => BridgeUnsupportedError::new_err(err.to_string()),
        Error::Io(_) => PyIOError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn level(eps: f64) -> PyResult<PrivacyLevel> {
    PrivacyLevel::new(eps).map_err(to_py)
}

fn pair(eps1: f64, eps2: f64) -> PyResult<LevelPair> {
    LevelPair::from_values(eps1, eps2).map_err(to_py)
}

#[pyclass(name = "RandomSource", module = "gradual_release")]
struct PyRandomSource {
    inner: RandomSource,
}

#[pymethods]
impl PyRandomSource {
    #[new]
    #[pyo3(signature = (seed, stream = None))]
    fn new(seed: u64, stream: Option<u64>) -> Self {
        let inner = match stream {
            Some(index) => RandomSource::for_coordinate(seed, index),
            None => RandomSource::seed_from_u64(seed),
        };
        Self { inner }
    }

    fn uniform(&mut self) -> f64 {
        self.inner.uniform()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

#[pyclass(name = "ConditionalLaw", module = "gradual_release", frozen)]
struct PyConditionalLaw {
    #[pyo3(get)]
    atom_location: f64,
    #[pyo3(get)]
    atom_mass: f64,
    #[pyo3(get)]
    branch_weights: (f64, f64, f64),
    law: gradual_core::ConditionalLaw,
}

#[pymethods]
impl PyConditionalLaw {
    fn continuous_density(&self, y: f64) -> f64 {
        self.law.continuous_density(y)
    }

    fn log_continuous_density(&self, y: f64) -> f64 {
        self.law.log_continuous_density(y)
    }

    fn sample(&self, rng: &mut PyRandomSource) -> f64 {
        self.law.sample(&mut rng.inner)
    }
}

#[pyclass(name = "Response", module = "gradual_release", frozen)]
struct PyResponse {
    inner: Response,
}

#[pymethods]
impl PyResponse {
    #[getter]
    fn eps_dp(&self) -> f64 {
        self.inner.eps_dp.value()
    }

    #[getter]
    fn eps_lipschitz(&self) -> f64 {
        self.inner.eps_lipschitz.value()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values.clone()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.to_record()).map_err(|e| to_py(e.into()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let record = serde_json::from_str(text).map_err(|e| to_py(e.into()))?;
        let inner = Response::from_record(&record).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "Response(eps_dp={}, eps_lipschitz={}, values={:?})",
            self.inner.eps_dp.value(),
            self.inner.eps_lipschitz.value(),
            self.inner.values
        )
    }
}

#[pyclass(name = "JumpChain", module = "gradual_release")]
struct PyJumpChain {
    inner: JumpChain,
}

#[pymethods]
impl PyJumpChain {
    #[new]
    #[pyo3(signature = (eps, seed, stream = 0))]
    fn new(eps: f64, seed: u64, stream: u64) -> PyResult<Self> {
        let rng = RandomSource::for_coordinate(seed, stream);
        Ok(Self {
            inner: JumpChain::init(level(eps)?, rng),
        })
    }

    fn query(&mut self, eps: f64) -> PyResult<f64> {
        self.inner.query(level(eps)?).map_err(to_py)
    }

    fn points(&self) -> Vec<(f64, f64)> {
        self.inner
            .points()
            .iter()
            .map(|p| (p.eps.value(), p.noise))
            .collect()
    }

    fn jump_count(&self) -> usize {
        self.inner.jump_count()
    }

    fn compact(&mut self) {
        self.inner.compact();
    }

    fn serialize<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.serialize())
    }

    #[staticmethod]
    fn deserialize(data: &[u8]) -> PyResult<Self> {
        let inner = JumpChain::deserialize(data).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "Mechanism", module = "gradual_release")]
struct PyMechanism {
    inner: MechanismState,
}

#[pymethods]
impl PyMechanism {
    #[new]
    #[pyo3(signature = (data, alpha = 1.0, seed = 0))]
    fn new(data: Vec<f64>, alpha: f64, seed: u64) -> PyResult<Self> {
        let data = PrivateVector::new(data).map_err(to_py)?;
        let inner = MechanismState::new(data, alpha, seed).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn release(&mut self, eps: f64) -> PyResult<PyResponse> {
        let inner = self.inner.release(level(eps)?).map_err(to_py)?;
        Ok(PyResponse { inner })
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    #[getter]
    fn released_levels(&self) -> Vec<f64> {
        self.inner
            .released_levels()
            .iter()
            .map(|l| l.value())
            .collect()
    }

    fn serialize(&self) -> String {
        self.inner.serialize()
    }

    #[staticmethod]
    fn deserialize(text: &str) -> PyResult<Self> {
        let inner = MechanismState::deserialize(text).map_err(to_py)?;
        Ok(Self { inner })
    }
}

#[pyfunction]
fn laplace_pdf(x: f64, eps: f64) -> PyResult<f64> {
    gradual_core::laplace_pdf(x, level(eps)?).map_err(to_py)
}

#[pyfunction]
fn laplace_log_pdf(x: f64, eps: f64) -> PyResult<f64> {
    gradual_core::laplace_log_pdf(x, level(eps)?).map_err(to_py)
}

#[pyfunction]
fn laplace_sample(eps: f64, rng: &mut PyRandomSource) -> PyResult<f64> {
    Ok(gradual_core::laplace_sample(level(eps)?, &mut rng.inner))
}

/// Returns `(diagonal_coefficient, continuous_density)`.
#[pyfunction]
fn joint_pdf(x: f64, y: f64, eps1: f64, eps2: f64) -> PyResult<(f64, f64)> {
    let v = gradual_core::joint_pdf(x, y, pair(eps1, eps2)?).map_err(to_py)?;
    Ok((v.diagonal_coefficient, v.continuous_density))
}

#[pyfunction]
fn forward_conditional(x: f64, eps1: f64, eps2: f64) -> PyResult<PyConditionalLaw> {
    if !x.is_finite() {
        return Err(PyValueError::new_err("x must be finite"));
    }
    let law = gradual_core::forward_conditional(x, pair(eps1, eps2)?);
    let [w0, w1, w2] = law.branch_weights;
    Ok(PyConditionalLaw {
        atom_location: law.atom_location,
        atom_mass: law.atom_mass,
        branch_weights: (w0, w1, w2),
        law,
    })
}

#[pyfunction]
fn relax_sample(x: f64, eps1: f64, eps2: f64, rng: &mut PyRandomSource) -> PyResult<f64> {
    gradual_core::relax_sample(x, pair(eps1, eps2)?, &mut rng.inner).map_err(to_py)
}

#[pyfunction]
fn tighten_sample(y: f64, eps1: f64, eps2: f64, rng: &mut PyRandomSource) -> PyResult<f64> {
    gradual_core::tighten_sample(y, pair(eps1, eps2)?, &mut rng.inner).map_err(to_py)
}

#[pyfunction]
#[pyo3(name = "tighten_for_third_party")]
fn py_tighten_for_third_party(
    response: &PyResponse,
    eps_lower: f64,
    alpha: f64,
    rng: &mut PyRandomSource,
) -> PyResult<PyResponse> {
    let inner = tighten_for_third_party(&response.inner, level(eps_lower)?, alpha, &mut rng.inner)
        .map_err(to_py)?;
    Ok(PyResponse { inner })
}

#[pyfunction]
#[pyo3(name = "naive_composition_release", signature = (data, eps1, eps2, alpha = 1.0, seed = 0))]
fn py_naive_composition_release(
    data: Vec<f64>,
    eps1: f64,
    eps2: f64,
    alpha: f64,
    seed: u64,
) -> PyResult<(PyResponse, PyResponse)> {
    let data = PrivateVector::new(data).map_err(to_py)?;
    let (first, second) =
        naive_composition_release(&data, level(eps1)?, level(eps2)?, alpha, seed).map_err(to_py)?;
    Ok((PyResponse { inner: first }, PyResponse { inner: second }))
}

/// Runs an audit suite and returns one dict per test.
#[pyfunction]
#[pyo3(signature = (suite, seed = 1, n = 1_000_000))]
fn run_audit<'py>(
    py: Python<'py>,
    suite: &str,
    seed: u64,
    n: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let suite: Suite = suite.parse().map_err(to_py)?;
    let reports = py
        .detach(|| run_suite(suite, seed, n))
        .map_err(to_py)?;
    let json = py.import("json")?;
    reports
        .iter()
        .map(|r| {
            let dict = PyDict::new(py);
            dict.set_item("test_name", &r.test_name)?;
            dict.set_item("statistic", r.statistic)?;
            dict.set_item("threshold", r.threshold)?;
            dict.set_item("n_samples", r.n_samples)?;
            dict.set_item("passed", r.passed)?;
            let details = serde_json::to_string(&r.details).map_err(|e| to_py(e.into()))?;
            dict.set_item("details", json.call_method1("loads", (details,))?)?;
            Ok(dict)
        })
        .collect()
}

#[pymodule]
fn gradual_release(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BridgeUnsupportedError", m.py().get_type::<BridgeUnsupportedError>())?;
    m.add_class::<PyRandomSource>()?;
    m.add_class::<PyConditionalLaw>()?;
    m.add_class::<PyResponse>()?;
    m.add_class::<PyJumpChain>()?;
    m.add_class::<PyMechanism>()?;
    m.add_function(wrap_pyfunction!(laplace_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(laplace_log_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(laplace_sample, m)?)?;
    m.add_function(wrap_pyfunction!(joint_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(forward_conditional, m)?)?;
    m.add_function(wrap_pyfunction!(relax_sample, m)?)?;
    m.add_function(wrap_pyfunction!(tighten_sample, m)?)?;
    m.add_function(wrap_pyfunction!(py_tighten_for_third_party, m)?)?;
    m.add_function(wrap_pyfunction!(py_naive_composition_release, m)?)?;
    m.add_function(wrap_pyfunction!(run_audit, m)?)?;
    Ok(())
}
