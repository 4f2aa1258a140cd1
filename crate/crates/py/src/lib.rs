//! Python bindings: priors, sampling, exact scoring, μ_k, phrase
//! statistics, theoretical limits and the CTW / LZ78 predictors.
//!
//! Sequences cross the boundary as `bytes` (one symbol per byte); curves
//! as lists of `(n, value)` tuples.

use lz78_source::baselines::{self, SequentialPredictor, SpaConfig};
use lz78_source::lz_source::{self, GenerationOptions};
use lz78_source::theory::{self, MarkovLaw};
use lz78_source::{empirical, CurveSeries, Error};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse<T: std::str::FromStr>(text: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    text.parse().map_err(|e: T::Err| PyValueError::new_err(e.to_string()))
}

fn points(c: CurveSeries) -> Vec<(u64, f64)> {
    c.points
}

fn to_py_json<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A law over the probability simplex, built from a descriptor such as
/// `dirichlet(0.5,0.5)` or `mix(dirichlet(2,2)@0.05,atoms((0.95,0.05)@0.5,(0.05,0.95)@0.5)@0.95)`.
#[pyclass(name = "Prior", frozen, module = "lz78_source_py")]
struct PyPrior(lz78_source::Prior);

#[pymethods]
impl PyPrior {
    #[new]
    fn new(descriptor: &str) -> PyResult<Self> {
        parse(descriptor).map(Self)
    }

    #[staticmethod]
    fn jeffreys() -> Self {
        Self(lz78_source::Prior::jeffreys())
    }

    #[staticmethod]
    fn dirichlet(gamma: Vec<f64>) -> PyResult<Self> {
        lz78_source::Prior::dirichlet(gamma).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn dirac_dirichlet(gamma: f64, xi: f64, dirichlet_weight: f64) -> PyResult<Self> {
        lz78_source::Prior::dirac_dirichlet(gamma, xi, dirichlet_weight)
            .map(Self)
            .map_err(py_err)
    }

    #[getter]
    fn alphabet_size(&self) -> usize {
        self.0.alphabet_size()
    }

    /// E[H(Θ)] in bits: the entropy rate of the source.
    fn expected_entropy(&self) -> f64 {
        self.0.expected_entropy()
    }

    /// H(E[Θ]) in bits.
    fn entropy_of_mean(&self) -> f64 {
        self.0.entropy_of_mean()
    }

    fn jensen_gap(&self) -> f64 {
        self.0.jensen_gap()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Prior('{}')", self.0)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

/// A realization with its optional B-trace and running log loss.
#[pyclass(name = "Trace", frozen, module = "lz78_source_py")]
struct PyTrace(lz_source::GenerationTrace);

#[pymethods]
impl PyTrace {
    #[getter]
    fn symbols<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.0.x)
    }

    /// Node id whose Θ produced each symbol, if recorded.
    #[getter]
    fn node_ids(&self) -> Option<Vec<u32>> {
        self.0.b_index.clone()
    }

    #[getter]
    fn phrase_starts(&self) -> Vec<u64> {
        self.0.phrase_starts.clone()
    }

    #[getter]
    fn log_loss(&self) -> Option<Vec<(u64, f64)>> {
        self.0.log_loss.clone().map(points)
    }

    #[getter]
    fn log2_prob(&self) -> Option<f64> {
        self.0.log2_prob
    }

    /// Realized Θ of `node`, or None if the node was never visited.
    fn theta(&self, node: u32) -> Option<Vec<f64>> {
        self.0.theta(node).map(<[f64]>::to_vec)
    }

    /// M_n(A) at the checkpoints for each box descriptor.
    fn box_measure(&self, boxes: Vec<String>, checkpoints: Vec<u64>) -> PyResult<Vec<Vec<(u64, f64)>>> {
        let boxes = boxes.iter().map(|b| parse(b)).collect::<PyResult<Vec<_>>>()?;
        let curves = empirical::empirical_measure_b(&self.0, &boxes, &checkpoints).map_err(py_err)?;
        Ok(curves.into_iter().map(points).collect())
    }

    /// L_n of a joint event descriptor at the checkpoints.
    fn event_measure(&self, event: &str, checkpoints: Vec<u64>) -> PyResult<Vec<(u64, f64)>> {
        empirical::empirical_measure_joint(&self.0, &parse(event)?, &checkpoints)
            .map(points)
            .map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// Samples n symbols; returns `bytes`.
#[pyfunction]
fn generate<'py>(py: Python<'py>, prior: &PyPrior, n: u64, seed: u64) -> PyResult<Bound<'py, PyBytes>> {
    let t = py
        .detach(|| lz_source::generate(&prior.0, n, seed, &GenerationOptions::symbols()))
        .map_err(py_err)?;
    Ok(PyBytes::new(py, &t.x))
}

/// Samples n symbols keeping the B-trace and the log-loss curve at
/// `checkpoints`.
#[pyfunction]
#[pyo3(signature = (prior, n, seed, checkpoints = Vec::new()))]
fn generate_trace(py: Python<'_>, prior: &PyPrior, n: u64, seed: u64, checkpoints: Vec<u64>) -> PyResult<PyTrace> {
    py.detach(|| lz_source::generate(&prior.0, n, seed, &GenerationOptions::full(checkpoints)))
        .map(PyTrace)
        .map_err(py_err)
}

/// (1/t) log₂ 1/Q(x^t) under the LZ78 SPA with `prior`.
#[pyfunction]
fn score(py: Python<'_>, prior: &PyPrior, symbols: Vec<u8>, checkpoints: Vec<u64>) -> PyResult<Vec<(u64, f64)>> {
    py.detach(|| lz_source::score(&prior.0, &symbols, &checkpoints))
        .map(points)
        .map_err(py_err)
}

#[pyfunction]
fn log2_probability(prior: &PyPrior, symbols: Vec<u8>) -> PyResult<f64> {
    lz_source::log2_probability(&prior.0, &symbols).map_err(py_err)
}

#[pyfunction]
fn mu_k(py: Python<'_>, symbols: Vec<u8>, k: usize, alphabet: usize, checkpoints: Vec<u64>) -> PyResult<Vec<(u64, f64)>> {
    py.detach(|| empirical::mu_k(&symbols, k, alphabet, &checkpoints))
        .map(|m| points(m.curve))
        .map_err(py_err)
}

#[pyfunction]
fn compression_ratio(symbols: Vec<u8>, alphabet: usize, checkpoints: Vec<u64>) -> PyResult<Vec<(u64, f64)>> {
    lz_source::compression_ratio(&symbols, alphabet, &checkpoints)
        .map(points)
        .map_err(py_err)
}

/// Phrase counts of the LZ78 parse as a dict.
#[pyfunction]
fn phrase_stats<'py>(py: Python<'py>, symbols: Vec<u8>, alphabet: usize) -> PyResult<Bound<'py, PyAny>> {
    let st = lz_source::phrase_stats(lz_source::PhraseInput::Sequence { x: &symbols, alphabet }, &[]).map_err(py_err)?;
    to_py_json(py, &st)
}

#[pyfunction]
#[pyo3(signature = (n, per_decade = lz78_source::curve::POINTS_PER_DECADE))]
fn log_spaced_checkpoints(n: u64, per_decade: usize) -> Vec<u64> {
    lz78_source::log_spaced_checkpoints(n, per_decade)
}

/// Entropy rate, μ limit and Jensen gap of `prior` as a dict.
#[pyfunction]
fn limits<'py>(py: Python<'py>, prior: &PyPrior) -> PyResult<Bound<'py, PyAny>> {
    let d = to_py_json(py, &theory::limits(&prior.0))?;
    d.cast::<PyDict>()?.del_item("mutual_information").ok();
    Ok(d)
}

/// lim (1/n) log₂ Q(Xⁿ)/P(Xⁿ) for a Markov law descriptor; `inf` if P
/// puts zero mass where the source does not.
#[pyfunction]
fn relative_entropy_limit(prior: &PyPrior, law: &str) -> PyResult<f64> {
    theory::relative_entropy_limit(&prior.0, &parse::<MarkovLaw>(law)?).map_err(py_err)
}

/// (1/t) log₂ 1/P(x^t) under a fixed Markov law descriptor.
#[pyfunction]
fn markov_law_score(law: &str, symbols: Vec<u8>, checkpoints: Vec<u64>) -> PyResult<Vec<(u64, f64)>> {
    theory::markov_law_score(&parse(law)?, &symbols, &checkpoints)
        .map(points)
        .map_err(py_err)
}

/// Log loss of a baseline SPA: `ctw(D)`, `markov(k,γ)` or `lz78(<prior>)`.
#[pyfunction]
fn spa_log_loss(py: Python<'_>, spa: &str, alphabet: usize, symbols: Vec<u8>, checkpoints: Vec<u64>) -> PyResult<Vec<(u64, f64)>> {
    let cfg: SpaConfig = parse(spa)?;
    py.detach(|| baselines::spa_log_loss(&cfg, alphabet, &symbols, &checkpoints))
        .map(points)
        .map_err(py_err)
}

/// Binary context-tree weighting predictor.
#[pyclass(name = "CtwModel", module = "lz78_source_py")]
struct PyCtw(baselines::CtwModel);

#[pymethods]
impl PyCtw {
    #[new]
    #[pyo3(signature = (depth, pad = 0))]
    fn new(depth: usize, pad: u8) -> PyResult<Self> {
        baselines::CtwModel::new(depth, pad).map(Self).map_err(py_err)
    }

    /// Predictive distribution of the next symbol.
    fn predict(&self) -> Vec<f64> {
        self.0.predict().probs().to_vec()
    }

    /// Consumes `symbol`; returns log₂ of the probability it was given.
    fn update(&mut self, symbol: u8) -> PyResult<f64> {
        if symbol > 1 {
            return Err(PyValueError::new_err(format!("symbol {symbol} is not binary")));
        }
        Ok(self.0.update(symbol))
    }

    /// ln of the weighted block probability of everything consumed.
    fn ln_weighted_probability(&self) -> f64 {
        self.0.ln_weighted_probability()
    }
}

/// The LZ78 SPA with a per-node Bayesian mixture.
#[pyclass(name = "Lz78Spa", module = "lz78_source_py")]
struct PyLz78Spa(lz_source::Lz78Spa);

#[pymethods]
impl PyLz78Spa {
    #[new]
    fn new(prior: &PyPrior) -> Self {
        Self(lz_source::Lz78Spa::new(&prior.0))
    }

    fn predict(&self) -> PyResult<Vec<f64>> {
        SequentialPredictor::predictive(&self.0)
            .map(|p| p.probs().to_vec())
            .map_err(py_err)
    }

    /// Consumes `symbol`; returns log₂ of the probability it was given.
    fn update(&mut self, symbol: u8) -> PyResult<f64> {
        if symbol as usize >= self.0.alphabet_size() {
            return Err(PyValueError::new_err(format!("symbol {symbol} is outside the alphabet")));
        }
        Ok(self.0.update(symbol))
    }

    /// Completed phrases so far.
    fn phrases(&self) -> u64 {
        self.0.tree().completed_phrases()
    }
}

#[pymodule]
fn lz78_source_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPrior>()?;
    m.add_class::<PyTrace>()?;
    m.add_class::<PyCtw>()?;
    m.add_class::<PyLz78Spa>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(generate_trace, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(log2_probability, m)?)?;
    m.add_function(wrap_pyfunction!(mu_k, m)?)?;
    m.add_function(wrap_pyfunction!(compression_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(phrase_stats, m)?)?;
    m.add_function(wrap_pyfunction!(log_spaced_checkpoints, m)?)?;
    m.add_function(wrap_pyfunction!(limits, m)?)?;
    m.add_function(wrap_pyfunction!(relative_entropy_limit, m)?)?;
    m.add_function(wrap_pyfunction!(markov_law_score, m)?)?;
    m.add_function(wrap_pyfunction!(spa_log_loss, m)?)?;
    Ok(())
}
