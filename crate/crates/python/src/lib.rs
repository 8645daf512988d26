//! Python bindings. Edge-indexed results come back as lists in canonical
//! edge order, the order of `Graph.edges()`.

use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;

use modal_barrier::distributed::{self, DistributedConfig};
use modal_barrier::dynamics;
use modal_barrier::epidemic::{self, EpidemicParams, PatientZero};
use modal_barrier::io::{self, EdgeListFormat};
use modal_barrier::metrics;
use modal_barrier::resistance as res;
use modal_barrier::{spectral, EdgeVector, ErrorKind, Partition};

fn to_py(e: modal_barrier::Error) -> PyErr {
    match e.kind() {
        ErrorKind::Validation => PyValueError::new_err(e.to_string()),
        ErrorKind::Io => PyOSError::new_err(e.to_string()),
        ErrorKind::Numeric => PyArithmeticError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for modal_barrier::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Undirected weighted graph.
#[pyclass(frozen)]
struct Graph {
    inner: modal_barrier::Graph,
}

#[pymethods]
impl Graph {
    /// `Graph(n, [(i, j, w), ...])` with vertices `0..n`.
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        Ok(Self {
            inner: modal_barrier::Graph::new(n, edges).py()?,
        })
    }

    /// Parses an `i j [w]` edge list; labels are kept as strings.
    #[staticmethod]
    fn from_edge_list(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::load_edge_list(text, EdgeListFormat::Auto).py()?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    /// `(tail, head, weight)` with `tail < head`, in canonical order.
    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.inner
            .edges()
            .iter()
            .map(|e| (e.tail, e.head, e.weight))
            .collect()
    }

    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    fn index_of(&self, label: &str) -> Option<usize> {
        self.inner.index_of(label)
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    /// Same topology with new edge weights.
    fn reweighted(&self, weights: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.reweighted(&weights).py()?,
        })
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, m={})", self.inner.n(), self.inner.m())
    }
}

/// Laplacian eigenvalues, ascending.
#[pyfunction]
fn spectrum(g: &Graph) -> PyResult<Vec<f64>> {
    let s = spectral::eigendecompose(&g.inner.laplacian()).py()?;
    Ok(s.eigenvalues().to_vec())
}

/// Cluster count at the largest relative eigengap.
#[pyfunction]
#[pyo3(signature = (g, max_q=None))]
fn detect_q(g: &Graph, max_q: Option<usize>) -> PyResult<usize> {
    let s = spectral::eigendecompose(&g.inner.laplacian()).py()?;
    let max_q = max_q.unwrap_or_else(|| spectral::default_max_q(g.inner.n()));
    Ok(spectral::detect_q(&s, max_q).py()?.q)
}

/// Per-edge resistance. `method` is `exact` (needs `q`), `approx-i`,
/// `approx-ii` or `distributed`; `p` defaults to `ceil(n / 2)`.
#[pyfunction]
#[pyo3(signature = (g, method="exact", q=None, epsilon=0.1, p=None))]
fn resistance(
    g: &Graph,
    method: &str,
    q: Option<usize>,
    epsilon: f64,
    p: Option<usize>,
) -> PyResult<Vec<f64>> {
    let g = &g.inner;
    let p = p.unwrap_or_else(|| g.n().div_ceil(2));
    let r = match method {
        "exact" => {
            let q = q.ok_or_else(|| PyValueError::new_err("exact resistance needs q"))?;
            res::aggregated_resistance_exact(g, q).py()?
        }
        "approx-i" => res::aggregated_resistance_approx1(g, epsilon).py()?,
        "approx-ii" => res::aggregated_resistance_approx2(g, epsilon, p).py()?,
        "distributed" => distributed::run_distributed(g, &DistributedConfig::new(epsilon, p)).py()?.0,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown method {other:?}; expected exact, approx-i, approx-ii or distributed"
            )))
        }
    };
    Ok(r.into_values())
}

#[pyfunction]
#[pyo3(signature = (resistance, epsilon_b=0.01))]
fn barrier_weights(resistance: Vec<f64>, epsilon_b: f64) -> PyResult<Vec<f64>> {
    let r = EdgeVector::resistance(resistance).py()?;
    Ok(res::barrier_weights(&r, epsilon_b).py()?.into_values())
}

#[pyfunction]
fn shuffle_weights(weights: Vec<f64>, seed: u64) -> PyResult<Vec<f64>> {
    let w = EdgeVector::weight(weights).py()?;
    Ok(res::shuffle_weights(&w, seed).into_values())
}

/// q-modal distance between `g` and the partition given as one cluster id per vertex.
#[pyfunction]
fn modal_distance(g: &Graph, assignment: Vec<usize>) -> PyResult<f64> {
    let p = Partition::new(assignment).py()?;
    metrics::modal_distance(&g.inner, &p).py()
}

#[pyfunction]
fn avg_relative_outgoing_weight(g: &Graph, assignment: Vec<usize>) -> PyResult<f64> {
    let p = Partition::new(assignment).py()?;
    metrics::avg_relative_outgoing_weight(&g.inner, &p).py()
}

#[pyfunction]
fn alpha_star(avgrelout: f64, lambda_q: f64, q: usize) -> PyResult<f64> {
    metrics::alpha_star(avgrelout, lambda_q, q).py()
}

/// Diffusion steps until `target` holds `gamma`, or `None` within `max_steps`.
#[pyfunction]
#[pyo3(signature = (g, weights, start, target, kappa=None, gamma=None, max_steps=100_000))]
fn crossing_time(
    g: &Graph,
    weights: Vec<f64>,
    start: usize,
    target: usize,
    kappa: Option<f64>,
    gamma: Option<f64>,
    max_steps: usize,
) -> PyResult<Option<usize>> {
    let g = &g.inner;
    let w = EdgeVector::weight(weights).py()?;
    let kappa = kappa.unwrap_or_else(|| dynamics::default_kappa(g, &w));
    let gamma = gamma.unwrap_or_else(|| dynamics::default_gamma(g.n()));
    dynamics::crossing_time(g, &w, start, target, kappa, gamma, max_steps).py()
}

/// Mean infected count per day over `runs` seeded runs. `patient_zero`
/// of `None` draws a random vertex per run.
#[pyfunction]
#[pyo3(signature = (g, weights, pa=0.03, days=120, runs=1000, seed=0, patient_zero=None))]
fn epidemic_curve(
    py: Python<'_>,
    g: &Graph,
    weights: Vec<f64>,
    pa: f64,
    days: usize,
    runs: usize,
    seed: u64,
    patient_zero: Option<usize>,
) -> PyResult<Vec<f64>> {
    let params = EpidemicParams {
        pa,
        horizon: days,
        runs,
        seed,
        ..Default::default()
    };
    let p0 = patient_zero.map_or(PatientZero::Random, PatientZero::Vertex);
    let g = &g.inner;
    py.detach(|| epidemic::monte_carlo_epidemic_from(g, &weights, &params, p0))
        .py()
}

#[pymodule(name = "modal_barrier")]
fn modal_barrier_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(detect_q, m)?)?;
    m.add_function(wrap_pyfunction!(resistance, m)?)?;
    m.add_function(wrap_pyfunction!(barrier_weights, m)?)?;
    m.add_function(wrap_pyfunction!(shuffle_weights, m)?)?;
    m.add_function(wrap_pyfunction!(modal_distance, m)?)?;
    m.add_function(wrap_pyfunction!(avg_relative_outgoing_weight, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_star, m)?)?;
    m.add_function(wrap_pyfunction!(crossing_time, m)?)?;
    m.add_function(wrap_pyfunction!(epidemic_curve, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
