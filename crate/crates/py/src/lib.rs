//! Python bindings. The extension module is importable as `pathcol`.

use num_bigint::BigUint;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pathcol::analysis::{dobrushin_alpha as alpha, evolve_distribution, predicted_mixing_bound};
use pathcol::chains::ChainRunner;
use pathcol::coupling::{disagreement_profile_v1, disagreement_profile_vs, tv_distance as tv};
use pathcol::rng::stream_rng;
use pathcol::segment::StateClass;
use pathcol::suites::{run_suite, SuiteConfig};
use pathcol::{
    enumerate_state_space, exact_uniform_sample, make_params, sample_segment, segment_counts, Boundary, BoundarySpec,
    ChainKind, ChainParams, Colour, ColourGraph, Error, Overrides, PathState, ScanOrder,
};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::EmptySupport(_) | Error::NotReached { .. } | Error::BothBoundariesDisagree { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Parity class of a start state; `Omega` when `H` is not bipartite.
fn class_of_start(h: &ColourGraph, x: &PathState) -> PyResult<StateClass> {
    if !h.colour_classes().is_bipartite() {
        return Ok(StateClass::Omega);
    }
    x.class_of(h).ok_or_else(|| PyValueError::new_err("start state is in no parity class"))
}

fn to_py(c: Vec<Colour>) -> Vec<u32> {
    c.into_iter().map(u32::from).collect()
}

fn from_py(h: &ColourGraph, c: Vec<u32>) -> PyResult<PathState> {
    c.into_iter()
        .map(|x| {
            Colour::try_from(x)
                .ok()
                .filter(|&x| (x as usize) < h.q())
                .ok_or_else(|| PyValueError::new_err(format!("colour {x} out of range for q = {}", h.q())))
        })
        .collect::<PyResult<Vec<_>>>()
        .map(PathState::new)
}

fn boundary(c: Option<Colour>) -> Boundary {
    c.map_or(Boundary::Free, Boundary::Colour)
}

fn class_arg(h: &ColourGraph, class: &str) -> PyResult<StateClass> {
    match class {
        "auto" => Ok(StateClass::auto(h)),
        "omega" => Ok(StateClass::Omega),
        "omega1" => Ok(StateClass::Omega1),
        "omega2" => Ok(StateClass::Omega2),
        other => Err(PyValueError::new_err(format!("unknown class `{other}`"))),
    }
}

/// A colour graph `H` (undirected, loops allowed).
#[pyclass(name = "Graph", frozen)]
struct PyGraph {
    inner: ColourGraph,
}

#[pymethods]
impl PyGraph {
    /// Parse a graph file (text edge list or JSON).
    #[staticmethod]
    fn load(text: &str) -> PyResult<Self> {
        ColourGraph::load(text).map(|inner| PyGraph { inner }).map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (name, q=None))]
    fn builtin(name: &str, q: Option<usize>) -> PyResult<Self> {
        ColourGraph::builtin(name, q).map(|inner| PyGraph { inner }).map_err(py_err)
    }

    #[getter]
    fn q(&self) -> usize {
        self.inner.q()
    }

    #[getter]
    fn name(&self) -> Option<String> {
        self.inner.name().map(str::to_string)
    }

    #[getter]
    fn max_degree(&self) -> usize {
        self.inner.max_degree()
    }

    #[getter]
    fn hash(&self) -> String {
        self.inner.hash()
    }

    fn edges(&self) -> Vec<(Colour, Colour)> {
        self.inner.edges()
    }

    fn adjacent(&self, a: Colour, b: Colour) -> bool {
        a < self.inner.q() as Colour && b < self.inner.q() as Colour && self.inner.adjacent(a, b)
    }

    fn is_bipartite(&self) -> bool {
        self.inner.colour_classes().is_bipartite()
    }

    /// A pair of colours with no common neighbour, if any.
    fn two_path_witness(&self) -> Option<(Colour, Colour)> {
        self.inner.two_path_witness()
    }

    fn __repr__(&self) -> String {
        format!("Graph({:?})", self.inner)
    }
}

/// Derived constants of one chain on one graph.
#[pyclass(name = "Params", frozen)]
struct PyParams {
    inner: ChainParams,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (graph, kind, *, l1=None, s=None, beta=None, gamma=None, u=None, w=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        graph: &PyGraph,
        kind: &str,
        l1: Option<usize>,
        s: Option<usize>,
        beta: Option<u64>,
        gamma: Option<u64>,
        u: Option<usize>,
        w: Option<usize>,
    ) -> PyResult<Self> {
        let kind: ChainKind = kind.parse().map_err(py_err)?;
        let o = Overrides { l1, s, beta, gamma, u, w };
        make_params(&graph.inner, kind, &o).map(|inner| PyParams { inner }).map_err(py_err)
    }

    #[getter]
    fn kind(&self) -> String {
        format!("{:?}", self.inner.kind).to_lowercase()
    }

    #[getter]
    fn l1(&self) -> usize {
        self.inner.l1
    }

    #[getter]
    fn s(&self) -> usize {
        self.inner.s
    }

    #[getter]
    fn beta(&self) -> BigUint {
        self.inner.beta.clone()
    }

    #[getter]
    fn gamma(&self) -> BigUint {
        self.inner.gamma.clone()
    }

    #[getter]
    fn u(&self) -> BigUint {
        self.inner.u.clone()
    }

    #[getter]
    fn w(&self) -> BigUint {
        self.inner.w.clone()
    }

    #[getter]
    fn overrides(&self) -> Vec<&'static str> {
        self.inner.overrides.names()
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn __repr__(&self) -> String {
        format!("Params({})", self.inner.to_json())
    }
}

/// Number of colourings of `l` sites between the given boundary colours.
#[pyfunction]
#[pyo3(signature = (graph, l, left=None, right=None))]
fn count_segment(graph: &PyGraph, l: usize, left: Option<Colour>, right: Option<Colour>) -> PyResult<BigUint> {
    let bc = BoundarySpec::new(boundary(left), boundary(right));
    segment_counts(&graph.inner, l, &bc).map(|c| c.total).map_err(py_err)
}

/// One exactly uniform filling of a segment.
#[pyfunction]
#[pyo3(signature = (graph, l, left=None, right=None, seed=0))]
fn sample_fill(
    graph: &PyGraph,
    l: usize,
    left: Option<Colour>,
    right: Option<Colour>,
    seed: u64,
) -> PyResult<Vec<u32>> {
    let bc = BoundarySpec::new(boundary(left), boundary(right));
    sample_segment(&graph.inner, l, &bc, &mut stream_rng(seed, 0)).map(to_py).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (graph, n, class_="auto", cap=1_000_000))]
fn enumerate_states(graph: &PyGraph, n: usize, class_: &str, cap: usize) -> PyResult<Vec<Vec<u32>>> {
    let class = class_arg(&graph.inner, class_)?;
    let states = enumerate_state_space(&graph.inner, n, class, cap).map_err(py_err)?;
    Ok(states.into_iter().map(|s| to_py(s.colours)).collect())
}

#[pyfunction]
#[pyo3(signature = (graph, n, seed=0, class_="auto"))]
fn uniform_state(graph: &PyGraph, n: usize, seed: u64, class_: &str) -> PyResult<Vec<u32>> {
    let class = class_arg(&graph.inner, class_)?;
    exact_uniform_sample(&graph.inner, n, class, &mut stream_rng(seed, 0)).map(|s| to_py(s.colours)).map_err(py_err)
}

/// Run a chain for `t` scans (or `t` block updates for the random-update
/// chain) and return the final state.
#[pyfunction]
#[pyo3(signature = (graph, params, n, t, seed=0, init=None))]
fn run_chain(
    graph: &PyGraph,
    params: &PyParams,
    n: usize,
    t: usize,
    seed: u64,
    init: Option<Vec<u32>>,
) -> PyResult<Vec<u32>> {
    let h = &graph.inner;
    let mut x = match init {
        Some(c) if c.len() == n => from_py(h, c)?,
        Some(c) => return Err(PyValueError::new_err(format!("init has {} sites, n is {n}", c.len()))),
        None => exact_uniform_sample(h, n, StateClass::auto(h), &mut stream_rng(seed, 0)).map_err(py_err)?,
    };
    let p = params.inner.clone().with_class(class_of_start(h, &x)?);
    let schedule = p.schedule(n).map_err(py_err)?;
    let mut runner = ChainRunner::new(h, &p, schedule);
    let mut rng = stream_rng(seed, 1);
    for _ in 0..t {
        runner.advance(&mut x, &mut rng).map_err(py_err)?;
    }
    Ok(to_py(x.colours))
}

/// Exact total-variation distance to uniform after each of `t_max` scans.
#[pyfunction]
#[pyo3(signature = (graph, params, start, t_max, cap=1_000_000))]
fn tv_curve(
    graph: &PyGraph,
    params: &PyParams,
    start: Vec<u32>,
    t_max: usize,
    cap: usize,
) -> PyResult<Vec<(usize, f64)>> {
    let h = &graph.inner;
    let start = from_py(h, start)?;
    let p = params.inner.clone().with_class(class_of_start(h, &start)?);
    let curve = evolve_distribution(h, &p, start.n(), &start, t_max, &ScanOrder::Ascending, cap).map_err(py_err)?;
    Ok(curve.points)
}

/// Exact per-site disagreement probabilities of the segment coupling.
#[pyfunction]
#[pyo3(signature = (graph, l, c1, c2, d=None, stride=1))]
fn disagreement_profile(
    graph: &PyGraph,
    l: usize,
    c1: Colour,
    c2: Colour,
    d: Option<Colour>,
    stride: usize,
) -> PyResult<Vec<f64>> {
    let h = &graph.inner;
    let profile = if stride == 1 {
        disagreement_profile_v1(h, l, c1, c2, boundary(d))
    } else {
        disagreement_profile_vs(h, l, c1, c2, boundary(d), stride)
    };
    profile.map(|p| p.p).map_err(py_err)
}

#[pyfunction]
fn tv_distance(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    if p.len() != q.len() {
        return Err(PyValueError::new_err("distributions differ in length"));
    }
    Ok(tv(&p, &q))
}

/// Largest influence sum of the any-order block dynamics.
#[pyfunction]
fn dobrushin_alpha(graph: &PyGraph, l1: usize) -> PyResult<f64> {
    alpha(&graph.inner, l1).map(|r| r.alpha_simple).map_err(py_err)
}

#[pyfunction]
fn mixing_bound(graph: &PyGraph, kind: &str, n: usize, eps: f64) -> PyResult<f64> {
    let kind: ChainKind = kind.parse().map_err(py_err)?;
    predicted_mixing_bound(kind, &graph.inner, n, eps).map(|b| b.value).map_err(py_err)
}

/// Run a verification suite; returns `(status, table)`.
#[pyfunction]
#[pyo3(signature = (suite, graph, n=None, eps=0.01, seed=0))]
fn verify(suite: &str, graph: &PyGraph, n: Option<usize>, eps: f64, seed: u64) -> PyResult<(String, String)> {
    let mut cfg = SuiteConfig::new(graph.inner.clone());
    cfg.n = n;
    cfg.eps = eps;
    cfg.seed = seed;
    let report = run_suite(suite, &cfg).map_err(py_err)?;
    Ok((format!("{:?}", report.status).to_lowercase(), report.table()))
}

#[pymodule]
#[pyo3(name = "pathcol")]
pub fn pathcol_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", pathcol::VERSION)?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyParams>()?;
    m.add_function(wrap_pyfunction!(count_segment, m)?)?;
    m.add_function(wrap_pyfunction!(sample_fill, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_states, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_state, m)?)?;
    m.add_function(wrap_pyfunction!(run_chain, m)?)?;
    m.add_function(wrap_pyfunction!(tv_curve, m)?)?;
    m.add_function(wrap_pyfunction!(disagreement_profile, m)?)?;
    m.add_function(wrap_pyfunction!(tv_distance, m)?)?;
    m.add_function(wrap_pyfunction!(dobrushin_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(mixing_bound, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
