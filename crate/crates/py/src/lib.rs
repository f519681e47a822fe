//! Python bindings. Results come back as plain dicts, lists and tuples.
//!
//! Errors from bad arguments or infeasible targets raise `ValueError`;
//! capacity limits and solver failures raise `RuntimeError`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use erline::ensembles::{self, McmcConfig};
use erline::{entropy, graphon, perturb, scaling, Error, MultiplierPair, Side, SolveMode, StepGraphon};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_)
        | Error::EpsTooLarge(_)
        | Error::NoInteriorMinimum { .. }
        | Error::Parse(_)
        | Error::Infeasible(_)
        | Error::NonGraphical { .. } => PyValueError::new_err(e.to_string()),
        Error::Capacity { .. } | Error::NonConvergence(_) | Error::BoundaryConstraint { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
    }
}

fn parse_side(side: &str) -> PyResult<Side> {
    side.parse().map_err(to_py)
}

/// `I(u)` for u in [0, 1].
#[pyfunction]
fn bernoulli_entropy(u: f64) -> PyResult<f64> {
    entropy::bernoulli_entropy(u).map_err(to_py)
}

/// k-th derivative of `I`; `k = 0` gives `I` itself.
#[pyfunction]
fn entropy_derivative(u: f64, k: u32) -> PyResult<f64> {
    if k == 0 {
        entropy::bernoulli_entropy(u)
    } else {
        entropy::entropy_derivative(u, k)
    }
    .map_err(to_py)
}

#[pyfunction]
fn f_quotient(t1: f64, x: f64) -> PyResult<f64> {
    entropy::f_quotient(t1, x).map_err(to_py)
}

/// `(y_star, value)` minimising the quotient function.
#[pyfunction]
fn f_quotient_min(t1: f64) -> PyResult<(f64, f64)> {
    entropy::f_quotient_min(t1).map(|m| (m.y_star, m.value)).map_err(to_py)
}

#[pyfunction]
fn s_inf_below_coeff(t1: f64) -> PyResult<f64> {
    scaling::s_inf_below_coeff(t1).map_err(to_py)
}

#[pyfunction]
fn s_inf_above_coeff(t1: f64) -> PyResult<f64> {
    scaling::s_inf_above_coeff(t1).map_err(to_py)
}

#[pyfunction]
fn above_graphon_coeff(t1: f64) -> PyResult<f64> {
    scaling::above_graphon_coeff(t1).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (t1, eps, side = "below"))]
fn s_inf_perturbed(t1: f64, eps: f64, side: &str) -> PyResult<f64> {
    scaling::s_inf_perturbed(t1, eps, parse_side(side)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (t1, t2, tol = 1e-9))]
fn region_classify(t1: f64, t2: f64, tol: f64) -> String {
    scaling::region_classify(&erline::ConstraintPair::with_tol(t1, t2, tol), tol).to_string()
}

#[pyfunction]
#[pyo3(signature = (t1_list, eps_grid, side = "below"))]
fn curve_sweep<'py>(py: Python<'py>, t1_list: Vec<f64>, eps_grid: Vec<f64>, side: &str) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let rows = scaling::curve_sweep(&t1_list, &eps_grid, parse_side(side)?).map_err(to_py)?;
    rows.into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("t1", r.t1)?;
            d.set_item("eps", r.eps)?;
            d.set_item("side", r.side.to_string())?;
            d.set_item("pred", r.pred)?;
            d.set_item("numeric", r.numeric)?;
            d.set_item("rel_err", r.rel_err)?;
            d.set_item("exponent", r.exponent)?;
            d.set_item("lower_bound", r.lower_bound)?;
            Ok(d)
        })
        .collect()
}

/// Best two-step perturbation. `mode` is "auto", "exact" or "reduced".
#[pyfunction]
#[pyo3(signature = (t1, t2, mode = "auto"))]
fn solve_microcanonical<'py>(py: Python<'py>, t1: f64, t2: f64, mode: &str) -> PyResult<Bound<'py, PyDict>> {
    let mode = match mode {
        "exact" => SolveMode::ExactConstraints,
        "reduced" => SolveMode::Reduced,
        "auto" if t2 < t1.powi(3) => SolveMode::Reduced,
        "auto" => SolveMode::ExactConstraints,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let r = perturb::solve_microcanonical(t1, t2, mode).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("t1", r.t1)?;
    d.set_item("t2_target", r.t2_target)?;
    d.set_item("eps", r.eps())?;
    d.set_item("mode", if r.mode == SolveMode::Reduced { "reduced" } else { "exact" })?;
    d.set_item("lambda", r.ansatz.lambda)?;
    d.set_item("g11", r.ansatz.g11)?;
    d.set_item("g12", r.ansatz.g12)?;
    d.set_item("g22", r.ansatz.g22)?;
    d.set_item("entropy", r.entropy)?;
    d.set_item("entropy_excess", r.entropy_excess)?;
    d.set_item("residuals", (r.residuals.k1, r.residuals.k2, r.residuals.k3))?;
    d.set_item("case", r.case_label.to_string())?;
    d.set_item("iterations", r.iterations)?;
    Ok(d)
}

/// Densities and entropy of a step graphon given block measures and a
/// symmetric value matrix.
#[pyfunction]
fn graphon_summary(measures: Vec<f64>, values: Vec<Vec<f64>>) -> PyResult<(f64, f64, f64)> {
    let h = StepGraphon::new(measures, values).map_err(to_py)?;
    Ok((h.edge_density(), h.triangle_density(), h.entropy_functional()))
}

type Blocks = (Vec<f64>, Vec<Vec<f64>>);

fn blocks(h: StepGraphon) -> Blocks {
    (h.measures().to_vec(), h.values())
}

/// `(measures, values)` of the explicit above-line graphon.
#[pyfunction]
fn prop_above_graphon(t1: f64, eps: f64) -> PyResult<Blocks> {
    graphon::prop_above_graphon(t1, eps).map(blocks).map_err(to_py)
}

#[pyfunction]
fn scallop_graphon(ell: u32, t1: f64) -> PyResult<Blocks> {
    graphon::scallop_graphon(ell, t1).map(blocks).map_err(to_py)
}

#[pyfunction]
fn count_constrained(n: usize, edges: u64, triangles: u64) -> PyResult<u64> {
    ensembles::count_constrained(n, edges, triangles).map_err(to_py)
}

#[pyfunction]
fn partition_exact<'py>(py: Python<'py>, n: usize, theta1: f64, theta2: f64) -> PyResult<Bound<'py, PyDict>> {
    let m = ensembles::partition_exact(n, MultiplierPair::new(theta1, theta2)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("psi_n", m.psi_n)?;
    d.set_item("mean_t", (m.mean_t[0], m.mean_t[1]))?;
    d.set_item("cov_t", (m.cov_t[0][0], m.cov_t[0][1], m.cov_t[1][1]))?;
    Ok(d)
}

/// `(theta1, theta2)` whose exact canonical means equal `(t1, t3)`.
#[pyfunction]
fn calibrate_theta_exact(n: usize, t1: f64, t3: f64) -> PyResult<(f64, f64)> {
    ensembles::calibrate_theta_exact(n, [t1, t3]).map(|th| (th.theta1, th.theta2)).map_err(to_py)
}

#[pyfunction]
fn relative_entropy_exact<'py>(py: Python<'py>, n: usize, edges: u64, triangles: u64) -> PyResult<Bound<'py, PyDict>> {
    let s = ensembles::relative_entropy_exact(n, edges, triangles).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("omega", s.omega)?;
    d.set_item("theta", (s.theta.theta1, s.theta.theta2))?;
    d.set_item("psi_n", s.psi_n)?;
    d.set_item("mean_t", (s.mean_t[0], s.mean_t[1]))?;
    d.set_item("s_n", s.s_n)?;
    d.set_item("s_n_full_sum", s.s_n_full_sum)?;
    d.set_item("s_n_scaled", s.s_n_scaled())?;
    Ok(d)
}

/// Metropolis estimate of the canonical means. The seed is mandatory so
/// that runs are reproducible.
#[pyfunction]
#[pyo3(signature = (n, theta1, theta2, steps, seed, burn_in = None, batches = 32, chains = 1))]
#[allow(clippy::too_many_arguments)]
fn mcmc_sample<'py>(
    py: Python<'py>,
    n: usize,
    theta1: f64,
    theta2: f64,
    steps: u64,
    seed: u64,
    burn_in: Option<u64>,
    batches: usize,
    chains: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = McmcConfig::new(n, MultiplierPair::new(theta1, theta2), steps, seed);
    cfg.burn_in = burn_in;
    cfg.batches = batches;
    cfg.chains = chains;
    let s = py.detach(|| ensembles::mcmc_sample(&cfg)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("mean_t1", s.mean_t1)?;
    d.set_item("se_t1", s.se_t1)?;
    d.set_item("mean_t3", s.mean_t3)?;
    d.set_item("se_t3", s.se_t3)?;
    d.set_item("mean_edge_density", s.mean_edge_density)?;
    d.set_item("se_edge_density", s.se_edge_density)?;
    d.set_item("acceptance_rate", s.acceptance_rate)?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "erline")]
fn erline_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(bernoulli_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(f_quotient, m)?)?;
    m.add_function(wrap_pyfunction!(f_quotient_min, m)?)?;
    m.add_function(wrap_pyfunction!(s_inf_below_coeff, m)?)?;
    m.add_function(wrap_pyfunction!(s_inf_above_coeff, m)?)?;
    m.add_function(wrap_pyfunction!(above_graphon_coeff, m)?)?;
    m.add_function(wrap_pyfunction!(s_inf_perturbed, m)?)?;
    m.add_function(wrap_pyfunction!(region_classify, m)?)?;
    m.add_function(wrap_pyfunction!(curve_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(solve_microcanonical, m)?)?;
    m.add_function(wrap_pyfunction!(graphon_summary, m)?)?;
    m.add_function(wrap_pyfunction!(prop_above_graphon, m)?)?;
    m.add_function(wrap_pyfunction!(scallop_graphon, m)?)?;
    m.add_function(wrap_pyfunction!(count_constrained, m)?)?;
    m.add_function(wrap_pyfunction!(partition_exact, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_theta_exact, m)?)?;
    m.add_function(wrap_pyfunction!(relative_entropy_exact, m)?)?;
    m.add_function(wrap_pyfunction!(mcmc_sample, m)?)?;
    Ok(())
}
