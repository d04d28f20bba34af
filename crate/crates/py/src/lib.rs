//! Python bindings for `fracdiff`.
//!
//! Vectors cross the boundary as Python lists of floats. Library errors
//! become `ValueError` when the inputs are at fault and `RuntimeError` when a
//! solve or factorization fails.

use fracdiff::cli::{cmd_converge, cmd_spectrum, run_error, run_solve, Axis, CliError, RunConfig, RunOutput};
use fracdiff::distorder::{build_quadrature, sigma_root, temporal_coeffs, DistributedOrderQuadrature, WeightFunction};
use fracdiff::krylov::{self, default_max_iter, SolveReport, DEFAULT_TOLERANCE};
use fracdiff::riesz::RieszStencil;
use fracdiff::stepping::{parse_precond, SolverKind};
use fracdiff::structured::{CirculantKind, CirculantOp, DenseForm, DenseMatrix, ShiftedToeplitz1D, SymToeplitz};
use fracdiff::Error;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::InvalidParameter(_)
        | Error::DimensionMismatch { .. }
        | Error::UnknownProblem { .. }
        | Error::CapExceeded { .. } => PyValueError::new_err(err.to_string()),
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

fn cli_to_py(err: CliError) -> PyErr {
    match err {
        CliError::Config(msg) => PyValueError::new_err(msg),
        CliError::Library(e) => to_py(e),
        CliError::Io(path, e) => PyOSError::new_err(format!("{}: {e}", path.display())),
    }
}

/// ω sampled at the 2J+1 trapezoid nodes; `None` means ω(α) = Γ(5-α).
fn quadrature_from(weight: Option<&Bound<'_, PyAny>>, half_count: usize) -> PyResult<DistributedOrderQuadrature> {
    match weight {
        None => build_quadrature(&WeightFunction::gamma_five_minus(), half_count).map_err(to_py),
        Some(f) => {
            let step = 1.0 / (2 * half_count.max(1)) as f64;
            let samples = (0..=2 * half_count)
                .map(|r| f.call1((r as f64 * step,))?.extract::<f64>())
                .collect::<PyResult<Vec<f64>>>()?;
            DistributedOrderQuadrature::from_samples(half_count, &samples).map_err(to_py)
        }
    }
}

fn dense_rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.size()).map(|i| m.row(i).to_vec()).collect()
}

fn parse_kind(name: &str) -> PyResult<CirculantKind> {
    name.parse().map_err(to_py)
}

/// Quadrature nodes α_r and weights λ_r = d_r ω(α_r) Δα.
#[pyfunction]
#[pyo3(signature = (half_count, weight=None))]
fn quadrature(half_count: usize, weight: Option<&Bound<'_, PyAny>>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let q = quadrature_from(weight, half_count)?;
    Ok((q.nodes().to_vec(), q.weights().to_vec()))
}

/// Root σ ∈ [1/2, 1] of F for time step `tau`.
#[pyfunction]
#[pyo3(signature = (half_count, tau, weight=None))]
fn sigma(half_count: usize, tau: f64, weight: Option<&Bound<'_, PyAny>>) -> PyResult<f64> {
    let q = quadrature_from(weight, half_count)?;
    sigma_root(&q, tau).map_err(to_py)
}

/// ĉ_0 … ĉ_{n-1} at time level `level`, with σ chosen as the root of F.
#[pyfunction]
#[pyo3(signature = (half_count, tau, level, weight=None))]
fn temporal_coefficients(
    half_count: usize,
    tau: f64,
    level: usize,
    weight: Option<&Bound<'_, PyAny>>,
) -> PyResult<Vec<f64>> {
    let q = quadrature_from(weight, half_count)?;
    let s = sigma_root(&q, tau).map_err(to_py)?;
    Ok(temporal_coeffs(&q, tau, s, level).map_err(to_py)?.chat)
}

/// g_0 … g_kmax of the fractional centred difference.
#[pyfunction]
fn riesz_stencil(beta: f64, kmax: usize) -> PyResult<Vec<f64>> {
    Ok(RieszStencil::new(beta, kmax).map_err(to_py)?.coeffs().to_vec())
}

/// Symmetric Toeplitz matrix with FFT products.
#[pyclass(name = "Toeplitz", module = "fracdiff_py")]
struct PyToeplitz {
    inner: SymToeplitz,
}

#[pymethods]
impl PyToeplitz {
    #[new]
    fn new(first_col: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: SymToeplitz::new(first_col).map_err(to_py)?,
        })
    }

    /// The Riesz matrix G of order `beta` with `n` rows.
    #[staticmethod]
    fn riesz(beta: f64, n: usize) -> PyResult<Self> {
        let stencil = RieszStencil::new(beta, n).map_err(to_py)?;
        Ok(Self {
            inner: SymToeplitz::from_stencil(&stencil, n).map_err(to_py)?,
        })
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    fn matvec(&self, v: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.matvec(&v).map_err(to_py)
    }

    #[pyo3(signature = (cap=4096))]
    fn to_dense(&self, cap: usize) -> PyResult<Vec<Vec<f64>>> {
        Ok(dense_rows(&self.inner.to_dense(cap).map_err(to_py)?))
    }

    fn __len__(&self) -> usize {
        self.inner.size()
    }

    fn __repr__(&self) -> String {
        format!("Toeplitz(size={})", self.inner.size())
    }
}

/// Circulant matrix diagonalized by the DFT.
#[pyclass(name = "Circulant", module = "fracdiff_py")]
struct PyCirculant {
    inner: CirculantOp,
}

#[pymethods]
impl PyCirculant {
    #[new]
    fn new(first_col: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: CirculantOp::new(first_col).map_err(to_py)?,
        })
    }

    /// Strang, T. Chan or R. Chan approximation of a Toeplitz matrix.
    #[staticmethod]
    fn approximate(kind: &str, toeplitz: PyRef<'_, PyToeplitz>) -> PyResult<Self> {
        Ok(Self {
            inner: parse_kind(kind)?.build(&toeplitz.inner).map_err(to_py)?,
        })
    }

    /// shift·I + scale·C.
    fn shifted(&self, shift: f64, scale: f64) -> Self {
        Self {
            inner: self.inner.shifted(shift, scale),
        }
    }

    #[getter]
    fn first_col(&self) -> Vec<f64> {
        self.inner.first_col().to_vec()
    }

    /// Real parts of the eigenvalues in FFT order.
    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues().iter().map(|e| e.re).collect()
    }

    fn matvec(&self, v: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.matvec(&v).map_err(to_py)
    }

    fn solve(&self, b: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.solve(&b).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.size()
    }

    fn __repr__(&self) -> String {
        format!("Circulant(size={})", self.inner.size())
    }
}

/// Result of a Krylov solve.
#[pyclass(name = "KrylovReport", module = "fracdiff_py", get_all)]
struct PyKrylovReport {
    solution: Vec<f64>,
    iterations: usize,
    relative_residual: f64,
    converged: bool,
}

impl From<SolveReport> for PyKrylovReport {
    fn from(r: SolveReport) -> Self {
        Self {
            solution: r.solution,
            iterations: r.iterations,
            relative_residual: r.final_relative_residual,
            converged: r.converged,
        }
    }
}

#[pymethods]
impl PyKrylovReport {
    fn __repr__(&self) -> String {
        format!(
            "KrylovReport(iterations={}, relative_residual={:e}, converged={})",
            self.iterations,
            self.relative_residual,
            if self.converged { "True" } else { "False" }
        )
    }
}

/// The 1D step matrix shift·I + scale·G.
#[pyclass(name = "StepOperator", module = "fracdiff_py")]
struct PyStepOperator {
    inner: ShiftedToeplitz1D,
}

#[pymethods]
impl PyStepOperator {
    #[new]
    fn new(shift: f64, scale: f64, toeplitz: PyRef<'_, PyToeplitz>) -> Self {
        Self {
            inner: ShiftedToeplitz1D::new(shift, scale, toeplitz.inner.clone()),
        }
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.g.size()
    }

    fn matvec(&self, v: Vec<f64>) -> PyResult<Vec<f64>> {
        use fracdiff::structured::LinearOperator;
        self.inner.apply(&v).map_err(to_py)
    }

    /// The circulant preconditioner shift·I + scale·C(G).
    fn preconditioner(&self, kind: &str) -> PyResult<PyCirculant> {
        let c = parse_kind(kind)?.build(&self.inner.g).map_err(to_py)?;
        Ok(PyCirculant {
            inner: c.shifted(self.inner.shift, self.inner.scale),
        })
    }

    /// CG when `precond` is "none", PCG otherwise.
    #[pyo3(signature = (b, precond="rchan", tol=DEFAULT_TOLERANCE, max_iter=None))]
    fn solve(&self, b: Vec<f64>, precond: &str, tol: f64, max_iter: Option<usize>) -> PyResult<PyKrylovReport> {
        let cap = max_iter.unwrap_or_else(|| default_max_iter(b.len()));
        let report = match parse_precond(precond).map_err(to_py)? {
            None => krylov::cg(&self.inner, &b, tol, cap),
            Some(kind) => {
                let c = kind
                    .build(&self.inner.g)
                    .map_err(to_py)?
                    .shifted(self.inner.shift, self.inner.scale);
                krylov::pcg(&self.inner, &c, &b, tol, cap)
            }
        };
        Ok(report.map_err(to_py)?.into())
    }

    /// Eigenvalues of the matrix, or of P⁻¹A when `precond` names a circulant.
    #[pyo3(signature = (precond=None, cap=4096))]
    fn spectrum(&self, precond: Option<&str>, cap: usize) -> PyResult<Vec<f64>> {
        let a = self.inner.to_dense(cap).map_err(to_py)?;
        match precond {
            None => krylov::spectrum(&a).map_err(to_py),
            Some(name) => {
                let p = self.preconditioner(name)?.inner.to_dense(cap).map_err(to_py)?;
                krylov::precond_spectrum(&a, &p).map_err(to_py)
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_config(
    problem: &str,
    beta: f64,
    gamma: Option<f64>,
    space_steps: usize,
    time_steps: usize,
    half_count: usize,
    solver: &str,
    precond: &str,
    final_time: f64,
) -> PyResult<RunConfig> {
    Ok(RunConfig {
        problem: problem.to_owned(),
        beta,
        gamma: gamma.unwrap_or(beta),
        final_time,
        space_steps,
        time_steps,
        half_count,
        solver: solver.parse::<SolverKind>().map_err(to_py)?,
        precond: parse_precond(precond).map_err(to_py)?,
        ..RunConfig::default()
    })
}

/// Solves a registered problem and returns a dict with `error` (None when
/// the problem has no exact solution), `sigma`, `average_iterations`,
/// `solve_seconds` and `final_field` (x-fastest in 2D, boundary included).
#[pyfunction]
#[pyo3(signature = (problem="example1", beta=1.5, gamma=None, M=64, N=64, J=10, solver="pcg", precond="rchan", T=1.5))]
#[allow(non_snake_case, clippy::too_many_arguments)]
fn solve<'py>(
    py: Python<'py>,
    problem: &str,
    beta: f64,
    gamma: Option<f64>,
    M: usize,
    N: usize,
    J: usize,
    solver: &str,
    precond: &str,
    T: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = run_config(problem, beta, gamma, M, N, J, solver, precond, T)?;
    let built = cfg.build_problem().map_err(cli_to_py)?;
    let output = py
        .detach(|| run_solve(&built, &cfg, cfg.solver_settings()))
        .map_err(cli_to_py)?;
    let error = if built.has_exact() {
        Some(run_error(&built, &output).map_err(cli_to_py)?)
    } else {
        None
    };
    let (sigma, field) = match &output {
        RunOutput::OneD(s) => (s.sigma, s.final_field().to_vec()),
        RunOutput::TwoD(s) => (s.sigma, s.final_field().to_vec()),
    };
    let out = PyDict::new(py);
    out.set_item("error", error)?;
    out.set_item("sigma", sigma)?;
    out.set_item("average_iterations", output.average_iterations())?;
    out.set_item("solve_seconds", output.solve_seconds())?;
    out.set_item("final_field", field)?;
    Ok(out)
}

/// Refinement study along `axis` ("space", "time" or "distorder"): a list of
/// (param, error, rate) with rate None on the first row.
#[pyfunction]
#[pyo3(signature = (problem="example1", axis="space", levels=2, beta=1.5, gamma=None, M=16, N=64, J=10, T=1.5))]
#[allow(non_snake_case, clippy::too_many_arguments)]
fn converge(
    py: Python<'_>,
    problem: &str,
    axis: &str,
    levels: usize,
    beta: f64,
    gamma: Option<f64>,
    M: usize,
    N: usize,
    J: usize,
    T: f64,
) -> PyResult<Vec<(usize, f64, Option<f64>)>> {
    let cfg = run_config(problem, beta, gamma, M, N, J, "pcg", "rchan", T)?;
    let axis: Axis = axis.parse().map_err(cli_to_py)?;
    let rows = py.detach(|| cmd_converge(&cfg, axis, levels)).map_err(cli_to_py)?;
    Ok(rows.into_iter().map(|r| (r.param, r.error, r.rate)).collect())
}

/// Eigenvalues of the step matrix at `level` and of its preconditioned form.
#[pyfunction]
#[pyo3(signature = (problem="example1", beta=1.8, gamma=None, M=128, N=128, J=50, precond="rchan", level=1, T=1.5))]
#[allow(non_snake_case, clippy::too_many_arguments)]
fn spectrum(
    problem: &str,
    beta: f64,
    gamma: Option<f64>,
    M: usize,
    N: usize,
    J: usize,
    precond: &str,
    level: usize,
    T: f64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let cfg = run_config(problem, beta, gamma, M, N, J, "pcg", precond, T)?;
    let dump = cmd_spectrum(&cfg, level).map_err(cli_to_py)?;
    Ok((dump.original, dump.preconditioned))
}

#[pymodule]
pub fn fracdiff_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(quadrature, m)?)?;
    m.add_function(wrap_pyfunction!(sigma, m)?)?;
    m.add_function(wrap_pyfunction!(temporal_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(riesz_stencil, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(converge, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_class::<PyToeplitz>()?;
    m.add_class::<PyCirculant>()?;
    m.add_class::<PyStepOperator>()?;
    m.add_class::<PyKrylovReport>()?;
    m.add("DEFAULT_TOLERANCE", DEFAULT_TOLERANCE)?;
    Ok(())
}
