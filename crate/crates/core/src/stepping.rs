//! Pieces shared by the 1D and 2D time-stepping drivers: linear-solver
//! selection, per-step reports and the history (memory) term.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::krylov::{cg, default_max_iter, pcg, SolveReport, DEFAULT_TOLERANCE};
use crate::structured::{CholeskyFactor, CirculantKind, DenseForm, Identity, LinearOperator, Preconditioner, DEFAULT_DENSE_CAP};

pub type SpaceFn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SpaceFn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type SpaceTimeFn1 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type SpaceTimeFn2 = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Cholesky,
    Cg,
    Pcg,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Cholesky => "cholesky",
            SolverKind::Cg => "cg",
            SolverKind::Pcg => "pcg",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cholesky" | "chol" => Ok(SolverKind::Cholesky),
            "cg" => Ok(SolverKind::Cg),
            "pcg" => Ok(SolverKind::Pcg),
            other => Err(Error::InvalidParameter(format!(
                "unknown solver {other:?} (expected cholesky, cg or pcg)"
            ))),
        }
    }
}

/// Parses `strang`, `tchan`, `rchan` or `none`.
pub fn parse_precond(s: &str) -> Result<Option<CirculantKind>> {
    if s.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        s.parse().map(Some)
    }
}

/// How each time level's linear system is solved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub kind: SolverKind,
    /// Only used by PCG; `None` runs PCG with P = I.
    pub precond: Option<CirculantKind>,
    pub tol: f64,
    /// `None` means 10 × system size.
    pub max_iter: Option<usize>,
    pub dense_cap: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            kind: SolverKind::Pcg,
            precond: Some(CirculantKind::RChan),
            tol: DEFAULT_TOLERANCE,
            max_iter: None,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }
}

impl SolverSettings {
    pub fn cholesky() -> Self {
        Self {
            kind: SolverKind::Cholesky,
            precond: None,
            ..Self::default()
        }
    }

    pub fn cg() -> Self {
        Self {
            kind: SolverKind::Cg,
            precond: None,
            ..Self::default()
        }
    }

    pub fn pcg(precond: CirculantKind) -> Self {
        Self {
            kind: SolverKind::Pcg,
            precond: Some(precond),
            ..Self::default()
        }
    }

    /// Short method label: `cholesky`, `cg`, `pcg-rchan`, ...
    pub fn label(&self) -> String {
        match (self.kind, self.precond) {
            (SolverKind::Pcg, Some(p)) => format!("pcg-{p}"),
            (SolverKind::Pcg, None) => "pcg-none".to_string(),
            (k, _) => k.name().to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub level: usize,
    /// Zero for the direct solver.
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

pub(crate) enum Method {
    Cholesky(CholeskyFactor),
    Cg,
    Pcg(Box<dyn Preconditioner + Send + Sync>),
}

/// One assembled system matrix plus whatever its solver needs.
pub(crate) struct StepSystem<Op> {
    op: Op,
    method: Method,
}

impl<Op: LinearOperator + DenseForm> StepSystem<Op> {
    /// `make_precond` builds the circulant-type preconditioner for `op`.
    pub(crate) fn new(
        op: Op,
        settings: &SolverSettings,
        make_precond: impl FnOnce(&Op, CirculantKind) -> Result<Box<dyn Preconditioner + Send + Sync>>,
    ) -> Result<Self> {
        let method = match settings.kind {
            SolverKind::Cholesky => Method::Cholesky(op.to_dense(settings.dense_cap)?.cholesky()?),
            SolverKind::Cg => Method::Cg,
            SolverKind::Pcg => match settings.precond {
                Some(kind) => Method::Pcg(make_precond(&op, kind)?),
                None => Method::Pcg(Box::new(Identity(op.dim()))),
            },
        };
        Ok(Self { op, method })
    }

    pub(crate) fn op(&self) -> &Op {
        &self.op
    }

    pub(crate) fn solve(&self, rhs: &[f64], settings: &SolverSettings, level: usize) -> Result<(Vec<f64>, StepReport)> {
        let max_iter = settings.max_iter.unwrap_or_else(|| default_max_iter(self.op.dim()));
        let report = match &self.method {
            Method::Cholesky(f) => {
                let x = f.solve(rhs)?;
                return Ok((
                    x,
                    StepReport {
                        level,
                        iterations: 0,
                        relative_residual: 0.0,
                        converged: true,
                    },
                ));
            }
            Method::Cg => cg(&self.op, rhs, settings.tol, max_iter)?,
            Method::Pcg(p) => pcg(&self.op, p.as_ref(), rhs, settings.tol, max_iter)?,
        };
        let SolveReport {
            solution,
            iterations,
            final_relative_residual,
            converged,
        } = report;
        if !converged {
            return Err(Error::NotConverged {
                iterations,
                residual: final_relative_residual,
            });
        }
        Ok((
            solution,
            StepReport {
                level,
                iterations,
                relative_residual: final_relative_residual,
                converged,
            },
        ))
    }
}

/// Σ_{k=1}^{n-1} (ĉ_{k-1} - ĉ_k) u^{n-k} + ĉ_{n-1} u^0 over whole rows,
/// where n = chat.len() and `history` holds at least rows 0..n-1.
pub(crate) fn history_sum(history: &[Vec<f64>], chat: &[f64]) -> Vec<f64> {
    let n = chat.len();
    let width = history[0].len();
    let mut out = vec![0.0; width];
    for k in 1..n {
        let w = chat[k - 1] - chat[k];
        for (o, &u) in out.iter_mut().zip(&history[n - k]) {
            *o += w * u;
        }
    }
    let w = chat[n - 1];
    for (o, &u) in out.iter_mut().zip(&history[0]) {
        *o += w * u;
    }
    out
}

/// Accumulates wall time spent in linear algebra.
#[derive(Debug, Default)]
pub(crate) struct Stopwatch {
    seconds: f64,
}

impl Stopwatch {
    pub(crate) fn time<T>(&mut self, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.seconds += start.elapsed().as_secs_f64();
        out
    }

    pub(crate) fn seconds(&self) -> f64 {
        self.seconds
    }
}
