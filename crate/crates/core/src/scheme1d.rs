//! Time stepping for the 1D problem
//!
//! ```text
//! ∫₀¹ ω(α) D_t^α u dα = K ∂^β u/∂|x|^β + f,   0 < x < L, 0 < t ≤ T,
//! u(0,t) = u(L,t) = 0,   u(x,0) = φ(x).
//! ```
//!
//! Level n solves A^n u^n = b^{n-1} with A^n = ĉ_0^{(n)} I + σKh^{-β} G.
//! Since ĉ_0^{(n)} takes one value at n = 1 and another for every n ≥ 2,
//! exactly two systems are assembled per run.

use std::sync::Arc;

use crate::distorder::{build_quadrature, sigma_root, TemporalCoefficients, TemporalLadder, WeightFunction};
use crate::error::{Error, Result};
use crate::riesz::RieszStencil;
use crate::stepping::{history_sum, SolverSettings, SpaceFn1, SpaceTimeFn1, StepReport, StepSystem, Stopwatch};
use crate::structured::{check_len, CirculantKind, CirculantOp, Preconditioner, ShiftedToeplitz1D, SymToeplitz};

#[derive(Clone)]
pub struct Problem1D {
    pub length: f64,
    pub final_time: f64,
    pub diffusion: f64,
    pub beta: f64,
    pub weight: WeightFunction,
    pub source: SpaceTimeFn1,
    pub initial: SpaceFn1,
    pub exact: Option<SpaceTimeFn1>,
}

impl Problem1D {
    /// f ≡ 0, φ ≡ 0, exact solution u ≡ 0.
    pub fn zero(beta: f64, weight: WeightFunction) -> Self {
        Self {
            length: 1.0,
            final_time: 1.0,
            diffusion: 1.0,
            beta,
            weight,
            source: Arc::new(|_, _| 0.0),
            initial: Arc::new(|_| 0.0),
            exact: Some(Arc::new(|_, _| 0.0)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) || !(self.final_time > 0.0) {
            return Err(Error::InvalidParameter("domain length and final time must be positive".into()));
        }
        if !(self.diffusion > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "diffusion coefficient must be positive, got {}",
                self.diffusion
            )));
        }
        if !(self.beta > 1.0 && self.beta <= 2.0) {
            return Err(Error::InvalidParameter(format!("beta must lie in (1, 2], got {}", self.beta)));
        }
        Ok(())
    }
}

impl std::fmt::Debug for Problem1D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem1D")
            .field("length", &self.length)
            .field("final_time", &self.final_time)
            .field("diffusion", &self.diffusion)
            .field("beta", &self.beta)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization1D {
    /// Space intervals M.
    pub space_steps: usize,
    /// Time steps N.
    pub time_steps: usize,
    /// Half the number of α intervals, J.
    pub half_count: usize,
    pub solver: SolverSettings,
}

impl Discretization1D {
    pub fn new(space_steps: usize, time_steps: usize, half_count: usize) -> Self {
        Self {
            space_steps,
            time_steps,
            half_count,
            solver: SolverSettings::default(),
        }
    }

    pub fn with_solver(mut self, solver: SolverSettings) -> Self {
        self.solver = solver;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.space_steps < 2 || self.time_steps < 1 || self.half_count < 1 {
            return Err(Error::InvalidParameter(format!(
                "need M >= 2, N >= 1, J >= 1 (got M = {}, N = {}, J = {})",
                self.space_steps, self.time_steps, self.half_count
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Solution1D {
    pub h: f64,
    pub tau: f64,
    pub sigma: f64,
    /// ĉ_0^{(1)} and ĉ_0^{(n≥2)}.
    pub leading_coefficients: [f64; 2],
    /// Rows u^0 … u^N, each of length M+1 including the boundary zeros.
    pub history: Vec<Vec<f64>>,
    pub reports: Vec<StepReport>,
    /// Wall time spent assembling solvers and solving the linear systems.
    pub solve_seconds: f64,
}

impl Solution1D {
    pub fn final_field(&self) -> &[f64] {
        self.history.last().expect("history always holds u^0")
    }

    pub fn average_iterations(&self) -> f64 {
        if self.reports.is_empty() {
            return 0.0;
        }
        self.reports.iter().map(|r| r.iterations as f64).sum::<f64>() / self.reports.len() as f64
    }
}

/// b^{n-1} = -(1-σ)Kh^{-β} G u^{n-1} + Σ_{k=1}^{n-1} (ĉ_{k-1} - ĉ_k) u^{n-k}
///           + ĉ_{n-1} u^0 + f^{n-1+σ}
///
/// `history` holds full rows u^0 … u^{n-1} (boundaries included);
/// `source` holds f at the interior nodes at t_{n-1+σ}.
pub fn assemble_rhs_1d(
    history: &[Vec<f64>],
    coeffs: &TemporalCoefficients,
    g: &SymToeplitz,
    diffusion: f64,
    h: f64,
    beta: f64,
    source: &[f64],
) -> Result<Vec<f64>> {
    let n = coeffs.level;
    let interior = g.size();
    check_len(interior, source.len())?;
    if history.len() < n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: history.len(),
        });
    }
    for row in &history[..n] {
        check_len(interior + 2, row.len())?;
    }
    let memory = history_sum(&history[..n], &coeffs.chat);
    let previous = &history[n - 1][1..=interior];
    let mut rhs = g.matvec(previous)?;
    let explicit = -(1.0 - coeffs.sigma) * diffusion * h.powf(-beta);
    for (i, r) in rhs.iter_mut().enumerate() {
        *r = explicit * *r + memory[i + 1] + source[i];
    }
    Ok(rhs)
}

type BoxedPrecond = Box<dyn Preconditioner + Send + Sync>;

fn shifted_circulant(op: &ShiftedToeplitz1D, kind: CirculantKind) -> Result<CirculantOp> {
    let c = kind.build(&op.g)?.shifted(op.shift, op.scale);
    c.check_nonsingular()?;
    Ok(c)
}

fn circulant_precond(op: &ShiftedToeplitz1D, kind: CirculantKind) -> Result<BoxedPrecond> {
    Ok(Box::new(shifted_circulant(op, kind)?))
}

/// Everything the time loop needs, built once per run.
pub struct Setup1D {
    pub h: f64,
    pub tau: f64,
    pub sigma: f64,
    pub ladder: TemporalLadder,
    pub g: SymToeplitz,
    pub nodes: Vec<f64>,
}

impl Setup1D {
    pub fn new(problem: &Problem1D, disc: &Discretization1D) -> Result<Self> {
        problem.validate()?;
        disc.validate()?;
        let m = disc.space_steps;
        let h = problem.length / m as f64;
        let tau = problem.final_time / disc.time_steps as f64;
        let quad = build_quadrature(&problem.weight, disc.half_count)?;
        let sigma = sigma_root(&quad, tau)?;
        let ladder = TemporalLadder::new(&quad, tau, sigma, disc.time_steps)?;
        let stencil = RieszStencil::new(problem.beta, m - 1)?;
        let g = SymToeplitz::from_stencil(&stencil, m - 1)?;
        let nodes = (0..=m).map(|i| i as f64 * h).collect();
        Ok(Self {
            h,
            tau,
            sigma,
            ladder,
            g,
            nodes,
        })
    }

    /// σKh^{-β}.
    pub fn implicit_scale(&self, problem: &Problem1D) -> f64 {
        self.sigma * problem.diffusion * self.h.powf(-problem.beta)
    }

    /// A^n at the given level.
    pub fn system(&self, problem: &Problem1D, level: usize) -> ShiftedToeplitz1D {
        ShiftedToeplitz1D::new(self.ladder.leading(level), self.implicit_scale(problem), self.g.clone())
    }

    /// The circulant-type preconditioner C^n matching [`Self::system`].
    pub fn preconditioner(
        &self,
        problem: &Problem1D,
        level: usize,
        kind: CirculantKind,
    ) -> Result<CirculantOp> {
        shifted_circulant(&self.system(problem, level), kind)
    }
}

pub fn solve_1d(problem: &Problem1D, disc: &Discretization1D) -> Result<Solution1D> {
    let setup = Setup1D::new(problem, disc)?;
    let m = disc.space_steps;
    let steps = disc.time_steps;
    let settings = disc.solver;
    let mut clock = Stopwatch::default();

    let build = |level: usize| -> Result<StepSystem<ShiftedToeplitz1D>> {
        StepSystem::new(setup.system(problem, level), &settings, circulant_precond)
    };
    let first = clock.time(|| build(1)).map_err(|e| step_error(1, e))?;
    let rest = if steps >= 2 {
        Some(clock.time(|| build(2)).map_err(|e| step_error(2, e))?)
    } else {
        None
    };

    let mut history = Vec::with_capacity(steps + 1);
    let mut u0 = vec![0.0; m + 1];
    for i in 1..m {
        u0[i] = (problem.initial)(setup.nodes[i]);
    }
    history.push(u0);

    let mut reports = Vec::with_capacity(steps);
    let mut source = vec![0.0; m - 1];
    for n in 1..=steps {
        let coeffs = setup.ladder.coefficients(n)?;
        let t = (n as f64 - 1.0 + setup.sigma) * setup.tau;
        for (i, f) in source.iter_mut().enumerate() {
            *f = (problem.source)(setup.nodes[i + 1], t);
        }
        let rhs = assemble_rhs_1d(&history, &coeffs, &setup.g, problem.diffusion, setup.h, problem.beta, &source)?;
        let system = if n == 1 { &first } else { rest.as_ref().expect("built when N >= 2") };
        let (u, report) = clock
            .time(|| system.solve(&rhs, &settings, n))
            .map_err(|e| step_error(n, e))?;
        let mut row = vec![0.0; m + 1];
        row[1..m].copy_from_slice(&u);
        history.push(row);
        reports.push(report);
    }

    Ok(Solution1D {
        h: setup.h,
        tau: setup.tau,
        sigma: setup.sigma,
        leading_coefficients: [setup.ladder.leading(1), setup.ladder.leading(2)],
        history,
        reports,
        solve_seconds: clock.seconds(),
    })
}

fn step_error(step: usize, source: Error) -> Error {
    Error::StepFailed {
        step,
        source: Box::new(source),
    }
}

/// max over all nodes and levels 0..N of |u(x_i, t_n) - u_i^n|.
pub fn max_error_1d(solution: &Solution1D, exact: &dyn Fn(f64, f64) -> f64) -> f64 {
    let mut err: f64 = 0.0;
    for (n, row) in solution.history.iter().enumerate() {
        let t = n as f64 * solution.tau;
        for (i, &u) in row.iter().enumerate() {
            let x = i as f64 * solution.h;
            err = err.max((exact(x, t) - u).abs());
        }
    }
    err
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_data_gives_zero_solution() {
        let p = Problem1D::zero(1.5, WeightFunction::gamma_five_minus());
        for solver in [SolverSettings::cholesky(), SolverSettings::cg(), SolverSettings::pcg(CirculantKind::RChan)] {
            let d = Discretization1D::new(16, 5, 2).with_solver(solver);
            let s = solve_1d(&p, &d).unwrap();
            assert!(s.history.iter().flatten().all(|&u| u == 0.0));
            assert_eq!(s.history.len(), 6);
        }
    }

    #[test]
    fn boundary_and_initial_rows_exact() {
        let mut p = Problem1D::zero(1.7, WeightFunction::constant(1.0));
        p.initial = Arc::new(|x| (std::f64::consts::PI * x).sin());
        p.source = Arc::new(|x, t| x * (1.0 - x) * (1.0 + t));
        let d = Discretization1D::new(10, 4, 1);
        let s = solve_1d(&p, &d).unwrap();
        for row in &s.history {
            assert_eq!(row[0], 0.0);
            assert_eq!(row[10], 0.0);
        }
        for i in 1..10 {
            assert_eq!(s.history[0][i], (std::f64::consts::PI * (i as f64 * 0.1)).sin());
        }
    }

    #[test]
    fn rhs_for_first_level() {
        let g = SymToeplitz::new(vec![2.0, -1.0, 0.0]).unwrap();
        let coeffs = TemporalCoefficients {
            sigma: 0.75,
            tau: 0.1,
            level: 1,
            chat: vec![3.0],
        };
        let u0 = vec![0.0, 1.0, 2.0, 1.0, 0.0];
        let f = [0.5, 0.5, 0.5];
        let h: f64 = 0.25;
        let rhs = assemble_rhs_1d(std::slice::from_ref(&u0), &coeffs, &g, 2.0, h, 2.0, &f).unwrap();
        let gu = [0.0, 2.0, 0.0];
        for i in 0..3 {
            let want = -0.25 * 2.0 * h.powf(-2.0) * gu[i] + 3.0 * u0[i + 1] + 0.5;
            assert!((rhs[i] - want).abs() < 1e-12, "{rhs:?}");
        }
    }

    #[test]
    fn rhs_zero_for_zero_data() {
        let g = SymToeplitz::new(vec![2.0, -0.5]).unwrap();
        let coeffs = TemporalCoefficients {
            sigma: 0.6,
            tau: 0.1,
            level: 3,
            chat: vec![3.0, 2.0, 1.0],
        };
        let hist = vec![vec![0.0; 4]; 3];
        assert_eq!(assemble_rhs_1d(&hist, &coeffs, &g, 1.0, 0.3, 1.5, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn rhs_rejects_short_history() {
        let g = SymToeplitz::new(vec![2.0, -0.5]).unwrap();
        let coeffs = TemporalCoefficients {
            sigma: 0.6,
            tau: 0.1,
            level: 3,
            chat: vec![3.0, 2.0, 1.0],
        };
        assert!(assemble_rhs_1d(&[vec![0.0; 4]], &coeffs, &g, 1.0, 0.3, 1.5, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn invalid_inputs_rejected() {
        let p = Problem1D::zero(2.5, WeightFunction::constant(1.0));
        assert!(solve_1d(&p, &Discretization1D::new(8, 2, 1)).is_err());
        let p = Problem1D::zero(1.5, WeightFunction::constant(1.0));
        assert!(solve_1d(&p, &Discretization1D::new(1, 2, 1)).is_err());
        assert!(solve_1d(&p, &Discretization1D::new(8, 0, 1)).is_err());
    }

    #[test]
    fn exact_match_has_zero_error_and_offset_is_measured() {
        let p = Problem1D::zero(1.5, WeightFunction::constant(1.0));
        let s = solve_1d(&p, &Discretization1D::new(8, 3, 1)).unwrap();
        assert_eq!(max_error_1d(&s, &|_, _| 0.0), 0.0);
        let c = 0.125;
        let err = max_error_1d(&s, &|x: f64, _| if x > 0.0 && x < 1.0 { c } else { 0.0 });
        assert_eq!(err, c);
    }
}
