//! Time stepping for the 2D problem on (0, L₁) × (0, L₂) with homogeneous
//! Dirichlet data. Fields are stored x-fastest: node (i, j) sits at
//! `i + j·(M₁+1)` in a full grid and at `(i-1) + (j-1)·(M₁-1)` in the
//! interior vector.

use std::sync::Arc;

use crate::distorder::{build_quadrature, sigma_root, TemporalCoefficients, TemporalLadder, WeightFunction};
use crate::error::{Error, Result};
use crate::riesz::RieszStencil;
use crate::stepping::{history_sum, SolverSettings, SpaceFn2, SpaceTimeFn2, StepReport, StepSystem, Stopwatch};
use crate::structured::{check_len, BccbPrecond, CirculantKind, KronSum2D, Preconditioner, SymToeplitz};

#[derive(Clone)]
pub struct Problem2D {
    pub lengths: [f64; 2],
    pub final_time: f64,
    /// K₁ (x direction) and K₂ (y direction).
    pub diffusion: [f64; 2],
    /// β (x direction).
    pub beta: f64,
    /// γ (y direction).
    pub gamma: f64,
    pub weight: WeightFunction,
    pub source: SpaceTimeFn2,
    pub initial: SpaceFn2,
    pub exact: Option<SpaceTimeFn2>,
}

impl Problem2D {
    pub fn zero(beta: f64, gamma: f64, weight: WeightFunction) -> Self {
        Self {
            lengths: [1.0, 1.0],
            final_time: 1.0,
            diffusion: [1.0, 1.0],
            beta,
            gamma,
            weight,
            source: Arc::new(|_, _, _| 0.0),
            initial: Arc::new(|_, _| 0.0),
            exact: Some(Arc::new(|_, _, _| 0.0)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lengths[0] > 0.0 && self.lengths[1] > 0.0 && self.final_time > 0.0) {
            return Err(Error::InvalidParameter("domain lengths and final time must be positive".into()));
        }
        if !(self.diffusion[0] > 0.0 && self.diffusion[1] > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "diffusion coefficients must be positive, got {:?}",
                self.diffusion
            )));
        }
        for (name, v) in [("beta", self.beta), ("gamma", self.gamma)] {
            if !(v > 1.0 && v <= 2.0) {
                return Err(Error::InvalidParameter(format!("{name} must lie in (1, 2], got {v}")));
            }
        }
        Ok(())
    }
}

impl std::fmt::Debug for Problem2D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem2D")
            .field("lengths", &self.lengths)
            .field("final_time", &self.final_time)
            .field("diffusion", &self.diffusion)
            .field("beta", &self.beta)
            .field("gamma", &self.gamma)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization2D {
    /// Space intervals M₁ (x) and M₂ (y).
    pub space_steps: [usize; 2],
    pub time_steps: usize,
    pub half_count: usize,
    pub solver: SolverSettings,
}

impl Discretization2D {
    /// Uniform grid with M̃ intervals in both directions.
    pub fn square(space_steps: usize, time_steps: usize, half_count: usize) -> Self {
        Self {
            space_steps: [space_steps; 2],
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
        let [mx, my] = self.space_steps;
        if mx < 2 || my < 2 || self.time_steps < 1 || self.half_count < 1 {
            return Err(Error::InvalidParameter(format!(
                "need M1, M2 >= 2, N >= 1, J >= 1 (got {mx}, {my}, {}, {})",
                self.time_steps, self.half_count
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Solution2D {
    pub h: [f64; 2],
    pub tau: f64,
    pub sigma: f64,
    pub space_steps: [usize; 2],
    pub leading_coefficients: [f64; 2],
    /// Full grids u^0 … u^N, x-fastest, (M₁+1)(M₂+1) values each.
    pub history: Vec<Vec<f64>>,
    pub reports: Vec<StepReport>,
    pub solve_seconds: f64,
}

impl Solution2D {
    pub fn final_field(&self) -> &[f64] {
        self.history.last().expect("history always holds u^0")
    }

    pub fn average_iterations(&self) -> f64 {
        if self.reports.is_empty() {
            return 0.0;
        }
        self.reports.iter().map(|r| r.iterations as f64).sum::<f64>() / self.reports.len() as f64
    }

    pub fn value(&self, level: usize, i: usize, j: usize) -> f64 {
        self.history[level][i + j * (self.space_steps[0] + 1)]
    }
}

/// Interior entries of a full x-fastest grid with `mx`, `my` intervals.
pub fn interior_of(full: &[f64], mx: usize, my: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity((mx - 1) * (my - 1));
    for j in 1..my {
        out.extend_from_slice(&full[1 + j * (mx + 1)..mx + j * (mx + 1)]);
    }
    out
}

/// Full grid with zero boundary around an interior vector.
pub fn embed_interior(interior: &[f64], mx: usize, my: usize) -> Vec<f64> {
    let mut out = vec![0.0; (mx + 1) * (my + 1)];
    for j in 1..my {
        out[1 + j * (mx + 1)..mx + j * (mx + 1)].copy_from_slice(&interior[(j - 1) * (mx - 1)..j * (mx - 1)]);
    }
    out
}

/// b^{n-1} = -(1-σ)[K₁h₁^{-β} I⊗G_β + K₂h₂^{-γ} G_γ⊗I] u^{n-1} + memory + f^{n-1+σ}.
///
/// `coupling` supplies the Toeplitz factors (its shift and scales are
/// ignored), `scales` are K₁h₁^{-β} and K₂h₂^{-γ}.
pub fn assemble_rhs_2d(
    history: &[Vec<f64>],
    coeffs: &TemporalCoefficients,
    coupling: &KronSum2D,
    scales: [f64; 2],
    source: &[f64],
) -> Result<Vec<f64>> {
    let n = coeffs.level;
    let (nx, ny) = (coupling.nx(), coupling.ny());
    let (mx, my) = (nx + 1, ny + 1);
    check_len(nx * ny, source.len())?;
    if history.len() < n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: history.len(),
        });
    }
    for row in &history[..n] {
        check_len((mx + 1) * (my + 1), row.len())?;
    }
    let memory = interior_of(&history_sum(&history[..n], &coeffs.chat), mx, my);
    let previous = interior_of(&history[n - 1], mx, my);
    let mut rhs: Vec<f64> = memory.iter().zip(source).map(|(m, f)| m + f).collect();
    let c = -(1.0 - coeffs.sigma);
    coupling.add_coupling(&previous, &mut rhs, c * scales[0], c * scales[1]);
    Ok(rhs)
}

fn bccb_precond(op: &KronSum2D, kind: CirculantKind) -> Result<Box<dyn Preconditioner + Send + Sync>> {
    Ok(Box::new(BccbPrecond::from_operator(op, kind)?))
}

pub struct Setup2D {
    pub h: [f64; 2],
    pub tau: f64,
    pub sigma: f64,
    pub ladder: TemporalLadder,
    pub gx: SymToeplitz,
    pub gy: SymToeplitz,
    /// K₁h₁^{-β}, K₂h₂^{-γ}.
    pub scales: [f64; 2],
}

impl Setup2D {
    pub fn new(problem: &Problem2D, disc: &Discretization2D) -> Result<Self> {
        problem.validate()?;
        disc.validate()?;
        let [mx, my] = disc.space_steps;
        let h = [problem.lengths[0] / mx as f64, problem.lengths[1] / my as f64];
        let tau = problem.final_time / disc.time_steps as f64;
        let quad = build_quadrature(&problem.weight, disc.half_count)?;
        let sigma = sigma_root(&quad, tau)?;
        let ladder = TemporalLadder::new(&quad, tau, sigma, disc.time_steps)?;
        let gx = SymToeplitz::from_stencil(&RieszStencil::new(problem.beta, mx - 1)?, mx - 1)?;
        let gy = SymToeplitz::from_stencil(&RieszStencil::new(problem.gamma, my - 1)?, my - 1)?;
        let scales = [
            problem.diffusion[0] * h[0].powf(-problem.beta),
            problem.diffusion[1] * h[1].powf(-problem.gamma),
        ];
        Ok(Self {
            h,
            tau,
            sigma,
            ladder,
            gx,
            gy,
            scales,
        })
    }

    /// M^n at the given level.
    pub fn system(&self, level: usize) -> KronSum2D {
        KronSum2D::new(
            self.ladder.leading(level),
            self.sigma * self.scales[0],
            self.sigma * self.scales[1],
            self.gx.clone(),
            self.gy.clone(),
        )
    }

    pub fn preconditioner(&self, level: usize, kind: CirculantKind) -> Result<BccbPrecond> {
        BccbPrecond::from_operator(&self.system(level), kind)
    }
}

pub fn solve_2d(problem: &Problem2D, disc: &Discretization2D) -> Result<Solution2D> {
    let setup = Setup2D::new(problem, disc)?;
    let [mx, my] = disc.space_steps;
    let steps = disc.time_steps;
    let settings = disc.solver;
    let mut clock = Stopwatch::default();

    let build = |level: usize| StepSystem::new(setup.system(level), &settings, bccb_precond);
    let first = clock.time(|| build(1)).map_err(|e| step_error(1, e))?;
    let rest = if steps >= 2 {
        Some(clock.time(|| build(2)).map_err(|e| step_error(2, e))?)
    } else {
        None
    };

    let xs: Vec<f64> = (0..=mx).map(|i| i as f64 * setup.h[0]).collect();
    let ys: Vec<f64> = (0..=my).map(|j| j as f64 * setup.h[1]).collect();

    let mut u0 = vec![0.0; (mx + 1) * (my + 1)];
    for j in 1..my {
        for i in 1..mx {
            u0[i + j * (mx + 1)] = (problem.initial)(xs[i], ys[j]);
        }
    }
    let mut history = Vec::with_capacity(steps + 1);
    history.push(u0);

    let mut reports = Vec::with_capacity(steps);
    let mut source = vec![0.0; (mx - 1) * (my - 1)];
    for n in 1..=steps {
        let coeffs = setup.ladder.coefficients(n)?;
        let t = (n as f64 - 1.0 + setup.sigma) * setup.tau;
        for j in 1..my {
            for i in 1..mx {
                source[(i - 1) + (j - 1) * (mx - 1)] = (problem.source)(xs[i], ys[j], t);
            }
        }
        let system = if n == 1 { &first } else { rest.as_ref().expect("built when N >= 2") };
        let rhs = assemble_rhs_2d(&history, &coeffs, system.op(), setup.scales, &source)?;
        let (u, report) = clock
            .time(|| system.solve(&rhs, &settings, n))
            .map_err(|e| step_error(n, e))?;
        history.push(embed_interior(&u, mx, my));
        reports.push(report);
    }

    Ok(Solution2D {
        h: setup.h,
        tau: setup.tau,
        sigma: setup.sigma,
        space_steps: disc.space_steps,
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

/// max over all grid nodes and levels of |u(x_i, y_j, t_n) - u_{ij}^n|.
pub fn max_error_2d(solution: &Solution2D, exact: &dyn Fn(f64, f64, f64) -> f64) -> f64 {
    let [mx, my] = solution.space_steps;
    let mut err: f64 = 0.0;
    for (n, grid) in solution.history.iter().enumerate() {
        let t = n as f64 * solution.tau;
        for j in 0..=my {
            let y = j as f64 * solution.h[1];
            for i in 0..=mx {
                let x = i as f64 * solution.h[0];
                err = err.max((exact(x, y, t) - grid[i + j * (mx + 1)]).abs());
            }
        }
    }
    err
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_round_trip() {
        let (mx, my) = (4, 3);
        let interior: Vec<f64> = (0..(mx - 1) * (my - 1)).map(|v| v as f64 + 1.0).collect();
        let full = embed_interior(&interior, mx, my);
        assert_eq!(full.len(), 20);
        assert_eq!(full[1 + 5], 1.0);
        assert_eq!(full[3 + 2 * 5], 6.0);
        assert_eq!(full.iter().filter(|&&v| v != 0.0).count(), 6);
        assert_eq!(interior_of(&full, mx, my), interior);
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let p = Problem2D::zero(1.5, 1.7, WeightFunction::gamma_five_minus());
        for solver in [SolverSettings::cholesky(), SolverSettings::cg(), SolverSettings::pcg(CirculantKind::TChan)] {
            let s = solve_2d(&p, &Discretization2D::square(6, 3, 1).with_solver(solver)).unwrap();
            assert_eq!(s.history.len(), 4);
            assert!(s.history.iter().flatten().all(|&u| u == 0.0));
        }
    }

    #[test]
    fn solvers_agree() {
        let mut p = Problem2D::zero(1.4, 1.9, WeightFunction::constant(1.0));
        p.source = Arc::new(|x, y, t| (1.0 + t) * x * (1.0 - x) * y * (1.0 - y));
        p.initial = Arc::new(|x, y| x * y * (1.0 - x) * (1.0 - y));
        let mut d = Discretization2D::square(8, 4, 2);
        d.space_steps = [8, 6];
        let reference = solve_2d(&p, &d.with_solver(SolverSettings::cholesky())).unwrap();
        for kind in CirculantKind::ALL {
            let s = solve_2d(&p, &d.with_solver(SolverSettings::pcg(kind))).unwrap();
            let diff = reference
                .final_field()
                .iter()
                .zip(s.final_field())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(diff < 1e-10, "{kind}: {diff}");
        }
    }

    #[test]
    fn rejects_bad_orders() {
        let p = Problem2D::zero(1.5, 0.9, WeightFunction::constant(1.0));
        assert!(solve_2d(&p, &Discretization2D::square(4, 2, 1)).is_err());
    }
}
