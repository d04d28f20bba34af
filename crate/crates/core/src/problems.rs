//! Manufactured-solution problems with known exact solutions, and a small
//! registry so that the CLI and the Python bindings can look them up by name.
//!
//! Both examples use ω(α) = Γ(5-α) on the unit interval/square with unit
//! diffusion coefficients. Their exact solutions are
//!
//! ```text
//! u(x,t)   = t⁴ x³(1-x)³
//! u(x,y,t) = t⁴ x³(1-x)³ y³(1-y)³
//! ```
//!
//! and the sources follow from ∫₀¹ Γ(5-α) D_t^α t⁴ dα = 24t³(t-1)/ln t and
//! the Riesz derivative of the polynomial x³ - 3x⁴ + 3x⁵ - x⁶.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::distorder::WeightFunction;
use crate::error::{Error, Result};
use crate::scheme1d::Problem1D;
use crate::scheme2d::Problem2D;
use crate::special::gamma;

/// (t-1)/ln t with its continuous extensions at t = 1 and t → 0⁺.
pub fn log_ratio(t: f64) -> f64 {
    let d = t - 1.0;
    if d.abs() < 1e-6 {
        1.0 + d / 2.0 - d * d / 12.0
    } else if t < 1e-300 {
        0.0
    } else {
        d / t.ln()
    }
}

/// x³(1-x)³.
pub fn bump(x: f64) -> f64 {
    let v = x * (1.0 - x);
    v * v * v
}

/// -1/(2cos(βπ/2)).
pub fn riesz_constant(order: f64) -> f64 {
    -1.0 / (2.0 * (order * PI / 2.0).cos())
}

/// Σ_{k=1}^{4} s_k Γ(k+3)/Γ(k+3-β)[x^{k+2-β} + (1-x)^{k+2-β}] with
/// s = (1, -3, 3, -1): the two one-sided Riemann–Liouville derivatives of
/// x³(1-x)³ added together.
pub fn bump_two_sided_derivative(order: f64, x: f64) -> f64 {
    const SIGNS: [f64; 4] = [1.0, -3.0, 3.0, -1.0];
    let mut sum = 0.0;
    for (k, s) in (1..=4).zip(SIGNS) {
        let p = k as f64 + 2.0 - order;
        let ratio = gamma(k as f64 + 3.0) / gamma(k as f64 + 3.0 - order);
        sum += s * ratio * (x.powf(p) + (1.0 - x).powf(p));
    }
    sum
}

fn check_order(name: &str, order: f64) -> Result<()> {
    if order > 1.0 && order < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must lie in the open interval (1, 2) for the manufactured examples, got {order}"
        )))
    }
}

/// Parameters a registered constructor may read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    pub beta: f64,
    pub gamma: f64,
    pub final_time: f64,
    /// K (K₁ = K₂ in 2D).
    pub diffusion: f64,
    /// L (L₁ = L₂ in 2D).
    pub length: f64,
}

impl Default for ProblemParams {
    fn default() -> Self {
        Self {
            beta: 1.5,
            gamma: 1.5,
            final_time: 1.5,
            diffusion: 1.0,
            length: 1.0,
        }
    }
}

impl ProblemParams {
    /// The examples' exact solutions only hold for K = 1 on the unit domain.
    fn require_unit_domain(&self, name: &str) -> Result<()> {
        if self.diffusion != 1.0 || self.length != 1.0 {
            return Err(Error::InvalidParameter(format!(
                "{name} is defined for K = 1 and L = 1 only (got K = {}, L = {})",
                self.diffusion, self.length
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum ProblemPayload {
    OneD(Problem1D),
    TwoD(Problem2D),
}

#[derive(Debug, Clone)]
pub struct ManufacturedProblem {
    pub name: String,
    pub payload: ProblemPayload,
}

impl ManufacturedProblem {
    pub fn dimension(&self) -> usize {
        match self.payload {
            ProblemPayload::OneD(_) => 1,
            ProblemPayload::TwoD(_) => 2,
        }
    }

    pub fn as_1d(&self) -> Option<&Problem1D> {
        match &self.payload {
            ProblemPayload::OneD(p) => Some(p),
            ProblemPayload::TwoD(_) => None,
        }
    }

    pub fn as_2d(&self) -> Option<&Problem2D> {
        match &self.payload {
            ProblemPayload::TwoD(p) => Some(p),
            ProblemPayload::OneD(_) => None,
        }
    }

    pub fn has_exact(&self) -> bool {
        match &self.payload {
            ProblemPayload::OneD(p) => p.exact.is_some(),
            ProblemPayload::TwoD(p) => p.exact.is_some(),
        }
    }

    pub fn set_final_time(&mut self, t: f64) {
        match &mut self.payload {
            ProblemPayload::OneD(p) => p.final_time = t,
            ProblemPayload::TwoD(p) => p.final_time = t,
        }
    }
}

pub fn example1(beta: f64) -> Result<ManufacturedProblem> {
    check_order("beta", beta)?;
    let c = riesz_constant(beta);
    let source = move |x: f64, t: f64| {
        let t3 = t * t * t;
        let f0 = 24.0 * t3 * log_ratio(t) * bump(x);
        f0 - c * t3 * t * bump_two_sided_derivative(beta, x)
    };
    let problem = Problem1D {
        length: 1.0,
        final_time: 1.5,
        diffusion: 1.0,
        beta,
        weight: WeightFunction::gamma_five_minus(),
        source: Arc::new(source),
        initial: Arc::new(|_| 0.0),
        exact: Some(Arc::new(|x, t| t.powi(4) * bump(x))),
    };
    Ok(ManufacturedProblem {
        name: "example1".into(),
        payload: ProblemPayload::OneD(problem),
    })
}

pub fn example2(beta: f64, gamma_order: f64) -> Result<ManufacturedProblem> {
    check_order("beta", beta)?;
    check_order("gamma", gamma_order)?;
    let c1 = riesz_constant(beta);
    let c2 = riesz_constant(gamma_order);
    let source = move |x: f64, y: f64, t: f64| {
        let t3 = t * t * t;
        let (bx, by) = (bump(x), bump(y));
        let f0 = 24.0 * t3 * log_ratio(t) * bx * by;
        f0 - c1 * t3 * t * by * bump_two_sided_derivative(beta, x)
            - c2 * t3 * t * bx * bump_two_sided_derivative(gamma_order, y)
    };
    let problem = Problem2D {
        lengths: [1.0, 1.0],
        final_time: 1.5,
        diffusion: [1.0, 1.0],
        beta,
        gamma: gamma_order,
        weight: WeightFunction::gamma_five_minus(),
        source: Arc::new(source),
        initial: Arc::new(|_, _| 0.0),
        exact: Some(Arc::new(|x, y, t| t.powi(4) * bump(x) * bump(y))),
    };
    Ok(ManufacturedProblem {
        name: "example2".into(),
        payload: ProblemPayload::TwoD(problem),
    })
}

pub type ProblemConstructor = Arc<dyn Fn(&ProblemParams) -> Result<ManufacturedProblem> + Send + Sync>;

/// Name → constructor map. [`Registry::default`] holds the built-in problems;
/// user problems are added with [`Registry::register`].
#[derive(Clone)]
pub struct Registry {
    entries: BTreeMap<String, ProblemConstructor>,
}

impl Registry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(
        &mut self,
        name: impl Into<String>,
        ctor: impl Fn(&ProblemParams) -> Result<ManufacturedProblem> + Send + Sync + 'static,
    ) {
        self.entries.insert(name.into(), Arc::new(ctor));
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }

    /// Builds the named problem; the final time from `params` is applied
    /// after construction.
    pub fn lookup(&self, name: &str, params: &ProblemParams) -> Result<ManufacturedProblem> {
        let ctor = self.entries.get(name).ok_or_else(|| Error::UnknownProblem {
            name: name.to_string(),
            available: self.names().join(", "),
        })?;
        let mut problem = ctor(params)?;
        problem.set_final_time(params.final_time);
        Ok(problem)
    }
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("example1", |p| {
            p.require_unit_domain("example1")?;
            example1(p.beta)
        });
        r.register("example2", |p| {
            p.require_unit_domain("example2")?;
            example2(p.beta, p.gamma)
        });
        r.register("zero1d", |p| {
            let mut q = Problem1D::zero(p.beta, WeightFunction::gamma_five_minus());
            q.diffusion = p.diffusion;
            q.length = p.length;
            Ok(ManufacturedProblem {
                name: "zero1d".into(),
                payload: ProblemPayload::OneD(q),
            })
        });
        r.register("zero2d", |p| {
            let mut q = Problem2D::zero(p.beta, p.gamma, WeightFunction::gamma_five_minus());
            q.diffusion = [p.diffusion; 2];
            q.lengths = [p.length; 2];
            Ok(ManufacturedProblem {
                name: "zero2d".into(),
                payload: ProblemPayload::TwoD(q),
            })
        });
        r
    }
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.keys()).finish()
    }
}

/// Looks `name` up in the built-in registry.
pub fn registry_lookup(name: &str, params: &ProblemParams) -> Result<ManufacturedProblem> {
    Registry::default().lookup(name, params)
}
