//! Distributed-order quadrature in α, the σ collocation point, and the
//! temporal coefficient ladder ĉ_k^{(n)}.
//!
//! The integral ∫₀¹ ω(α) D^α u dα is replaced by a composite trapezoid sum
//! over a uniform α-grid with 2J intervals, turning the problem into a
//! multi-term fractional equation with weights λ_r. The multi-term Caputo
//! sum is then collocated at t_{n-1+σ}, where σ ∈ [1/2, 1] is the root of
//! [`f_sigma`], giving a second-order approximation
//!
//! ```text
//! Σ_r λ_r D^{α_r} u(t_{n-1+σ}) ≈ Σ_{k=0}^{n-1} ĉ_k^{(n)} (u^{n-k} - u^{n-k-1}).
//! ```

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::special::{gamma, pow_step};

/// Bisection stops once the bracket is narrower than this.
pub const SIGMA_TOLERANCE: f64 = 1e-14;

/// Non-negative weight ω(α) on [0, 1].
#[derive(Clone)]
pub struct WeightFunction(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl WeightFunction {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    pub fn constant(value: f64) -> Self {
        Self::new(move |_| value)
    }

    /// ω(α) = Γ(5 - α), the weight of both manufactured examples.
    pub fn gamma_five_minus() -> Self {
        Self::new(|alpha| gamma(5.0 - alpha))
    }

    pub fn eval(&self, alpha: f64) -> f64 {
        (self.0)(alpha)
    }
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("WeightFunction(..)")
    }
}

/// Composite trapezoid rule on α_r = rΔα, r = 0..2J, Δα = 1/(2J).
#[derive(Debug, Clone, PartialEq)]
pub struct DistributedOrderQuadrature {
    half_count: usize,
    step: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl DistributedOrderQuadrature {
    /// Builds λ_r = d_r ω(α_r) Δα from weight samples at the 2J + 1 nodes.
    pub fn from_samples(half_count: usize, samples: &[f64]) -> Result<Self> {
        if half_count == 0 {
            return Err(Error::InvalidParameter("J must be at least 1".into()));
        }
        let intervals = 2 * half_count;
        if samples.len() != intervals + 1 {
            return Err(Error::DimensionMismatch {
                expected: intervals + 1,
                actual: samples.len(),
            });
        }
        let step = 1.0 / intervals as f64;
        let nodes: Vec<f64> = (0..=intervals).map(|r| r as f64 * step).collect();
        let mut weights = Vec::with_capacity(intervals + 1);
        for (r, &w) in samples.iter().enumerate() {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "weight function is {w} at alpha = {}",
                    nodes[r]
                )));
            }
            let d = if r == 0 || r == intervals { 0.5 } else { 1.0 };
            weights.push(d * w * step);
        }
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidParameter(
                "weight function vanishes at every quadrature node".into(),
            ));
        }
        Ok(Self {
            half_count,
            step,
            nodes,
            weights,
        })
    }

    /// A quadrature with arbitrary nodes in [0, 1] and positive weights.
    /// Used for single-term and hand-built multi-term equations.
    pub fn from_nodes(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: nodes.len().max(1),
                actual: weights.len(),
            });
        }
        if nodes.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::InvalidParameter("orders must lie in [0, 1]".into()));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("orders must be strictly increasing".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidParameter("weights must be non-negative with positive sum".into()));
        }
        let step = if nodes.len() > 1 { nodes[1] - nodes[0] } else { 0.0 };
        Ok(Self {
            half_count: 0,
            step,
            nodes,
            weights,
        })
    }

    /// J, or 0 for quadratures built with [`Self::from_nodes`].
    pub fn half_count(&self) -> usize {
        self.half_count
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn terms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

pub fn build_quadrature(weight: &WeightFunction, half_count: usize) -> Result<DistributedOrderQuadrature> {
    if half_count == 0 {
        return Err(Error::InvalidParameter("J must be at least 1".into()));
    }
    let intervals = 2 * half_count;
    let samples: Vec<f64> = (0..=intervals)
        .map(|r| weight.eval(r as f64 / intervals as f64))
        .collect();
    DistributedOrderQuadrature::from_samples(half_count, &samples)
}

/// F(σ) = Σ_r λ_r / Γ(3-α_r) · σ^{1-α_r} · (σ - (1 - α_r/2)) · τ^{2-α_r}.
pub fn f_sigma(quad: &DistributedOrderQuadrature, tau: f64, sigma: f64) -> f64 {
    quad.terms()
        .map(|(alpha, lambda)| {
            lambda / gamma(3.0 - alpha)
                * sigma.powf(1.0 - alpha)
                * (sigma - (1.0 - 0.5 * alpha))
                * tau.powf(2.0 - alpha)
        })
        .sum()
}

/// The unique root of F on [1/2, 1], by bisection.
pub fn sigma_root(quad: &DistributedOrderQuadrature, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {tau}")));
    }
    let (mut lo, mut hi) = (0.5, 1.0);
    let f_lo = f_sigma(quad, tau, lo);
    let f_hi = f_sigma(quad, tau, hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::NoSignChange { lo: f_lo, hi: f_hi });
    }
    while hi - lo > SIGMA_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let f_mid = f_sigma(quad, tau, mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// ĉ_0^{(n)} … ĉ_{n-1}^{(n)} at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalCoefficients {
    pub sigma: f64,
    pub tau: f64,
    pub level: usize,
    pub chat: Vec<f64>,
}

impl TemporalCoefficients {
    pub fn first(&self) -> f64 {
        self.chat[0]
    }

    pub fn last(&self) -> f64 {
        self.chat[self.chat.len() - 1]
    }
}

/// Which branch of the per-order coefficient formula an order falls into.
#[derive(Debug, Clone, Copy, PartialEq)]
enum OrderKind {
    /// α = 0: c_0 = σ, c_k = 1.
    Zero,
    /// α = 1: c_0 = 1, c_k = 0.
    One,
    General,
}

fn order_kind(alpha: f64) -> OrderKind {
    if alpha == 0.0 {
        OrderKind::Zero
    } else if alpha == 1.0 {
        OrderKind::One
    } else {
        OrderKind::General
    }
}

/// a_0 = σ^{1-α}; a_l = (l+σ)^{1-α} - (l-1+σ)^{1-α}.
fn a_coef(alpha: f64, sigma: f64, l: usize) -> f64 {
    if l == 0 {
        sigma.powf(1.0 - alpha)
    } else {
        pow_step(l as f64 - 1.0 + sigma, 1.0 - alpha)
    }
}

/// b_l = [(l+σ)^{2-α} - (l-1+σ)^{2-α}]/(2-α) - [(l+σ)^{1-α} + (l-1+σ)^{1-α}]/2,
/// i.e. minus the trapezoid defect of s^{1-α} over [l-1+σ, l+σ].
fn b_coef(alpha: f64, sigma: f64, l: usize) -> f64 {
    debug_assert!(l >= 1);
    let x = l as f64 - 1.0 + sigma;
    let p = 1.0 - alpha;
    if x >= 8.0 {
        // x^p Σ_{j≥2} C(p,j) (1-j)/(2(j+1)) x^{-j}
        let e = 1.0 / x;
        let mut binom = p * (p - 1.0) / 2.0;
        let mut e_pow = e * e;
        let mut sum = 0.0;
        for j in 2..60 {
            let jf = j as f64;
            let term = binom * (1.0 - jf) / (2.0 * (jf + 1.0)) * e_pow;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            binom *= (p - jf) / (jf + 1.0);
            e_pow *= e;
        }
        x.powf(p) * sum
    } else {
        pow_step(x, 2.0 - alpha) / (2.0 - alpha) - 0.5 * ((x + 1.0).powf(p) + x.powf(p))
    }
}

/// c_k^{(n,α)} for one order, k = 0..n-1.
fn order_coefficients(alpha: f64, sigma: f64, n: usize) -> Vec<f64> {
    match order_kind(alpha) {
        OrderKind::One => {
            let mut c = vec![0.0; n];
            c[0] = 1.0;
            c
        }
        OrderKind::Zero => {
            let mut c = vec![1.0; n];
            c[0] = sigma;
            c
        }
        OrderKind::General => {
            if n == 1 {
                return vec![a_coef(alpha, sigma, 0)];
            }
            let b: Vec<f64> = (0..=n).map(|l| if l == 0 { 0.0 } else { b_coef(alpha, sigma, l) }).collect();
            (0..n)
                .map(|k| {
                    let a = a_coef(alpha, sigma, k);
                    if k == 0 {
                        a + b[1]
                    } else if k == n - 1 {
                        a - b[k]
                    } else {
                        a + b[k + 1] - b[k]
                    }
                })
                .collect()
        }
    }
}

/// Per-order scale τ^{-α}/Γ(2-α).
fn order_scale(alpha: f64, tau: f64) -> f64 {
    tau.powf(-alpha) / gamma(2.0 - alpha)
}

/// Assembles ĉ_k^{(n)} = Σ_r λ_r τ^{-α_r}/Γ(2-α_r) c_k^{(n,α_r)} directly,
/// in O(n·m) work.
pub fn temporal_coeffs(
    quad: &DistributedOrderQuadrature,
    tau: f64,
    sigma: f64,
    level: usize,
) -> Result<TemporalCoefficients> {
    if level == 0 {
        return Err(Error::InvalidParameter("time level must be at least 1".into()));
    }
    let mut chat = vec![0.0; level];
    for (alpha, lambda) in quad.terms() {
        if lambda == 0.0 {
            continue;
        }
        let w = lambda * order_scale(alpha, tau);
        for (acc, c) in chat.iter_mut().zip(order_coefficients(alpha, sigma, level)) {
            *acc += w * c;
        }
    }
    Ok(TemporalCoefficients {
        sigma,
        tau,
        level,
        chat,
    })
}

/// Σ_r λ_r τ^{-α_r}/Γ(2-α_r) · (1-α_r)/2 · (n-1+σ)^{-α_r}, the strict lower
/// bound on ĉ_{n-1}^{(n)}.
pub fn last_coefficient_bound(quad: &DistributedOrderQuadrature, tau: f64, sigma: f64, level: usize) -> f64 {
    let t = level as f64 - 1.0 + sigma;
    quad.terms()
        .map(|(alpha, lambda)| lambda * order_scale(alpha, tau) * 0.5 * (1.0 - alpha) * t.powf(-alpha))
        .sum()
}

/// Cached λ-weighted sums of the a_l and b_l sequences, so that the ladder at
/// any level n ≤ `max_level` costs O(n).
///
/// For 1 ≤ k ≤ n-2 the per-order coefficient a_k + b_{k+1} - b_k does not
/// depend on n, so ĉ^{(n)} only differs between levels at k = 0 and k = n-1.
#[derive(Debug, Clone)]
pub struct TemporalLadder {
    sigma: f64,
    tau: f64,
    max_level: usize,
    a_sum: Vec<f64>,
    b_sum: Vec<f64>,
}

impl TemporalLadder {
    pub fn new(quad: &DistributedOrderQuadrature, tau: f64, sigma: f64, max_level: usize) -> Result<Self> {
        if max_level == 0 {
            return Err(Error::InvalidParameter("time level must be at least 1".into()));
        }
        let mut a_sum = vec![0.0; max_level];
        let mut b_sum = vec![0.0; max_level + 1];
        for (alpha, lambda) in quad.terms() {
            if lambda == 0.0 {
                continue;
            }
            let w = lambda * order_scale(alpha, tau);
            match order_kind(alpha) {
                OrderKind::One => a_sum[0] += w,
                OrderKind::Zero => {
                    a_sum[0] += w * sigma;
                    for a in &mut a_sum[1..] {
                        *a += w;
                    }
                }
                OrderKind::General => {
                    for (l, a) in a_sum.iter_mut().enumerate() {
                        *a += w * a_coef(alpha, sigma, l);
                    }
                    for (l, b) in b_sum.iter_mut().enumerate().skip(1) {
                        *b += w * b_coef(alpha, sigma, l);
                    }
                }
            }
        }
        Ok(Self {
            sigma,
            tau,
            max_level,
            a_sum,
            b_sum,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    /// ĉ_0^{(n)} without building the whole ladder.
    pub fn leading(&self, level: usize) -> f64 {
        if level <= 1 {
            self.a_sum[0]
        } else {
            self.a_sum[0] + self.b_sum[1]
        }
    }

    pub fn coefficients(&self, level: usize) -> Result<TemporalCoefficients> {
        if level == 0 || level > self.max_level {
            return Err(Error::InvalidParameter(format!(
                "time level {level} outside 1..={}",
                self.max_level
            )));
        }
        let n = level;
        let chat = if n == 1 {
            vec![self.a_sum[0]]
        } else {
            (0..n)
                .map(|k| {
                    if k == 0 {
                        self.a_sum[0] + self.b_sum[1]
                    } else if k == n - 1 {
                        self.a_sum[k] - self.b_sum[k]
                    } else {
                        self.a_sum[k] + self.b_sum[k + 1] - self.b_sum[k]
                    }
                })
                .collect()
        };
        Ok(TemporalCoefficients {
            sigma: self.sigma,
            tau: self.tau,
            level,
            chat,
        })
    }
}
