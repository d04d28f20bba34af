//! Fractional centred-difference coefficients for the Riesz derivative.
//!
//! ∂^β u/∂|x|^β (x_i) ≈ -h^{-β} Σ_k g_k u(x_{i-k}), with
//! g_k = (-1)^k Γ(β+1) / (Γ(β/2-k+1) Γ(β/2+k+1)) and g_{-k} = g_k.

use crate::error::{Error, Result};
use crate::special::gamma;

/// Symmetric half g_0 … g_K of the centred-difference stencil.
#[derive(Debug, Clone, PartialEq)]
pub struct RieszStencil {
    beta: f64,
    coeffs: Vec<f64>,
}

impl RieszStencil {
    /// g_0 from Γ(β+1)/Γ(β/2+1)², then g_k = (1 - (β+1)/(β/2+k)) g_{k-1}.
    pub fn new(beta: f64, max_offset: usize) -> Result<Self> {
        if !(beta > 1.0 && beta <= 2.0) {
            return Err(Error::InvalidParameter(format!("Riesz order must lie in (1, 2], got {beta}")));
        }
        if max_offset == 0 {
            return Err(Error::InvalidParameter("stencil needs at least one off-centre coefficient".into()));
        }
        let g0 = gamma(beta + 1.0) / gamma(0.5 * beta + 1.0).powi(2);
        let mut coeffs = Vec::with_capacity(max_offset + 1);
        coeffs.push(g0);
        for k in 1..=max_offset {
            let prev = coeffs[k - 1];
            coeffs.push((1.0 - (beta + 1.0) / (0.5 * beta + k as f64)) * prev);
        }
        Ok(Self { beta, coeffs })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// g_0 … g_K.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn max_offset(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// g_k for any signed offset with |k| ≤ K.
    pub fn get(&self, k: isize) -> f64 {
        self.coeffs[k.unsigned_abs()]
    }
}

pub fn build_stencil(beta: f64, max_offset: usize) -> Result<RieszStencil> {
    RieszStencil::new(beta, max_offset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_two_is_the_second_difference() {
        let s = build_stencil(2.0, 6).unwrap();
        assert!((s.coeffs()[0] - 2.0).abs() < 1e-14);
        assert!((s.coeffs()[1] + 1.0).abs() < 1e-14);
        for &g in &s.coeffs()[2..] {
            assert_eq!(g, 0.0);
        }
    }

    #[test]
    fn rejects_orders_outside_range() {
        for beta in [1.0, 0.5, 2.0001, f64::NAN] {
            assert!(build_stencil(beta, 4).is_err(), "beta = {beta}");
        }
        assert!(build_stencil(1.5, 0).is_err());
    }

    #[test]
    fn first_offset_is_negative() {
        for i in 1..=10 {
            let beta = 1.0 + 0.1 * i as f64;
            let s = build_stencil(beta, 1).unwrap();
            let expected = (1.0 - (beta + 1.0) / (beta / 2.0 + 1.0)) * s.coeffs()[0];
            assert_eq!(s.coeffs()[1], expected);
            assert!(s.coeffs()[1] < 0.0);
        }
    }

    #[test]
    fn symmetric_access() {
        let s = build_stencil(1.4, 5).unwrap();
        for k in 0..=5isize {
            assert_eq!(s.get(k), s.get(-k));
        }
    }
}
