use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use super::{check_cap, with_fft_buffers, with_real_fft_buffers, check_len, DenseForm, DenseMatrix, LinearOperator, Preconditioner, SymToeplitz};
use crate::error::{Error, Result};

/// Relative threshold below which an eigenvalue counts as zero.
const SINGULAR_RTOL: f64 = 1e-14;

/// Circulant matrix given by its first column, diagonalized by the DFT.
#[derive(Clone)]
pub struct CirculantOp {
    col: Vec<f64>,
    eigenvalues: Vec<Complex64>,
    /// Smallest and largest eigenvalue modulus.
    bounds: (f64, f64),
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Power-of-two plans for lengths that are not powers of two.
    padded: Option<PaddedPlans>,
    /// Half spectrum of the inverse's first column on the padded grid,
    /// divided by the padded length.
    inverse_kernel: Option<Vec<Complex64>>,
}

/// Transforms of length ≥ 2n-1, enough to form a length-n cyclic
/// convolution from a linear one.
#[derive(Clone)]
struct PaddedPlans {
    len: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
}

impl CirculantOp {
    pub fn new(first_col: Vec<f64>) -> Result<Self> {
        if first_col.is_empty() {
            return Err(Error::InvalidParameter("circulant column must be non-empty".into()));
        }
        let n = first_col.len();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut eigenvalues: Vec<Complex64> = first_col.iter().map(|&c| Complex64::new(c, 0.0)).collect();
        fwd.process(&mut eigenvalues);
        let padded = (!n.is_power_of_two()).then(|| {
            let len = (2 * n - 1).next_power_of_two();
            let mut real_planner = RealFftPlanner::new();
            PaddedPlans {
                len,
                r2c: real_planner.plan_fft_forward(len),
                c2r: real_planner.plan_fft_inverse(len),
            }
        });
        Ok(Self {
            col: first_col,
            bounds: modulus_bounds(&eigenvalues),
            eigenvalues,
            fwd,
            inv,
            padded,
            inverse_kernel: None,
        }
        .with_inverse_kernel())
    }

    /// Precomputes C⁻¹'s first column on the padded grid so that solves
    /// avoid transforms of awkward length.
    fn with_inverse_kernel(mut self) -> Self {
        let Some(plans) = &self.padded else {
            return self;
        };
        if self.check_nonsingular().is_err() {
            return self;
        }
        let n = self.size();
        let mut col: Vec<Complex64> = self.eigenvalues.iter().map(|e| e.inv()).collect();
        self.inv.process(&mut col);
        let scale = 1.0 / (n * plans.len) as f64;
        let mut real = plans.r2c.make_input_vec();
        for (r, c) in real.iter_mut().zip(&col) {
            *r = c.re * scale;
        }
        let mut kernel = plans.r2c.make_output_vec();
        plans
            .r2c
            .process(&mut real, &mut kernel)
            .expect("buffers sized from the plan");
        self.inverse_kernel = Some(kernel);
        self
    }

    pub fn size(&self) -> usize {
        self.col.len()
    }

    pub fn first_col(&self) -> &[f64] {
        &self.col
    }

    /// DFT of the first column, in FFT output order.
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let n = self.size();
        self.col[(i + n - j) % n]
    }

    /// shift·I + scale·C, reusing the FFT plans.
    pub fn shifted(&self, shift: f64, scale: f64) -> Self {
        let mut col: Vec<f64> = self.col.iter().map(|c| scale * c).collect();
        col[0] += shift;
        let eigenvalues: Vec<Complex64> = self.eigenvalues.iter().map(|&e| e * scale + shift).collect();
        Self {
            col,
            bounds: modulus_bounds(&eigenvalues),
            eigenvalues,
            fwd: Arc::clone(&self.fwd),
            inv: Arc::clone(&self.inv),
            padded: self.padded.clone(),
            inverse_kernel: None,
        }
        .with_inverse_kernel()
    }

    /// Error unless every eigenvalue is bounded away from zero relative to
    /// the largest one.
    pub fn check_nonsingular(&self) -> Result<()> {
        let (min, max) = self.bounds;
        if !(min >= SINGULAR_RTOL * max) || max == 0.0 {
            return Err(Error::SingularPreconditioner { min, max });
        }
        Ok(())
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.size(), v.len())?;
        Ok(self.diagonal_map(v, |z, e| z * e))
    }

    /// C⁻¹ b by forward DFT, pointwise division, inverse DFT.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len(self.size(), b.len())?;
        self.check_nonsingular()?;
        match (&self.padded, &self.inverse_kernel) {
            (Some(plans), Some(kernel)) => Ok(cyclic_convolve(plans, kernel, b)),
            _ => Ok(self.diagonal_map(b, |z, e| z / e)),
        }
    }

    fn diagonal_map(&self, v: &[f64], op: impl Fn(Complex64, Complex64) -> Complex64) -> Vec<f64> {
        let n = self.size();
        with_fft_buffers(n, self.scratch_len(), |buf, scratch| {
            for (b, &x) in buf.iter_mut().zip(v) {
                b.re = x;
            }
            self.fwd.process_with_scratch(buf, scratch);
            for (b, &e) in buf.iter_mut().zip(&self.eigenvalues) {
                *b = op(*b, e);
            }
            self.inv.process_with_scratch(buf, scratch);
            let scale = 1.0 / n as f64;
            buf.iter().map(|z| z.re * scale).collect()
        })
    }

    pub(crate) fn scratch_len(&self) -> usize {
        self.fwd
            .get_inplace_scratch_len()
            .max(self.inv.get_inplace_scratch_len())
    }

    pub(crate) fn fft_forward(&self) -> &Arc<dyn Fft<f64>> {
        &self.fwd
    }

    pub(crate) fn fft_inverse(&self) -> &Arc<dyn Fft<f64>> {
        &self.inv
    }
}

/// Length-n cyclic convolution of `v` with the kernel whose padded spectrum
/// is given: linear convolution on the padded grid, then wrap the tail.
fn cyclic_convolve(plans: &PaddedPlans, kernel: &[Complex64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let half = plans.len / 2 + 1;
    let scratch_len = plans.r2c.get_scratch_len().max(plans.c2r.get_scratch_len());
    with_real_fft_buffers(plans.len, half, scratch_len, |real, spec, scratch| {
        real[..n].copy_from_slice(v);
        plans
            .r2c
            .process_with_scratch(real, spec, scratch)
            .expect("buffers sized from the plan");
        for (z, k) in spec.iter_mut().zip(kernel) {
            *z *= k;
        }
        spec[0].im = 0.0;
        spec[half - 1].im = 0.0;
        plans
            .c2r
            .process_with_scratch(spec, real, scratch)
            .expect("buffers sized from the plan");
        (0..n)
            .map(|i| real[i] + if i + n < plans.len { real[i + n] } else { 0.0 })
            .collect()
    })
}

fn modulus_bounds(eigenvalues: &[Complex64]) -> (f64, f64) {
    eigenvalues
        .iter()
        .map(|e| e.norm())
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

impl fmt::Debug for CirculantOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CirculantOp").field("col", &self.col).finish()
    }
}

impl LinearOperator for CirculantOp {
    fn dim(&self) -> usize {
        self.size()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&self.diagonal_map(x, |z, e| z * e));
    }
}

impl Preconditioner for CirculantOp {
    fn dim(&self) -> usize {
        self.size()
    }

    fn solve_into(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        z.copy_from_slice(&self.solve(r)?);
        Ok(())
    }
}

impl DenseForm for CirculantOp {
    fn to_dense(&self, cap: usize) -> Result<DenseMatrix> {
        check_cap(self.size(), cap)?;
        Ok(DenseMatrix::from_fn(self.size(), |i, j| self.entry(i, j)))
    }
}

/// Circulant approximations of a symmetric Toeplitz matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CirculantKind {
    Strang,
    TChan,
    RChan,
}

impl CirculantKind {
    pub const ALL: [CirculantKind; 3] = [CirculantKind::Strang, CirculantKind::TChan, CirculantKind::RChan];

    pub fn build(self, t: &SymToeplitz) -> Result<CirculantOp> {
        match self {
            CirculantKind::Strang => circulant_strang(t),
            CirculantKind::TChan => circulant_tchan(t),
            CirculantKind::RChan => circulant_rchan(t),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CirculantKind::Strang => "strang",
            CirculantKind::TChan => "tchan",
            CirculantKind::RChan => "rchan",
        }
    }
}

impl fmt::Display for CirculantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CirculantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "strang" | "s" => Ok(CirculantKind::Strang),
            "tchan" | "t" => Ok(CirculantKind::TChan),
            "rchan" | "c" => Ok(CirculantKind::RChan),
            other => Err(Error::InvalidParameter(format!(
                "unknown circulant preconditioner {other:?} (expected strang, tchan or rchan)"
            ))),
        }
    }
}

fn symbol_for_circulant(t: &SymToeplitz) -> Result<&[f64]> {
    if t.size() < 2 {
        return Err(Error::InvalidParameter("circulant approximation needs size >= 2".into()));
    }
    Ok(t.first_col())
}

/// Strang: copy the central diagonals, s_k = g_k for k ≤ ⌊n/2⌋ and
/// s_k = g_{n-k} beyond, n being the matrix size.
pub fn circulant_strang(t: &SymToeplitz) -> Result<CirculantOp> {
    let g = symbol_for_circulant(t)?;
    let n = g.len();
    let half = n / 2;
    let col = (0..n).map(|k| if k <= half { g[k] } else { g[n - k] }).collect();
    CirculantOp::new(col)
}

/// T. Chan's optimal circulant (Frobenius-nearest):
/// c_k = ((n-k) g_k + k g_{n-k}) / n.
pub fn circulant_tchan(t: &SymToeplitz) -> Result<CirculantOp> {
    let g = symbol_for_circulant(t)?;
    let n = g.len();
    let nf = n as f64;
    let col = (0..n)
        .map(|k| {
            if k == 0 {
                g[0]
            } else {
                ((n - k) as f64 * g[k] + k as f64 * g[n - k]) / nf
            }
        })
        .collect();
    CirculantOp::new(col)
}

/// R. Chan: r_0 = g_0, r_k = g_k + g_{k-n} = g_k + g_{n-k}.
pub fn circulant_rchan(t: &SymToeplitz) -> Result<CirculantOp> {
    let g = symbol_for_circulant(t)?;
    let n = g.len();
    let col = (0..n).map(|k| if k == 0 { g[0] } else { g[k] + g[n - k] }).collect();
    CirculantOp::new(col)
}
