use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use super::{check_cap, check_len, with_real_fft_buffers, DenseForm, DenseMatrix, LinearOperator};
use crate::error::{Error, Result};

/// Symmetric Toeplitz matrix with entry (i, j) = `first_col[|i - j|]`.
///
/// Products embed the matrix in a symmetric circulant of size P, the next
/// power of two ≥ 2n, with first column
/// `(t_0, …, t_{n-1}, 0, …, 0, t_{n-1}, …, t_1)`: entries P-n+1..P-1 hold the
/// mirrored tail and the gap in between is zero. Since the circulant is real
/// symmetric its spectrum is real. Single products use real-input
/// transforms; pairs of real vectors share one complex FFT pair.
#[derive(Clone)]
pub struct SymToeplitz {
    col: Vec<f64>,
    embed_len: usize,
    /// Embedding spectrum divided by `embed_len`.
    spectrum: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
}

impl SymToeplitz {
    pub fn new(first_col: Vec<f64>) -> Result<Self> {
        if first_col.is_empty() {
            return Err(Error::InvalidParameter("Toeplitz symbol must be non-empty".into()));
        }
        let n = first_col.len();
        let embed_len = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(embed_len);
        let inv = planner.plan_fft_inverse(embed_len);

        let mut buf = vec![Complex64::new(0.0, 0.0); embed_len];
        buf[0].re = first_col[0];
        for k in 1..n {
            buf[k].re = first_col[k];
            buf[embed_len - k].re = first_col[k];
        }
        fwd.process(&mut buf);
        let scale = 1.0 / embed_len as f64;
        let spectrum = buf.iter().map(|z| z.re * scale).collect();
        let mut real_planner = RealFftPlanner::new();
        Ok(Self {
            col: first_col,
            embed_len,
            spectrum,
            fwd,
            inv,
            r2c: real_planner.plan_fft_forward(embed_len),
            c2r: real_planner.plan_fft_inverse(embed_len),
        })
    }

    /// Toeplitz part of the Riesz stencil: `g_0 … g_{n-1}`.
    pub fn from_stencil(stencil: &crate::riesz::RieszStencil, n: usize) -> Result<Self> {
        if stencil.max_offset() + 1 < n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: stencil.max_offset() + 1,
            });
        }
        Self::new(stencil.coeffs()[..n].to_vec())
    }

    pub fn size(&self) -> usize {
        self.col.len()
    }

    pub fn first_col(&self) -> &[f64] {
        &self.col
    }

    pub fn embedding_len(&self) -> usize {
        self.embed_len
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.col[i.abs_diff(j)]
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.size(), v.len())?;
        let mut out = vec![0.0; v.len()];
        self.matvec_into(v, &mut out);
        Ok(out)
    }

    pub(crate) fn matvec_into(&self, v: &[f64], out: &mut [f64]) {
        let half = self.embed_len / 2 + 1;
        let scratch_len = self.r2c.get_scratch_len().max(self.c2r.get_scratch_len());
        with_real_fft_buffers(self.embed_len, half, scratch_len, |real, spec, scratch| {
            real[..v.len()].copy_from_slice(v);
            self.r2c
                .process_with_scratch(real, spec, scratch)
                .expect("buffers sized from the plan");
            for (z, &s) in spec.iter_mut().zip(&self.spectrum) {
                *z *= s;
            }
            spec[0].im = 0.0;
            spec[half - 1].im = 0.0;
            self.c2r
                .process_with_scratch(spec, real, scratch)
                .expect("buffers sized from the plan");
            out.copy_from_slice(&real[..out.len()]);
        });
    }

    /// `out1 += scale·T v1`, `out2 += scale·T v2` with one FFT pair.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn matvec_pair_acc(
        &self,
        v1: &[f64],
        v2: &[f64],
        scale: f64,
        out1: &mut [f64],
        out2: &mut [f64],
        buf: &mut [Complex64],
        scratch: &mut [Complex64],
    ) {
        let n = self.size();
        for (k, b) in buf.iter_mut().enumerate() {
            *b = if k < n {
                Complex64::new(v1[k], v2[k])
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        self.convolve(buf, scratch);
        for k in 0..n {
            out1[k] += scale * buf[k].re;
            out2[k] += scale * buf[k].im;
        }
    }

    pub(crate) fn scratch_len(&self) -> usize {
        self.fwd
            .get_inplace_scratch_len()
            .max(self.inv.get_inplace_scratch_len())
    }

    fn convolve(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.fwd.process_with_scratch(buf, scratch);
        for (b, &s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.inv.process_with_scratch(buf, scratch);
    }
}

impl fmt::Debug for SymToeplitz {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymToeplitz")
            .field("size", &self.size())
            .field("embed_len", &self.embed_len)
            .finish()
    }
}

impl LinearOperator for SymToeplitz {
    fn dim(&self) -> usize {
        self.size()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_into(x, y);
    }
}

impl DenseForm for SymToeplitz {
    fn to_dense(&self, cap: usize) -> Result<DenseMatrix> {
        let n = self.size();
        check_cap(n, cap)?;
        Ok(DenseMatrix::from_fn(n, |i, j| self.entry(i, j)))
    }
}

/// A = shift·I + scale·G, the 1D system matrix at one time level.
#[derive(Debug, Clone)]
pub struct ShiftedToeplitz1D {
    pub shift: f64,
    pub scale: f64,
    pub g: SymToeplitz,
}

impl ShiftedToeplitz1D {
    pub fn new(shift: f64, scale: f64, g: SymToeplitz) -> Self {
        Self { shift, scale, g }
    }
}

impl LinearOperator for ShiftedToeplitz1D {
    fn dim(&self) -> usize {
        self.g.size()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        if self.scale == 0.0 {
            for (yi, &xi) in y.iter_mut().zip(x) {
                *yi = self.shift * xi;
            }
            return;
        }
        self.g.matvec_into(x, y);
        for (yi, &xi) in y.iter_mut().zip(x) {
            *yi = self.shift * xi + self.scale * *yi;
        }
    }
}

impl DenseForm for ShiftedToeplitz1D {
    fn to_dense(&self, cap: usize) -> Result<DenseMatrix> {
        let n = self.g.size();
        check_cap(n, cap)?;
        Ok(DenseMatrix::from_fn(n, |i, j| {
            let diag = if i == j { self.shift } else { 0.0 };
            diag + self.scale * self.g.entry(i, j)
        }))
    }
}
