//! Structured operators: symmetric Toeplitz, circulant, the 2D Kronecker sum
//! of Toeplitz factors and its block-circulant approximation. Products and
//! solves go through FFTs; [`DenseMatrix`] and [`CholeskyFactor`] serve as
//! reference paths.

mod circulant;
mod dense;
mod kron;
mod toeplitz;

pub use circulant::{circulant_rchan, circulant_strang, circulant_tchan, CirculantKind, CirculantOp};
pub use dense::{cholesky_solve, CholeskyFactor, DenseMatrix, DEFAULT_DENSE_CAP};
pub use kron::{BccbPrecond, KronSum2D};
pub use toeplitz::{ShiftedToeplitz1D, SymToeplitz};

use std::cell::RefCell;

use num_complex::Complex64;

use crate::error::{Error, Result};

thread_local! {
    static FFT_WORKSPACE: RefCell<Vec<Complex64>> = const { RefCell::new(Vec::new()) };
    static REAL_WORKSPACE: RefCell<Vec<f64>> = const { RefCell::new(Vec::new()) };
}

/// Runs `f` on a zeroed transform buffer of length `len` and a scratch
/// buffer, reusing per-thread storage across calls.
pub(crate) fn with_fft_buffers<R>(
    len: usize,
    scratch_len: usize,
    f: impl FnOnce(&mut [Complex64], &mut [Complex64]) -> R,
) -> R {
    let zero = Complex64::new(0.0, 0.0);
    FFT_WORKSPACE.with(|cell| match cell.try_borrow_mut() {
        Ok(mut store) => {
            store.clear();
            store.resize(len + scratch_len, zero);
            let (buf, scratch) = store.split_at_mut(len);
            f(buf, scratch)
        }
        Err(_) => f(&mut vec![zero; len], &mut vec![zero; scratch_len]),
    })
}

/// Like [`with_fft_buffers`] with an extra zeroed real buffer of length
/// `real_len` for real-to-complex transforms.
pub(crate) fn with_real_fft_buffers<R>(
    real_len: usize,
    len: usize,
    scratch_len: usize,
    f: impl FnOnce(&mut [f64], &mut [Complex64], &mut [Complex64]) -> R,
) -> R {
    REAL_WORKSPACE.with(|cell| match cell.try_borrow_mut() {
        Ok(mut store) => {
            store.clear();
            store.resize(real_len, 0.0);
            with_fft_buffers(len, scratch_len, |buf, scratch| f(&mut store, buf, scratch))
        }
        Err(_) => with_fft_buffers(len, scratch_len, |buf, scratch| f(&mut vec![0.0; real_len], buf, scratch)),
    })
}

/// A square linear map applied into a caller-provided buffer.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), x.len())?;
        let mut y = vec![0.0; x.len()];
        self.apply_into(x, &mut y);
        Ok(y)
    }
}

/// Approximate inverse z = P⁻¹ r used by preconditioned CG.
pub trait Preconditioner {
    fn dim(&self) -> usize;

    fn solve_into(&self, r: &[f64], z: &mut [f64]) -> Result<()>;
}

/// Explicit matrix form, for oracles and spectra.
pub trait DenseForm {
    fn to_dense(&self, cap: usize) -> Result<DenseMatrix>;
}

/// P = I.
#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
}

impl Preconditioner for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn solve_into(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        z.copy_from_slice(r);
        Ok(())
    }
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

pub(crate) fn check_cap(size: usize, cap: usize) -> Result<()> {
    if size > cap {
        Err(Error::CapExceeded { size, cap })
    } else {
        Ok(())
    }
}
