//! Second-order finite difference schemes for time distributed-order,
//! Riesz space fractional diffusion equations in one and two space
//! dimensions, with FFT-based structured operators and circulant
//! preconditioned conjugate gradients.
//!
//! The distributed-order integral is discretized by the composite trapezoid
//! rule in α, each Caputo term by σ-point interpolation in time (with σ
//! chosen so that the scheme is second order), and the Riesz derivative by
//! fractional centred differences.
//!
//! ```no_run
//! use fracdiff::problems::example1;
//! use fracdiff::scheme1d::{solve_1d, max_error_1d, Discretization1D};
//!
//! let problem = example1(1.5).unwrap();
//! let p = problem.as_1d().unwrap();
//! let sol = solve_1d(p, &Discretization1D::new(64, 200, 10)).unwrap();
//! let err = max_error_1d(&sol, p.exact.as_deref().unwrap());
//! println!("max error {err:e}");
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod distorder;
pub mod error;
pub mod krylov;
pub mod problems;
pub mod riesz;
pub mod scheme1d;
pub mod scheme2d;
pub mod special;
pub mod stepping;
pub mod structured;

pub use error::{Error, Result};
