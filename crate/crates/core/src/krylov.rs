//! Conjugate gradients, preconditioned conjugate gradients, and dense
//! symmetric spectra for clustering diagnostics.
//!
//! Both solvers start from the zero vector and stop once
//! ‖r_k‖₂ / ‖r_0‖₂ < tol on the unpreconditioned residual. One iteration is
//! one product with A.

use crate::error::{Error, Result};
use crate::structured::{check_len, DenseMatrix, Identity, LinearOperator, Preconditioner};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Sweep cap for the cyclic Jacobi eigensolver.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Stop once the off-diagonal Frobenius norm drops below this fraction of
/// the full Frobenius norm.
pub const JACOBI_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// ‖r_k‖₂/‖r_0‖₂ of the recursively updated residual.
    pub final_relative_residual: f64,
    pub converged: bool,
}

/// 10 × dimension.
pub fn default_max_iter(dim: usize) -> usize {
    10 * dim.max(1)
}

pub fn cg(a: &dyn LinearOperator, b: &[f64], tol: f64, max_iter: usize) -> Result<SolveReport> {
    let n = a.dim();
    check_len(n, b.len())?;
    let r0 = norm(b);
    if r0 == 0.0 {
        return Ok(zero_report(n));
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut q = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let mut rel = 1.0;
    for k in 1..=max_iter {
        a.apply_into(&p, &mut q);
        let curvature = dot(&p, &q);
        if !(curvature > 0.0) {
            return Err(Error::Breakdown { iteration: k, curvature });
        }
        let alpha = rr / curvature;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        let rr_new = dot(&r, &r);
        rel = rr_new.sqrt() / r0;
        if rel < tol {
            return Ok(SolveReport {
                solution: x,
                iterations: k,
                final_relative_residual: rel,
                converged: true,
            });
        }
        let beta = rr_new / rr;
        for (pi, &ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
    }
    Ok(SolveReport {
        solution: x,
        iterations: max_iter,
        final_relative_residual: rel,
        converged: false,
    })
}

pub fn pcg(
    a: &dyn LinearOperator,
    precond: &dyn Preconditioner,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    pcg_with_observer(a, precond, b, tol, max_iter, &mut |_, _| {})
}

/// PCG that hands every iterate x_k (k ≥ 1) to `observer`.
pub fn pcg_with_observer(
    a: &dyn LinearOperator,
    precond: &dyn Preconditioner,
    b: &[f64],
    tol: f64,
    max_iter: usize,
    observer: &mut dyn FnMut(usize, &[f64]),
) -> Result<SolveReport> {
    let n = a.dim();
    check_len(n, b.len())?;
    check_len(n, precond.dim())?;
    let r0 = norm(b);
    if r0 == 0.0 {
        return Ok(zero_report(n));
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precond.solve_into(&r, &mut z)?;
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut rel = 1.0;
    for k in 1..=max_iter {
        a.apply_into(&p, &mut q);
        let curvature = dot(&p, &q);
        if !(curvature > 0.0) {
            return Err(Error::Breakdown { iteration: k, curvature });
        }
        let alpha = rz / curvature;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        observer(k, &x);
        rel = norm(&r) / r0;
        if rel < tol {
            return Ok(SolveReport {
                solution: x,
                iterations: k,
                final_relative_residual: rel,
                converged: true,
            });
        }
        precond.solve_into(&r, &mut z)?;
        let rz_new = dot(&r, &z);
        if !(rz_new > 0.0) {
            // P is not positive definite on this residual.
            return Err(Error::Breakdown {
                iteration: k,
                curvature: rz_new,
            });
        }
        let beta = rz_new / rz;
        for (pi, &zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        rz = rz_new;
    }
    Ok(SolveReport {
        solution: x,
        iterations: max_iter,
        final_relative_residual: rel,
        converged: false,
    })
}

/// CG expressed through [`pcg`] with P = I.
pub fn pcg_identity(a: &dyn LinearOperator, b: &[f64], tol: f64, max_iter: usize) -> Result<SolveReport> {
    pcg(a, &Identity(a.dim()), b, tol, max_iter)
}

fn zero_report(n: usize) -> SolveReport {
    SolveReport {
        solution: vec![0.0; n],
        iterations: 0,
        final_relative_residual: 0.0,
        converged: true,
    }
}

/// Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations,
/// sorted ascending.
pub fn spectrum(a: &DenseMatrix) -> Result<Vec<f64>> {
    let n = a.size();
    let mut m: Vec<f64> = (0..n).flat_map(|i| a.row(i).to_vec()).collect();
    let frob = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let threshold = JACOBI_TOLERANCE * frob;
    let off_norm = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j] * m[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut off = off_norm(&m);
    let mut sweeps = 0;
    while off > threshold {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::JacobiNotConverged { sweeps, off });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
            }
        }
        sweeps += 1;
        off = off_norm(&m);
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Eigenvalues of P⁻¹A, computed as those of the similar symmetric matrix
/// L⁻¹AL⁻ᵀ with P = LLᵀ.
pub fn precond_spectrum(a: &DenseMatrix, p: &DenseMatrix) -> Result<Vec<f64>> {
    let n = a.size();
    check_len(n, p.size())?;
    let l = p.cholesky()?;
    // Y = L⁻¹A, stored by columns; A symmetric so column j is row j.
    let y_cols: Vec<Vec<f64>> = (0..n).map(|j| l.forward(a.row(j))).collect();
    // B = L⁻¹ Yᵀ; column j of Yᵀ is row j of Y.
    let mut b = DenseMatrix::zeros(n);
    for j in 0..n {
        let yt_col: Vec<f64> = (0..n).map(|k| y_cols[k][j]).collect();
        for (i, v) in l.forward(&yt_col).into_iter().enumerate() {
            b.set(i, j, v);
        }
    }
    let sym = DenseMatrix::from_fn(n, |i, j| 0.5 * (b.get(i, j) + b.get(j, i)));
    spectrum(&sym)
}

/// Fraction of `values` inside [lo, hi].
pub fn fraction_within(values: &[f64], lo: f64, hi: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|v| (lo..=hi).contains(*v)).count() as f64 / values.len() as f64
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_converges_in_one_step() {
        let b = [1.0, -2.0, 3.0];
        let rep = cg(&Identity(3), &b, DEFAULT_TOLERANCE, 30).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        assert_eq!(rep.solution, b.to_vec());
    }

    #[test]
    fn two_distinct_eigenvalues_terminate_in_two_steps() {
        let a = DenseMatrix::diag(&[1.0, 2.0]);
        let rep = cg(&a, &[0.7, -1.3], DEFAULT_TOLERANCE, 20).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 2);
        assert!((rep.solution[0] - 0.7).abs() < 1e-14);
        assert!((rep.solution[1] + 0.65).abs() < 1e-14);
    }

    #[test]
    fn zero_rhs_needs_no_iterations() {
        let rep = cg(&Identity(4), &[0.0; 4], 1e-12, 10).unwrap();
        assert_eq!(rep.iterations, 0);
        assert!(rep.converged);
    }

    #[test]
    fn indefinite_operator_breaks_down() {
        let a = DenseMatrix::diag(&[1.0, -1.0]);
        assert!(matches!(cg(&a, &[0.0, 1.0], 1e-12, 10), Err(Error::Breakdown { .. })));
    }

    #[test]
    fn non_convergence_is_reported_not_raised() {
        let a = DenseMatrix::diag(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let rep = cg(&a, &[1.0; 5], 1e-12, 2).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 2);
    }

    #[test]
    fn exact_preconditioner_converges_immediately() {
        let a = DenseMatrix::from_rows(&[vec![4.0, 1.0, 0.5], vec![1.0, 3.0, 0.2], vec![0.5, 0.2, 2.0]]).unwrap();
        let p = a.cholesky().unwrap();
        let rep = pcg(&a, &p, &[1.0, 2.0, 3.0], 1e-12, 10).unwrap();
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn jacobi_sorted_diagonal() {
        let eig = spectrum(&DenseMatrix::diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(eig, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn jacobi_two_by_two() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let eig = spectrum(&a).unwrap();
        assert!((eig[0] - 1.0).abs() < 1e-14 && (eig[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn preconditioning_by_itself_gives_unit_spectrum() {
        let a = DenseMatrix::from_fn(6, |i, j| if i == j { 4.0 } else { 1.0 / (1.0 + i.abs_diff(j) as f64) });
        for e in precond_spectrum(&a, &a).unwrap() {
            assert!((e - 1.0).abs() < 1e-12);
        }
    }
}
