use num_complex::Complex64;

use super::{check_cap, check_len, CirculantKind, CirculantOp, DenseForm, DenseMatrix, LinearOperator, Preconditioner, SymToeplitz};
use crate::error::{Error, Result};

/// M = shift·I + scale_x·(I_y ⊗ G_x) + scale_y·(G_y ⊗ I_x) acting on fields
/// stored x-fastest: entry (i, j) lives at `i + j·nx`.
#[derive(Debug, Clone)]
pub struct KronSum2D {
    pub shift: f64,
    pub scale_x: f64,
    pub scale_y: f64,
    pub gx: SymToeplitz,
    pub gy: SymToeplitz,
}

impl KronSum2D {
    pub fn new(shift: f64, scale_x: f64, scale_y: f64, gx: SymToeplitz, gy: SymToeplitz) -> Self {
        Self {
            shift,
            scale_x,
            scale_y,
            gx,
            gy,
        }
    }

    pub fn nx(&self) -> usize {
        self.gx.size()
    }

    pub fn ny(&self) -> usize {
        self.gy.size()
    }

    pub fn entry(&self, p: usize, q: usize) -> f64 {
        let nx = self.nx();
        let (i, j) = (p % nx, p / nx);
        let (k, l) = (q % nx, q / nx);
        let mut v = 0.0;
        if p == q {
            v += self.shift;
        }
        if j == l {
            v += self.scale_x * self.gx.entry(i, k);
        }
        if i == k {
            v += self.scale_y * self.gy.entry(j, l);
        }
        v
    }

    /// `y += scale_x·(I ⊗ G_x) x + scale_y·(G_y ⊗ I) x`.
    pub(crate) fn add_coupling(&self, x: &[f64], y: &mut [f64], scale_x: f64, scale_y: f64) {
        let (nx, ny) = (self.nx(), self.ny());
        if scale_x != 0.0 {
            let mut buf = vec![Complex64::new(0.0, 0.0); self.gx.embedding_len()];
            let mut scratch = vec![Complex64::new(0.0, 0.0); self.gx.scratch_len()];
            let zeros = vec![0.0; nx];
            let mut sink = vec![0.0; nx];
            let mut j = 0;
            while j < ny {
                let line1 = &x[j * nx..(j + 1) * nx];
                if j + 1 < ny {
                    let line2 = &x[(j + 1) * nx..(j + 2) * nx];
                    let (head, tail) = y.split_at_mut((j + 1) * nx);
                    self.gx.matvec_pair_acc(
                        line1,
                        line2,
                        scale_x,
                        &mut head[j * nx..],
                        &mut tail[..nx],
                        &mut buf,
                        &mut scratch,
                    );
                } else {
                    self.gx.matvec_pair_acc(
                        line1,
                        &zeros,
                        scale_x,
                        &mut y[j * nx..(j + 1) * nx],
                        &mut sink,
                        &mut buf,
                        &mut scratch,
                    );
                }
                j += 2;
            }
        }
        if scale_y != 0.0 {
            let mut buf = vec![Complex64::new(0.0, 0.0); self.gy.embedding_len()];
            let mut scratch = vec![Complex64::new(0.0, 0.0); self.gy.scratch_len()];
            let mut v1 = vec![0.0; ny];
            let mut v2 = vec![0.0; ny];
            let mut o1 = vec![0.0; ny];
            let mut o2 = vec![0.0; ny];
            let mut i = 0;
            while i < nx {
                let paired = i + 1 < nx;
                for j in 0..ny {
                    v1[j] = x[i + j * nx];
                    v2[j] = if paired { x[i + 1 + j * nx] } else { 0.0 };
                }
                o1.fill(0.0);
                o2.fill(0.0);
                self.gy
                    .matvec_pair_acc(&v1, &v2, scale_y, &mut o1, &mut o2, &mut buf, &mut scratch);
                for j in 0..ny {
                    y[i + j * nx] += o1[j];
                    if paired {
                        y[i + 1 + j * nx] += o2[j];
                    }
                }
                i += 2;
            }
        }
    }
}

impl LinearOperator for KronSum2D {
    fn dim(&self) -> usize {
        self.nx() * self.ny()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (yi, &xi) in y.iter_mut().zip(x) {
            *yi = self.shift * xi;
        }
        self.add_coupling(x, y, self.scale_x, self.scale_y);
    }
}

impl DenseForm for KronSum2D {
    fn to_dense(&self, cap: usize) -> Result<DenseMatrix> {
        let n = self.dim();
        check_cap(n, cap)?;
        Ok(DenseMatrix::from_fn(n, |p, q| self.entry(p, q)))
    }
}

/// Level-2 circulant preconditioner
/// C = shift·I + scale_x·(I ⊗ c(G_x)) + scale_y·(c(G_y) ⊗ I),
/// diagonalized by the 2D DFT with eigenvalues
/// shift + scale_x·e_x(j) + scale_y·e_y(k).
#[derive(Debug, Clone)]
pub struct BccbPrecond {
    pub shift: f64,
    pub scale_x: f64,
    pub scale_y: f64,
    cx: CirculantOp,
    cy: CirculantOp,
    /// x-fastest, same layout as the fields.
    eigen_grid: Vec<f64>,
}

impl BccbPrecond {
    pub fn new(shift: f64, scale_x: f64, scale_y: f64, cx: CirculantOp, cy: CirculantOp) -> Result<Self> {
        let (nx, ny) = (cx.size(), cy.size());
        let mut eigen_grid = Vec::with_capacity(nx * ny);
        for ey in cy.eigenvalues() {
            for ex in cx.eigenvalues() {
                eigen_grid.push(shift + scale_x * ex.re + scale_y * ey.re);
            }
        }
        let max = eigen_grid.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let min = eigen_grid.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        if !(min > 1e-14 * max) {
            return Err(Error::SingularPreconditioner { min, max });
        }
        Ok(Self {
            shift,
            scale_x,
            scale_y,
            cx,
            cy,
            eigen_grid,
        })
    }

    /// Substitutes the chosen circulant approximant of each Toeplitz factor.
    pub fn from_operator(op: &KronSum2D, kind: CirculantKind) -> Result<Self> {
        Self::new(op.shift, op.scale_x, op.scale_y, kind.build(&op.gx)?, kind.build(&op.gy)?)
    }

    pub fn nx(&self) -> usize {
        self.cx.size()
    }

    pub fn ny(&self) -> usize {
        self.cy.size()
    }

    pub fn eigen_grid(&self) -> &[f64] {
        &self.eigen_grid
    }

    pub fn entry(&self, p: usize, q: usize) -> f64 {
        let nx = self.nx();
        let (i, j) = (p % nx, p / nx);
        let (k, l) = (q % nx, q / nx);
        let mut v = 0.0;
        if p == q {
            v += self.shift;
        }
        if j == l {
            v += self.scale_x * self.cx.entry(i, k);
        }
        if i == k {
            v += self.scale_y * self.cy.entry(j, l);
        }
        v
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.nx() * self.ny(), v.len())?;
        Ok(self.diagonal_map(v, |z, e| z * e))
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len(self.nx() * self.ny(), b.len())?;
        Ok(self.diagonal_map(b, |z, e| z / e))
    }

    fn diagonal_map(&self, v: &[f64], op: impl Fn(Complex64, f64) -> Complex64) -> Vec<f64> {
        let (nx, ny) = (self.nx(), self.ny());
        let scratch_len = self.cx.scratch_len().max(self.cy.scratch_len());
        let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
        let mut rows: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        // rustfft transforms each consecutive chunk of the FFT length.
        self.cx.fft_forward().process_with_scratch(&mut rows, &mut scratch);
        let mut cols = transpose(&rows, nx, ny);
        self.cy.fft_forward().process_with_scratch(&mut cols, &mut scratch);
        // cols is y-fastest: entry (i, j) at j + i·ny.
        for i in 0..nx {
            for j in 0..ny {
                let z = &mut cols[j + i * ny];
                *z = op(*z, self.eigen_grid[i + j * nx]);
            }
        }
        self.cy.fft_inverse().process_with_scratch(&mut cols, &mut scratch);
        let mut rows = transpose(&cols, ny, nx);
        self.cx.fft_inverse().process_with_scratch(&mut rows, &mut scratch);
        let scale = 1.0 / (nx * ny) as f64;
        rows.iter().map(|z| z.re * scale).collect()
    }
}

/// `src` is `inner`-fastest with `outer` chunks; returns `outer`-fastest.
fn transpose(src: &[Complex64], inner: usize, outer: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
    for o in 0..outer {
        for i in 0..inner {
            out[o + i * outer] = src[i + o * inner];
        }
    }
    out
}

impl Preconditioner for BccbPrecond {
    fn dim(&self) -> usize {
        self.nx() * self.ny()
    }

    fn solve_into(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        z.copy_from_slice(&self.diagonal_map(r, |a, e| a / e));
        Ok(())
    }
}

impl LinearOperator for BccbPrecond {
    fn dim(&self) -> usize {
        self.nx() * self.ny()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&self.diagonal_map(x, |a, e| a * e));
    }
}

impl DenseForm for BccbPrecond {
    fn to_dense(&self, cap: usize) -> Result<DenseMatrix> {
        let n = self.nx() * self.ny();
        check_cap(n, cap)?;
        Ok(DenseMatrix::from_fn(n, |p, q| self.entry(p, q)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toeplitz(col: &[f64]) -> SymToeplitz {
        SymToeplitz::new(col.to_vec()).unwrap()
    }

    #[test]
    fn zero_scales_reduce_to_shift() {
        let op = KronSum2D::new(3.0, 0.0, 0.0, toeplitz(&[2.0, -1.0, 0.0]), toeplitz(&[2.0, -1.0]));
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(op.apply(&x).unwrap(), x.iter().map(|v| 3.0 * v).collect::<Vec<_>>());

        let p = BccbPrecond::from_operator(&op, CirculantKind::RChan).unwrap();
        let z = p.solve(&x).unwrap();
        for (a, b) in z.iter().zip(&x) {
            assert!((a - b / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn identity_y_factor_gives_batched_lines() {
        let gx = toeplitz(&[2.0, -1.0, 0.25, 0.1]);
        let op = KronSum2D::new(0.5, 1.5, 0.0, gx.clone(), toeplitz(&[1.0, 0.0, 0.0]));
        let x: Vec<f64> = (0..12).map(|k| (k as f64 * 0.37).sin()).collect();
        let y = op.apply(&x).unwrap();
        for j in 0..3 {
            let line = &x[j * 4..(j + 1) * 4];
            let gl = gx.matvec(line).unwrap();
            for i in 0..4 {
                let want = 0.5 * line[i] + 1.5 * gl[i];
                assert!((y[i + j * 4] - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn singular_grid_rejected() {
        let cx = CirculantOp::new(vec![2.0, -1.0, 0.0, -1.0]).unwrap();
        let cy = CirculantOp::new(vec![2.0, -1.0, -1.0]).unwrap();
        assert!(matches!(
            BccbPrecond::new(0.0, 1.0, 1.0, cx, cy),
            Err(Error::SingularPreconditioner { .. })
        ));
    }
}
