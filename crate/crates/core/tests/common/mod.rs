//! Independent reference implementations used by the integration tests.
//! Nothing here calls into the library's numerical kernels: Γ comes from
//! statrs, matrices are dense, and linear systems are solved by Gaussian
//! elimination with partial pivoting.

#![allow(dead_code)]

use statrs::function::gamma::gamma;

pub fn oracle_gamma(x: f64) -> f64 {
    gamma(x)
}

/// (nodes, λ) for the trapezoid rule with 2J intervals.
pub fn oracle_quadrature(weight: impl Fn(f64) -> f64, half_count: usize) -> (Vec<f64>, Vec<f64>) {
    let m = 2 * half_count;
    let step = 1.0 / m as f64;
    let mut nodes = Vec::new();
    let mut lambdas = Vec::new();
    for r in 0..=m {
        let a = r as f64 * step;
        let d = if r == 0 || r == m { 0.5 } else { 1.0 };
        nodes.push(a);
        lambdas.push(d * weight(a) * step);
    }
    (nodes, lambdas)
}

pub fn oracle_f(nodes: &[f64], lambdas: &[f64], tau: f64, s: f64) -> f64 {
    let mut total = 0.0;
    for (&a, &l) in nodes.iter().zip(lambdas) {
        total += l / gamma(3.0 - a) * s.powf(1.0 - a) * (s - 1.0 + a / 2.0) * tau.powf(2.0 - a);
    }
    total
}

/// Bisection to a bracket width of 1e-15.
pub fn oracle_sigma(nodes: &[f64], lambdas: &[f64], tau: f64) -> f64 {
    let (mut lo, mut hi) = (0.5f64, 1.0f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if oracle_f(nodes, lambdas, tau, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// ĉ_k^{(n)}, k = 0..n-1, straight from the a_l / b_l definitions.
pub fn oracle_chat(nodes: &[f64], lambdas: &[f64], tau: f64, s: f64, n: usize) -> Vec<f64> {
    let mut chat = vec![0.0; n];
    for (&a, &lam) in nodes.iter().zip(lambdas) {
        let w = lam * tau.powf(-a) / gamma(2.0 - a);
        let c: Vec<f64> = if a == 1.0 {
            (0..n).map(|k| if k == 0 { 1.0 } else { 0.0 }).collect()
        } else if a == 0.0 {
            (0..n).map(|k| if k == 0 { s } else { 1.0 }).collect()
        } else {
            let av = |l: usize| {
                let l = l as f64;
                if l == 0.0 {
                    s.powf(1.0 - a)
                } else {
                    (l + s).powf(1.0 - a) - (l - 1.0 + s).powf(1.0 - a)
                }
            };
            let bv = |l: usize| {
                let l = l as f64;
                ((l + s).powf(2.0 - a) - (l - 1.0 + s).powf(2.0 - a)) / (2.0 - a)
                    - 0.5 * ((l + s).powf(1.0 - a) + (l - 1.0 + s).powf(1.0 - a))
            };
            if n == 1 {
                vec![av(0)]
            } else {
                (0..n)
                    .map(|k| {
                        if k == 0 {
                            av(0) + bv(1)
                        } else if k == n - 1 {
                            av(k) - bv(k)
                        } else {
                            av(k) + bv(k + 1) - bv(k)
                        }
                    })
                    .collect()
            }
        };
        for (acc, ck) in chat.iter_mut().zip(c) {
            *acc += w * ck;
        }
    }
    chat
}

/// g_k = (-1)^k Γ(β+1) / (Γ(β/2-k+1) Γ(β/2+k+1)).
pub fn oracle_stencil(beta: f64, k: usize) -> f64 {
    let k = k as f64;
    let sign = if (k as usize).is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * gamma(beta + 1.0) / (gamma(beta / 2.0 - k + 1.0) * gamma(beta / 2.0 + k + 1.0))
}

pub type Dense = Vec<Vec<f64>>;

pub fn dense_riesz(beta: f64, n: usize) -> Dense {
    (0..n)
        .map(|i| (0..n).map(|j| oracle_stencil(beta, i.abs_diff(j))).collect())
        .collect()
}

pub fn identity(n: usize) -> Dense {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

pub fn kron(a: &Dense, b: &Dense) -> Dense {
    let (p, q) = (a.len(), b.len());
    let mut out = vec![vec![0.0; p * q]; p * q];
    for i in 0..p {
        for j in 0..p {
            for k in 0..q {
                for l in 0..q {
                    out[i * q + k][j * q + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn add_scaled(a: &Dense, b: &Dense, s: f64) -> Dense {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + s * y).collect())
        .collect()
}

pub fn matvec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &Dense, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &v)| {
        let mut row = r.clone();
        row.push(v);
        row
    }).collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for c in col..=n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Dense from-scratch 1D time stepper on (0, L) for the scheme with
/// ω-trapezoid weights, σ collocation and fractional centred differences.
/// Returns all levels as full rows including the boundary zeros.
#[allow(clippy::too_many_arguments)]
pub fn oracle_stepper_1d(
    weight: impl Fn(f64) -> f64,
    half_count: usize,
    beta: f64,
    k_coef: f64,
    length: f64,
    final_time: f64,
    m: usize,
    n_steps: usize,
    phi: impl Fn(f64) -> f64,
    f: impl Fn(f64, f64) -> f64,
) -> Vec<Vec<f64>> {
    let (nodes, lambdas) = oracle_quadrature(weight, half_count);
    let h = length / m as f64;
    let tau = final_time / n_steps as f64;
    let s = oracle_sigma(&nodes, &lambdas, tau);
    let g = dense_riesz(beta, m - 1);
    let kappa = k_coef * h.powf(-beta);
    let mut hist: Vec<Vec<f64>> = vec![(0..=m)
        .map(|i| if i == 0 || i == m { 0.0 } else { phi(i as f64 * h) })
        .collect()];
    for n in 1..=n_steps {
        let chat = oracle_chat(&nodes, &lambdas, tau, s, n);
        // ĉ_0 (u^n - u^{n-1}) + Σ_{k≥1} ĉ_k (u^{n-k} - u^{n-k-1})
        //   = -K h^{-β} G (σ u^n + (1-σ) u^{n-1}) + f^{n-1+σ}
        let a: Dense = (0..m - 1)
            .map(|i| {
                (0..m - 1)
                    .map(|j| (if i == j { chat[0] } else { 0.0 }) + s * kappa * g[i][j])
                    .collect()
            })
            .collect();
        let prev: Vec<f64> = hist[n - 1][1..m].to_vec();
        let gp = matvec(&g, &prev);
        let t = (n as f64 - 1.0 + s) * tau;
        let mut rhs = vec![0.0; m - 1];
        for i in 0..m - 1 {
            let mut v = chat[0] * prev[i] - (1.0 - s) * kappa * gp[i] + f((i + 1) as f64 * h, t);
            for k in 1..n {
                v -= chat[k] * (hist[n - k][i + 1] - hist[n - k - 1][i + 1]);
            }
            rhs[i] = v;
        }
        let u = gauss_solve(&a, &rhs);
        let mut row = vec![0.0; m + 1];
        row[1..m].copy_from_slice(&u);
        hist.push(row);
    }
    hist
}

/// Dense 2D analogue on the unit square, x-fastest interior ordering.
#[allow(clippy::too_many_arguments)]
pub fn oracle_stepper_2d(
    weight: impl Fn(f64) -> f64,
    half_count: usize,
    beta: f64,
    gamma_order: f64,
    mx: usize,
    my: usize,
    final_time: f64,
    n_steps: usize,
    phi: impl Fn(f64, f64) -> f64,
    f: impl Fn(f64, f64, f64) -> f64,
) -> Vec<Vec<f64>> {
    let (nodes, lambdas) = oracle_quadrature(weight, half_count);
    let (hx, hy) = (1.0 / mx as f64, 1.0 / my as f64);
    let tau = final_time / n_steps as f64;
    let s = oracle_sigma(&nodes, &lambdas, tau);
    let (nx, ny) = (mx - 1, my - 1);
    let lap = add_scaled(
        &kron(&identity(ny), &dense_riesz(beta, nx)).iter().map(|r| r.iter().map(|v| v * hx.powf(-beta)).collect()).collect(),
        &kron(&dense_riesz(gamma_order, ny), &identity(nx)),
        hy.powf(-gamma_order),
    );
    let dim = nx * ny;
    let full = |interior: &[f64]| {
        let mut out = vec![0.0; (mx + 1) * (my + 1)];
        for j in 0..ny {
            for i in 0..nx {
                out[(i + 1) + (j + 1) * (mx + 1)] = interior[i + j * nx];
            }
        }
        out
    };
    let inner = |grid: &[f64]| {
        let mut out = vec![0.0; dim];
        for j in 0..ny {
            for i in 0..nx {
                out[i + j * nx] = grid[(i + 1) + (j + 1) * (mx + 1)];
            }
        }
        out
    };
    let mut u0 = vec![0.0; dim];
    for j in 0..ny {
        for i in 0..nx {
            u0[i + j * nx] = phi((i + 1) as f64 * hx, (j + 1) as f64 * hy);
        }
    }
    let mut hist = vec![full(&u0)];
    for n in 1..=n_steps {
        let chat = oracle_chat(&nodes, &lambdas, tau, s, n);
        let a = add_scaled(&identity(dim).iter().map(|r| r.iter().map(|v| v * chat[0]).collect()).collect(), &lap, s);
        let prev = inner(&hist[n - 1]);
        let lp = matvec(&lap, &prev);
        let t = (n as f64 - 1.0 + s) * tau;
        let mut rhs = vec![0.0; dim];
        for j in 0..ny {
            for i in 0..nx {
                let p = i + j * nx;
                let mut v = chat[0] * prev[p] - (1.0 - s) * lp[p] + f((i + 1) as f64 * hx, (j + 1) as f64 * hy, t);
                for k in 1..n {
                    let cur = inner(&hist[n - k]);
                    let old = inner(&hist[n - k - 1]);
                    v -= chat[k] * (cur[p] - old[p]);
                }
                rhs[p] = v;
            }
        }
        hist.push(full(&gauss_solve(&a, &rhs)));
    }
    hist
}
