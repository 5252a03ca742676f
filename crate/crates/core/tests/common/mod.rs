//! Independent numerical oracles shared by the integration and acceptance
//! suites. Everything here deliberately avoids the crate's own
//! eigendecomposition and quadrature paths: eigenvalues come from inertia
//! bisection, derivatives from finite differences, inverses from
//! Gauss-Jordan, and integrals from fixed-grid trapezoids.

#![allow(dead_code)]

use occam::linalg::SymMatrix;
use occam::network::{Dataset, NetworkSpec, ParamVector};

/// Count eigenvalues of `a` strictly below `x` via the inertia of the
/// unpivoted LDL^T factorization of `a - x I` (Sylvester's law). `None` when
/// a pivot lands exactly on zero.
fn count_eigenvalues_below(a: &SymMatrix, x: f64) -> Option<usize> {
    let n = a.dim();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| a.get(i, j) - if i == j { x } else { 0.0 })
                .collect()
        })
        .collect();
    let mut negatives = 0;
    for k in 0..n {
        let pivot = m[k][k];
        if pivot == 0.0 || !pivot.is_finite() {
            return None;
        }
        if pivot < 0.0 {
            negatives += 1;
        }
        for i in (k + 1)..n {
            let factor = m[i][k] / pivot;
            for j in k..n {
                m[i][j] -= factor * m[k][j];
            }
        }
    }
    Some(negatives)
}

fn count_below_robust(a: &SymMatrix, x: f64) -> usize {
    let scale = a.max_abs().max(1.0);
    let mut nudge = 1e-14 * scale;
    let mut attempt = x;
    for _ in 0..12 {
        if let Some(c) = count_eigenvalues_below(a, attempt) {
            return c;
        }
        attempt = x + nudge;
        nudge *= 4.0;
    }
    panic!("inertia count failed near x = {x}");
}

/// All eigenvalues of a symmetric matrix by bisection on the inertia count,
/// sorted descending. Independent of the crate's Jacobi solver.
pub fn bisection_eigenvalues(a: &SymMatrix) -> Vec<f64> {
    let n = a.dim();
    // Gershgorin bounds, widened
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius: f64 = (0..n).filter(|&j| j != i).map(|j| a.get(i, j).abs()).sum();
        lo = lo.min(a.get(i, i) - radius);
        hi = hi.max(a.get(i, i) + radius);
    }
    let pad = 1e-8 * (hi - lo).abs().max(1.0) + 1e-12;
    lo -= pad;
    hi += pad;

    (0..n)
        .map(|k| {
            // k-th smallest eigenvalue: least x with count_below(x) >= k + 1
            let (mut a_lo, mut a_hi) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a_lo + a_hi);
                if count_below_robust(a, mid) >= k + 1 {
                    a_hi = mid;
                } else {
                    a_lo = mid;
                }
            }
            0.5 * (a_lo + a_hi)
        })
        .rev()
        .collect()
}

/// Central-difference parameter-output Jacobian.
pub fn fd_jacobian(spec: &NetworkSpec, theta: &ParamVector, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let d = spec.param_count();
    let m = spec.output_dim();
    let mut rows = vec![vec![0.0; d]; m];
    for i in 0..d {
        let mut plus = theta.clone();
        plus.values[i] += h;
        let mut minus = theta.clone();
        minus.values[i] -= h;
        let yp = occam::network::forward(spec, &plus, x).unwrap();
        let ym = occam::network::forward(spec, &minus, x).unwrap();
        for k in 0..m {
            rows[k][i] = (yp[k] - ym[k]) / (2.0 * h);
        }
    }
    rows
}

/// Central-difference Hessian of the dataset log-likelihood.
pub fn fd_hessian_loglik(
    spec: &NetworkSpec,
    theta: &ParamVector,
    data: &Dataset,
    h: f64,
) -> Vec<Vec<f64>> {
    let d = spec.param_count();
    let f = |t: &ParamVector| occam::network::log_likelihood(spec, t, data).unwrap();
    let mut hess = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in i..d {
            let mut pp = theta.clone();
            pp.values[i] += h;
            pp.values[j] += h;
            let mut pm = theta.clone();
            pm.values[i] += h;
            pm.values[j] -= h;
            let mut mp = theta.clone();
            mp.values[i] -= h;
            mp.values[j] += h;
            let mut mm = theta.clone();
            mm.values[i] -= h;
            mm.values[j] -= h;
            let v = (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * h * h);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    hess
}

/// Plain Gauss-Jordan inverse of a dense matrix given as rows.
pub fn gauss_jordan_inverse(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut aug: Vec<Vec<f64>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a, &b| aug[a][col].abs().partial_cmp(&aug[b][col].abs()).unwrap())
            .unwrap();
        aug.swap(col, pivot_row);
        let pivot = aug[col][col];
        assert!(pivot.abs() > 1e-300, "singular matrix in oracle inverse");
        for j in 0..2 * n {
            aug[col][j] /= pivot;
        }
        for i in 0..n {
            if i != col {
                let factor = aug[i][col];
                for j in 0..2 * n {
                    aug[i][j] -= factor * aug[col][j];
                }
            }
        }
    }
    aug.into_iter().map(|row| row[n..].to_vec()).collect()
}

/// Naive matrix-form quadratic remainder:
/// `(1/2) theta^T [N J - N J (N J + I/eps2^2)^{-1} N J] theta`,
/// with the inverse from Gauss-Jordan.
pub fn naive_matrix_remainder(j: &SymMatrix, theta: &[f64], n: usize, eps2: f64) -> f64 {
    let d = j.dim();
    let nf = n as f64;
    let nj: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|jj| nf * j.get(i, jj)).collect())
        .collect();
    let mut inner = nj.clone();
    for (i, row) in inner.iter_mut().enumerate() {
        row[i] += 1.0 / (eps2 * eps2);
    }
    let inv = gauss_jordan_inverse(&inner);
    // M = NJ - NJ inv NJ
    let mat_mul = |a: &[Vec<f64>], b: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|jj| (0..d).map(|k| a[i][k] * b[k][jj]).sum())
                    .collect()
            })
            .collect()
    };
    let tmp = mat_mul(&nj, &inv);
    let prod = mat_mul(&tmp, &nj);
    let mut total = 0.0;
    for i in 0..d {
        for jj in 0..d {
            total += theta[i] * (nj[i][jj] - prod[i][jj]) * theta[jj];
        }
    }
    0.5 * total
}

/// Random positive semidefinite matrix `G^T G / rows` with seeded Gaussian
/// entries; `rows < dim` forces rank deficiency.
pub fn random_psd(dim: usize, rows: usize, seed: u64) -> SymMatrix {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let g: Vec<Vec<f64>> = (0..rows)
        .map(|_| (0..dim).map(|_| normal.sample(&mut rng)).collect())
        .collect();
    SymMatrix::from_fn(dim, |i, j| {
        g.iter().map(|row| row[i] * row[j]).sum::<f64>() / rows as f64
    })
}

/// Random symmetric (not necessarily psd) matrix with seeded entries.
pub fn random_symmetric(dim: usize, seed: u64) -> SymMatrix {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    SymMatrix::from_fn(dim, |_, _| normal.sample(&mut rng))
}

pub fn logsumexp(vals: &[f64]) -> f64 {
    let max = vals.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    if !max.is_finite() {
        return max;
    }
    max + vals.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

/// Fixed-grid log-space trapezoid over a 2-D box: the oracle quadrature for
/// Gaussian-type integrands (no adaptivity, caller picks the resolution).
pub fn log_trapezoid_2d_fixed(
    log_f: &dyn Fn(f64, f64) -> f64,
    bounds: (f64, f64),
    intervals: usize,
) -> f64 {
    let (a, b) = bounds;
    let h = (b - a) / intervals as f64;
    let mut terms = Vec::with_capacity((intervals + 1) * (intervals + 1));
    for i in 0..=intervals {
        let wi: f64 = if i == 0 || i == intervals { 0.5 } else { 1.0 };
        let x = a + h * i as f64;
        for j in 0..=intervals {
            let wj: f64 = if j == 0 || j == intervals { 0.5 } else { 1.0 };
            let y = a + h * j as f64;
            terms.push(log_f(x, y) + wi.ln() + wj.ln());
        }
    }
    logsumexp(&terms) + 2.0 * h.ln()
}

/// Closed-form log marginal likelihood of `N(x | theta, 1)` data under a
/// `N(0, tau^2)` prior on the mean.
pub fn conjugate_gaussian_log_marginal(data: &[f64], tau: f64) -> f64 {
    let n = data.len() as f64;
    let sum: f64 = data.iter().sum();
    let sum_sq: f64 = data.iter().map(|x| x * x).sum();
    let tau_sq = tau * tau;
    let log_2pi = (2.0 * std::f64::consts::PI).ln();
    // integrate exp(-(sum_sq - 2 theta sum + n theta^2)/2) N(theta | 0, tau^2)
    let a = n + 1.0 / tau_sq;
    -0.5 * n * log_2pi - 0.5 * sum_sq + 0.5 * sum * sum / a
        - 0.5 * (a * tau_sq).ln()
}

/// Simple deterministic pseudo-random stream for test parameters.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed.wrapping_add(0x12345))
    }

    pub fn next_u64(&mut self) -> u64 {
        occam::seeds::splitmix64(&mut self.0)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn usize_in(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        lo + (self.next_u64() as usize) % (hi_inclusive - lo + 1)
    }
}
