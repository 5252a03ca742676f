//! Dense symmetric linear algebra: eigendecomposition, shifted
//! log-determinants and quadratic forms.
//!
//! Everything else in this crate reduces to these three operations, so the
//! module is deliberately self-contained: a row-major `SymMatrix`, a cyclic
//! Jacobi eigensolver, and log-space determinant arithmetic (determinants at
//! dimensions in the hundreds overflow f64 long before they stop being
//! informative).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense symmetric matrix, row-major storage of all `dim * dim` entries.
///
/// The constructors symmetrize their input, so `a.get(i, j) == a.get(j, i)`
/// holds exactly for every instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SymMatrix {
    /// Build from a row-major slice of `dim * dim` entries. The input is
    /// symmetrized as `(a + a^T) / 2`.
    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch("dim must be >= 1".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let mut data = entries.to_vec();
        for i in 0..dim {
            for j in (i + 1)..dim {
                let v = 0.5 * (data[i * dim + j] + data[j * dim + i]);
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        Ok(Self { dim, entries: data })
    }

    /// Build from a function of the index pair; `f` is only consulted for
    /// `i <= j` and the result mirrored.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                entries[i * dim + j] = v;
                entries[j * dim + i] = v;
            }
        }
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        Self::from_fn(dim, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.dim + j] = v;
        self.entries[j * self.dim + i] = v;
    }

    /// Row-major view of all entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }

    /// Matrix-vector product `A v`.
    pub fn mat_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "matrix dim {} vs vector length {}",
                self.dim,
                v.len()
            )));
        }
        Ok((0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, x)| a * x).sum())
            .collect())
    }

    /// Add `shift` to every diagonal entry, returning a new matrix.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.entries[i * self.dim + i] += shift;
        }
        out
    }

    /// Scale all entries by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &SymMatrix) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot add matrices of dim {} and {}",
                self.dim, other.dim
            )));
        }
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }
}

/// Eigendecomposition `A = Q diag(eigenvalues) Q^T` with eigenvalues sorted
/// descending and orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` is the unit eigenvector paired with `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<f64>>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Reconstruct `Q diag(l) Q^T`, mostly useful for validation.
    pub fn reconstruct(&self) -> SymMatrix {
        let d = self.dim();
        SymMatrix::from_fn(d, |i, j| {
            (0..d)
                .map(|k| self.eigenvalues[k] * self.eigenvectors[k][i] * self.eigenvectors[k][j])
                .sum()
        })
    }
}

// Stop once the off-diagonal Frobenius norm drops below this fraction of the
// initial full norm; hard cap on sweeps regardless.
const JACOBI_REL_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// One cyclic Jacobi pass over all (p, q) pairs. `q_mat` accumulates the
/// rotations when eigenvectors are requested.
///
/// Rotations with `a_pq^2 <= skip_sq` are skipped: even if every off-diagonal
/// entry sat at that size the off-diagonal norm would already be within the
/// convergence tolerance, so they cannot matter.
fn jacobi_sweep(a: &mut [f64], n: usize, mut q_mat: Option<&mut [f64]>, skip_sq: f64) {
    for p in 0..n.saturating_sub(1) {
        for q in (p + 1)..n {
            let apq = a[p * n + q];
            if apq * apq <= skip_sq {
                continue;
            }
            let app = a[p * n + p];
            let aqq = a[q * n + q];
            let theta = 0.5 * (aqq - app) / apq;
            // tan of the rotation angle, smaller root for stability
            let t = if theta.abs() > 1e150 {
                0.5 / theta
            } else {
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                sign / (theta.abs() + (1.0 + theta * theta).sqrt())
            };
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;

            // similarity update exploiting symmetry: rotate the two rows
            // contiguously, mirror them into the columns, and patch the
            // 2x2 pivot block with its closed form
            let (head, tail) = a.split_at_mut(q * n);
            let row_p = &mut head[p * n..p * n + n];
            let row_q = &mut tail[..n];
            for j in 0..n {
                let apj = row_p[j];
                let aqj = row_q[j];
                row_p[j] = c * apj - s * aqj;
                row_q[j] = s * apj + c * aqj;
            }
            a[p * n + p] = app - t * apq;
            a[q * n + q] = aqq + t * apq;
            a[p * n + q] = 0.0;
            a[q * n + p] = 0.0;
            for i in 0..n {
                if i == p || i == q {
                    continue;
                }
                a[i * n + p] = a[p * n + i];
                a[i * n + q] = a[q * n + i];
            }

            if let Some(qm) = q_mat.as_deref_mut() {
                for i in 0..n {
                    let qip = qm[i * n + p];
                    let qiq = qm[i * n + q];
                    qm[i * n + p] = c * qip - s * qiq;
                    qm[i * n + q] = s * qip + c * qiq;
                }
            }
        }
    }
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = a[i * n + j];
            s += 2.0 * v * v;
        }
    }
    s.sqrt()
}

fn jacobi(a: &SymMatrix, with_vectors: bool) -> Result<(Vec<f64>, Option<Vec<Vec<f64>>>)> {
    if !a.is_finite() {
        return Err(Error::NonFinite("matrix entries must be finite".into()));
    }
    let n = a.dim;
    let mut work = a.entries.clone();
    let mut q = if with_vectors {
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            q[i * n + i] = 1.0;
        }
        Some(q)
    } else {
        None
    };

    let tol = JACOBI_REL_TOL * a.frobenius_norm();
    // all-at-skip-size off-diagonals sum to at most tol^2
    let skip_sq = if n > 1 {
        tol * tol / (n as f64 * (n as f64 - 1.0))
    } else {
        0.0
    };
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&work, n) <= tol {
            break;
        }
        jacobi_sweep(&mut work, n, q.as_deref_mut(), skip_sq);
    }

    let diag: Vec<f64> = (0..n).map(|i| work[i * n + i]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());

    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = q.map(|qm| {
        order
            .iter()
            .map(|&k| (0..n).map(|i| qm[i * n + k]).collect())
            .collect()
    });
    Ok((eigenvalues, eigenvectors))
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Eigenvalues come back sorted descending; eigenvectors are orthonormal and
/// paired by index.
pub fn eig_sym(a: &SymMatrix) -> Result<EigenDecomposition> {
    let (eigenvalues, vectors) = jacobi(a, true)?;
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors: vectors.expect("vectors requested"),
    })
}

/// Eigenvalues only (descending). Same rotations as [`eig_sym`], but skips
/// accumulating the rotation product, which matters at dimensions in the
/// hundreds.
pub fn eigenvalues_sym(a: &SymMatrix) -> Result<Vec<f64>> {
    Ok(jacobi(a, false)?.0)
}

/// Tolerance below which slightly negative eigenvalues of a nominally psd
/// matrix are treated as rounding noise and clamped to zero.
pub fn psd_clamp_tolerance(a: &SymMatrix) -> f64 {
    1e-8 * a.max_abs().max(1.0)
}

/// Clamp rounding-level negative eigenvalues of a psd matrix to zero.
/// Eigenvalues more negative than the tolerance are a real psd violation.
pub fn clamp_psd_eigenvalues(eigenvalues: &[f64], tolerance: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(eigenvalues.len());
    for &l in eigenvalues {
        if l < -tolerance {
            return Err(Error::NotPsd { min_eigenvalue: l, tolerance });
        }
        out.push(if l < 0.0 { 0.0 } else { l });
    }
    Ok(out)
}

/// `log |A + shift I|` computed as the sum of `log(lambda_i + shift)` over the
/// Jacobi eigenvalues. Never forms the determinant as a product.
///
/// `a` must be psd up to rounding (small negative eigenvalues are clamped);
/// a singular matrix needs `shift > 0`.
pub fn log_det_shifted(a: &SymMatrix, shift: f64) -> Result<f64> {
    if shift < 0.0 {
        return Err(Error::Config(format!("shift must be >= 0, got {shift}")));
    }
    let eigenvalues = eigenvalues_sym(a)?;
    let clamped = clamp_psd_eigenvalues(&eigenvalues, psd_clamp_tolerance(a))?;
    log_det_from_eigenvalues(&clamped, shift)
}

/// Same log-determinant, starting from already-clamped eigenvalues.
pub fn log_det_from_eigenvalues(eigenvalues: &[f64], shift: f64) -> Result<f64> {
    let mut sum = 0.0;
    for &l in eigenvalues {
        let shifted = l + shift;
        if shifted <= 0.0 {
            return Err(Error::SingularShift { eigenvalue: l, shift });
        }
        sum += shifted.ln();
    }
    Ok(sum)
}

/// Quadratic form `v^T A v`.
pub fn quadratic_form(a: &SymMatrix, v: &[f64]) -> Result<f64> {
    if v.len() != a.dim {
        return Err(Error::DimensionMismatch(format!(
            "matrix dim {} vs vector length {}",
            a.dim,
            v.len()
        )));
    }
    let mut total = 0.0;
    for i in 0..a.dim {
        let row = a.row(i);
        let mut acc = 0.0;
        for j in 0..a.dim {
            acc += row[j] * v[j];
        }
        total += v[i] * acc;
    }
    Ok(total)
}

/// Solve `A x = b` for symmetric positive definite `A` by Cholesky.
///
/// Kept separate from the eigendecomposition so closed forms can be
/// cross-checked through an algebraically distinct route.
pub(crate) fn cholesky_solve(a: &SymMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.dim;
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix dim {n} vs rhs length {}",
            b.len()
        )));
    }
    // lower-triangular factor, row-major
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::Numeric(format!(
                        "Cholesky pivot {s:e} not positive at index {i}"
                    )));
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    // forward then backward substitution
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "expected {b}, got {a} (tol {tol})");
    }

    #[test]
    fn constructor_symmetrizes() {
        let a = SymMatrix::from_row_major(2, &[1.0, 2.0, 4.0, 3.0]).unwrap();
        assert_eq!(a.get(0, 1), 3.0);
        assert_eq!(a.get(1, 0), 3.0);
    }

    #[test]
    fn zero_dim_rejected() {
        assert!(SymMatrix::from_row_major(0, &[]).is_err());
    }

    #[test]
    fn eig_identity() {
        let a = SymMatrix::identity(3);
        let d = eig_sym(&a).unwrap();
        for l in &d.eigenvalues {
            assert_close(*l, 1.0, 1e-14);
        }
    }

    #[test]
    fn eig_diagonal_sorted_and_axis_aligned() {
        let a = SymMatrix::diagonal(&[1.0, 2.0]);
        let d = eig_sym(&a).unwrap();
        assert_close(d.eigenvalues[0], 2.0, 1e-14);
        assert_close(d.eigenvalues[1], 1.0, 1e-14);
        assert_close(d.eigenvectors[0][1].abs(), 1.0, 1e-12);
        assert_close(d.eigenvectors[1][0].abs(), 1.0, 1e-12);
    }

    #[test]
    fn eig_rejects_non_finite() {
        let a = SymMatrix::from_row_major(2, &[1.0, f64::NAN, f64::NAN, 1.0]).unwrap();
        assert!(matches!(eig_sym(&a), Err(Error::NonFinite(_))));
    }

    #[test]
    fn log_det_identity_is_zero() {
        let a = SymMatrix::identity(2);
        assert_close(log_det_shifted(&a, 0.0).unwrap(), 0.0, 1e-14);
    }

    #[test]
    fn log_det_diag_analytic() {
        let a = SymMatrix::diagonal(&[3.0, 1.0]);
        assert_close(
            log_det_shifted(&a, 1.0).unwrap(),
            4.0_f64.ln() + 2.0_f64.ln(),
            1e-12,
        );
    }

    #[test]
    fn log_det_singular_zero_shift_errors() {
        let a = SymMatrix::diagonal(&[1.0, 0.0]);
        assert!(matches!(
            log_det_shifted(&a, 0.0),
            Err(Error::SingularShift { .. })
        ));
    }

    #[test]
    fn log_det_rejects_indefinite() {
        let a = SymMatrix::diagonal(&[1.0, -0.5]);
        assert!(matches!(log_det_shifted(&a, 1.0), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn log_det_clamps_rounding_negatives() {
        let a = SymMatrix::diagonal(&[1.0, -1e-12]);
        let v = log_det_shifted(&a, 0.5).unwrap();
        assert_close(v, 1.5_f64.ln() + 0.5_f64.ln(), 1e-12);
    }

    #[test]
    fn quadratic_form_identity() {
        let a = SymMatrix::identity(2);
        assert_close(quadratic_form(&a, &[3.0, 4.0]).unwrap(), 25.0, 1e-12);
    }

    #[test]
    fn quadratic_form_degenerate_diag() {
        let a = SymMatrix::diagonal(&[2.0, 0.0]);
        assert_close(quadratic_form(&a, &[1.0, 1.0]).unwrap(), 2.0, 1e-12);
    }

    #[test]
    fn quadratic_form_dimension_mismatch() {
        let a = SymMatrix::identity(3);
        assert!(quadratic_form(&a, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn cholesky_solve_roundtrip() {
        let a = SymMatrix::from_row_major(2, &[4.0, 1.0, 1.0, 3.0]).unwrap();
        let x = cholesky_solve(&a, &[1.0, 2.0]).unwrap();
        let ax = a.mat_vec(&x).unwrap();
        assert_close(ax[0], 1.0, 1e-12);
        assert_close(ax[1], 2.0, 1e-12);
    }
}
