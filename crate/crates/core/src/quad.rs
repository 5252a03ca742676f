//! Log-space trapezoidal quadrature on boxes, shared by the marginal-code
//! and prior-volume computations. Integrands are supplied as log-densities so
//! that sharply peaked likelihoods do not underflow.

use crate::error::{Error, Result};

/// `log(sum(exp(v)))` with the usual max-shift; empty input is `-inf`.
pub(crate) fn logsumexp(vals: impl Iterator<Item = f64>) -> f64 {
    let vals: Vec<f64> = vals.collect();
    let max = vals.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = vals.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Log of the trapezoid-rule integral of `exp(log_f)` over the box, with
/// `n` intervals per axis. One or two dimensions.
pub(crate) fn log_trapezoid(
    log_f: &dyn Fn(&[f64]) -> f64,
    bounds: &[(f64, f64)],
    n: usize,
) -> Result<f64> {
    match bounds.len() {
        1 => {
            let (a, b) = bounds[0];
            let h = (b - a) / n as f64;
            let terms = (0..=n).map(|i| {
                let x = a + h * i as f64;
                let w: f64 = if i == 0 || i == n { 0.5 } else { 1.0 };
                log_f(&[x]) + w.ln()
            });
            Ok(logsumexp(terms) + h.ln())
        }
        2 => {
            let (a0, b0) = bounds[0];
            let (a1, b1) = bounds[1];
            let h0 = (b0 - a0) / n as f64;
            let h1 = (b1 - a1) / n as f64;
            let mut terms = Vec::with_capacity((n + 1) * (n + 1));
            for i in 0..=n {
                let x = a0 + h0 * i as f64;
                let wi: f64 = if i == 0 || i == n { 0.5 } else { 1.0 };
                for j in 0..=n {
                    let y = a1 + h1 * j as f64;
                    let wj: f64 = if j == 0 || j == n { 0.5 } else { 1.0 };
                    terms.push(log_f(&[x, y]) + wi.ln() + wj.ln());
                }
            }
            Ok(logsumexp(terms.into_iter()) + h0.ln() + h1.ln())
        }
        d => Err(Error::Config(format!(
            "quadrature supports 1 or 2 dimensions, got {d}"
        ))),
    }
}

/// Doubling refinement of [`log_trapezoid`] until the log-value moves by at
/// most `rel_tol` (a relative change of the integral itself) across two
/// consecutive refinements. The double agreement guards against coarse grids
/// that straddle an unresolved peak and happen to agree once.
///
/// Returns the converged log-integral; errors with `Precision` if the cap is
/// reached first.
pub(crate) fn adaptive_log_integral(
    log_f: &dyn Fn(&[f64]) -> f64,
    bounds: &[(f64, f64)],
    rel_tol: f64,
    max_level: u32,
) -> Result<f64> {
    let start_level = 5; // 32 intervals per axis
    let mut prev = log_trapezoid(log_f, bounds, 1 << start_level)?;
    let mut agreed_once = false;
    for level in (start_level + 1)..=max_level {
        let cur = log_trapezoid(log_f, bounds, 1 << level)?;
        if !cur.is_finite() && !prev.is_finite() {
            // genuinely zero integrand everywhere
            return Ok(cur);
        }
        if (cur - prev).abs() <= rel_tol {
            if agreed_once {
                return Ok(cur);
            }
            agreed_once = true;
        } else {
            agreed_once = false;
        }
        prev = cur;
    }
    Err(Error::Precision(format!(
        "quadrature did not converge to relative tolerance {rel_tol:e} \
         within {} intervals per axis",
        1u64 << max_level
    )))
}
