//! Fisher spectra and their large-dimension behavior: empirical spectral
//! summaries, the simplified spectral razor, the moment-expansion shortcut,
//! Marchenko-Pastur densities for Wishart-type matrices, and the convergence
//! of `(1/d) log |A + b I|` to its spectral-density integral.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fim::FisherMatrix;
use crate::linalg::{self, SymMatrix};
use crate::prior::PriorConfig;
use crate::seeds;

/// Sorted eigenvalues of a Fisher matrix with a histogram and the first two
/// empirical moments. Rounding-level negative eigenvalues are clamped to 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    /// Sorted descending, clamped to be nonnegative.
    pub eigenvalues: Vec<f64>,
    pub dim: usize,
    /// `n_bins + 1` edges spanning `[0, lambda_max]`.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Mean eigenvalue.
    pub m1: f64,
    /// Mean squared eigenvalue.
    pub m2: f64,
}

impl Spectrum {
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>, n_bins: usize) -> Result<Self> {
        if n_bins == 0 {
            return Err(Error::Config("n_bins must be >= 1".into()));
        }
        if eigenvalues.is_empty() {
            return Err(Error::Config("spectrum needs at least one eigenvalue".into()));
        }
        eigenvalues.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let dim = eigenvalues.len();
        let lambda_max = eigenvalues[0].max(0.0);

        let bin_edges: Vec<f64> = (0..=n_bins)
            .map(|i| lambda_max * i as f64 / n_bins as f64)
            .collect();
        let mut counts = vec![0usize; n_bins];
        for &l in &eigenvalues {
            let idx = if lambda_max > 0.0 {
                (((l / lambda_max) * n_bins as f64) as usize).min(n_bins - 1)
            } else {
                0
            };
            counts[idx] += 1;
        }

        let m1 = eigenvalues.iter().sum::<f64>() / dim as f64;
        let m2 = eigenvalues.iter().map(|l| l * l).sum::<f64>() / dim as f64;
        Ok(Self { eigenvalues, dim, bin_edges, counts, m1, m2 })
    }

    /// Histogram CSV `bin_left,bin_right,count`.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,count\n");
        for i in 0..self.counts.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                self.bin_edges[i],
                self.bin_edges[i + 1],
                self.counts[i]
            ));
        }
        out
    }

    /// JSON block with the dimension and empirical moments.
    pub fn moments_json(&self) -> String {
        format!(
            "{{\"dim\":{},\"m1\":{},\"m2\":{}}}",
            self.dim, self.m1, self.m2
        )
    }
}

/// Eigenvalues of a Fisher matrix as a [`Spectrum`].
pub fn spectrum_of(f: &FisherMatrix, n_bins: usize) -> Result<Spectrum> {
    let raw = linalg::eigenvalues_sym(&f.matrix)?;
    let clamped = linalg::clamp_psd_eigenvalues(&raw, linalg::psd_clamp_tolerance(&f.matrix))?;
    Spectrum::from_eigenvalues(clamped, n_bins)
}

/// Marchenko-Pastur law for `(1/n) G^T G` with `G` an `n x d` matrix of
/// i.i.d. `N(0, scale)` entries and aspect ratio `d / n`. Aspect ratios
/// above 1 place an atom of mass `1 - 1/aspect` at the origin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MPDensity {
    pub shape: f64,
    pub scale: f64,
    pub atom_mass: f64,
    pub support: (f64, f64),
}

/// Construct the Marchenko-Pastur density with the given aspect ratio and
/// variance scale.
pub fn mp_density(aspect: f64, scale: f64) -> Result<MPDensity> {
    if !(aspect > 0.0) || !aspect.is_finite() {
        return Err(Error::Config(format!("aspect must be positive, got {aspect}")));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Config(format!("scale must be positive, got {scale}")));
    }
    let sqrt_aspect = aspect.sqrt();
    let lower = scale * (1.0 - sqrt_aspect) * (1.0 - sqrt_aspect);
    let upper = scale * (1.0 + sqrt_aspect) * (1.0 + sqrt_aspect);
    let atom_mass = (1.0 - 1.0 / aspect).max(0.0);
    Ok(MPDensity { shape: aspect, scale, atom_mass, support: (lower, upper) })
}

impl MPDensity {
    /// Continuous part of the density at `lambda`.
    pub fn pdf(&self, lambda: f64) -> f64 {
        let (lo, hi) = self.support;
        if lambda <= lo || lambda >= hi || lambda <= 0.0 {
            return 0.0;
        }
        ((hi - lambda) * (lambda - lo)).sqrt()
            / (2.0 * std::f64::consts::PI * self.scale * self.shape * lambda)
    }

    /// Integral of `f` against the continuous part, using the substitution
    /// `lambda = lo + (hi - lo) sin^2 u`, under which the edge singularities
    /// become a smooth integrand on `[0, pi/2]`.
    pub fn integrate_continuous(&self, f: impl Fn(f64) -> f64) -> f64 {
        let (lo, hi) = self.support;
        let width = hi - lo;
        let denom = 2.0 * std::f64::consts::PI * self.scale * self.shape;
        let n = 8192;
        let h = std::f64::consts::FRAC_PI_2 / n as f64;
        let integrand = |u: f64| {
            let sin = u.sin();
            let cos = u.cos();
            let lambda = lo + width * sin * sin;
            // sin^2 u / lambda(u) has a finite limit as u -> 0 when lo = 0
            let ratio = if lambda > 0.0 {
                sin * sin / lambda
            } else {
                1.0 / width
            };
            2.0 * width * width * cos * cos * ratio / denom * f(lambda)
        };
        let mut total = 0.5 * (integrand(0.0) + integrand(std::f64::consts::FRAC_PI_2));
        for i in 1..n {
            total += integrand(h * i as f64);
        }
        total * h
    }

    /// Expectation of `f` under the full law (atom at the origin included).
    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atom_mass * f(0.0) + self.integrate_continuous(&f)
    }

    /// Cumulative distribution at `x`, atom included.
    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support;
        if x < 0.0 {
            return 0.0;
        }
        let base = self.atom_mass;
        if x <= lo {
            return base;
        }
        if x >= hi {
            return base + self.integrate_continuous(|_| 1.0);
        }
        base + self.integrate_continuous(|l| if l <= x { 1.0 } else { 0.0 })
    }
}

/// `(1/n) G^T G` with `G` an `n x dim` matrix of i.i.d. `N(0, scale)`
/// entries; the empirical Wishart matrix whose spectrum approaches the
/// Marchenko-Pastur law with aspect `dim / n`.
pub fn wishart(dim: usize, factor_rows: usize, scale: f64, seed: u64) -> SymMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, scale.sqrt()).unwrap();
    // columns of G stored contiguously so the Gram products are cache-local
    let cols: Vec<Vec<f64>> = (0..dim)
        .map(|_| Vec::with_capacity(factor_rows))
        .collect();
    let mut cols = cols;
    for _ in 0..factor_rows {
        for col in cols.iter_mut() {
            col.push(normal.sample(&mut rng));
        }
    }
    let inv_n = 1.0 / factor_rows as f64;
    let rows: Vec<Vec<f64>> = (0..dim)
        .into_par_iter()
        .map(|i| {
            (0..dim)
                .map(|j| {
                    if j < i {
                        0.0
                    } else {
                        cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum::<f64>() * inv_n
                    }
                })
                .collect()
        })
        .collect();
    SymMatrix::from_fn(dim, |i, j| rows[i][j])
}

/// One dimension's entry in a [`ConvergenceTable`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub dim: usize,
    /// `(1/d) log |A + b I|` averaged over the draws.
    pub mean_scaled_logdet: f64,
    /// Absolute gap to the spectral-density integral.
    pub gap: f64,
}

/// Convergence of the scaled shifted log-determinant toward the integral of
/// `log(lambda + b)` against the limiting spectral density.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub rho_integral: f64,
    /// Whether the final gap is strictly smaller than the first.
    pub shrinking: bool,
}

/// For each dimension, average `(1/d) log |A_d + b I|` over `draws` samples
/// from `sampler` and report the gap to `rho_integral` (the quadrature value
/// of the density integral, supplied by the caller).
pub fn logdet_limit_check(
    sampler: &(dyn Fn(usize, u64) -> SymMatrix + Sync),
    dims: &[usize],
    b: f64,
    rho_integral: f64,
    draws: usize,
    seed: u64,
) -> Result<ConvergenceTable> {
    if dims.is_empty() || draws == 0 {
        return Err(Error::Config("need at least one dimension and one draw".into()));
    }
    if !(b > 0.0) {
        return Err(Error::Config(format!("shift b must be positive, got {b}")));
    }
    let mut rows = Vec::with_capacity(dims.len());
    for (di, &d) in dims.iter().enumerate() {
        let draw_results: Vec<Result<f64>> = (0..draws)
            .into_par_iter()
            .map(|k| {
                let a = sampler(d, seeds::derive(seed, (di * draws + k) as u64));
                Ok(linalg::log_det_shifted(&a, b)? / d as f64)
            })
            .collect();
        let mut sum = 0.0;
        for r in draw_results {
            sum += r?;
        }
        let mean = sum / draws as f64;
        rows.push(ConvergenceRow { dim: d, mean_scaled_logdet: mean, gap: (mean - rho_integral).abs() });
    }
    let shrinking = rows.last().unwrap().gap < rows.first().unwrap().gap;
    Ok(ConvergenceTable { rows, rho_integral, shrinking })
}

/// The simplified spectral razor:
/// `neg_log_lik + (D/2) log N + (D/2) mean_i log(lambda_i + 1/(N eps2^2))`,
/// reading the spectral-density integral as the empirical-spectrum mean.
pub fn simplified_razor(
    neg_log_lik: f64,
    d: usize,
    n: usize,
    spectrum: &Spectrum,
    config: &PriorConfig,
) -> Result<f64> {
    if d != spectrum.dim {
        return Err(Error::DimensionMismatch(format!(
            "d = {d} vs spectrum dimension {}",
            spectrum.dim
        )));
    }
    config.validate()?;
    let s = 1.0 / (n as f64 * config.eps2 * config.eps2);
    let mean_log: f64 = spectrum
        .eigenvalues
        .iter()
        .map(|&l| (l + s).ln())
        .sum::<f64>()
        / d as f64;
    Ok(neg_log_lik + 0.5 * d as f64 * (n as f64).ln() + 0.5 * d as f64 * mean_log)
}

/// Second-order expansion of `log(lambda + s)` around the mean eigenvalue:
/// `log(m1 + s) - (m2 - m1^2) / (2 (m1 + s)^2)`.
pub fn log_moment_expansion(m1: f64, m2: f64, s: f64) -> f64 {
    let shifted = m1 + s;
    shifted.ln() - (m2 - m1 * m1) / (2.0 * shifted * shifted)
}

/// Moment-based razor shortcuts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentRazor {
    /// Fit + dimension terms + the second-order moment expansion of the
    /// spectral integral.
    pub expansion: f64,
    /// The dominant-term closed form `fit + (D/2) log N - c3 D / (m1 + s)^2`.
    pub leading_order: f64,
}

/// Evaluate both moment-based razor forms from the first two spectral
/// moments. `c3` is the order-one constant of the dominant-term form,
/// supplied or fitted by the caller.
pub fn taylor_moment_razor(
    neg_log_lik: f64,
    d: usize,
    n: usize,
    m1: f64,
    m2: f64,
    config: &PriorConfig,
    c3: f64,
) -> Result<MomentRazor> {
    config.validate()?;
    if !(c3 > 0.0) {
        return Err(Error::Config(format!("c3 must be positive, got {c3}")));
    }
    let s = 1.0 / (n as f64 * config.eps2 * config.eps2);
    if m1 <= 0.0 && s <= 0.0 {
        return Err(Error::Config(
            "need m1 > 0 or a positive shift for the expansion".into(),
        ));
    }
    let df = d as f64;
    let dim_term = 0.5 * df * (n as f64).ln();
    let expansion = neg_log_lik + dim_term + 0.5 * df * log_moment_expansion(m1, m2, s);
    let leading_order = neg_log_lik + dim_term - c3 * df / ((m1 + s) * (m1 + s));
    Ok(MomentRazor { expansion, leading_order })
}
