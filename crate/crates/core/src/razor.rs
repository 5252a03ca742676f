//! Assembly of the description-length razor: fit term, dimension penalty,
//! prior volume, and the observed/true log-determinant pair, plus the
//! discarded quadratic remainder and its bounds, the classical
//! Jeffreys-prior razor for regular low-dimensional models, and a quadrature
//! reference for the exact Bayesian code length.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fim::{observed_fim, true_fim_estimate, FisherMatrix, InputDistribution};
use crate::linalg::{self, SymMatrix};
use crate::models::LowDimModel;
use crate::network::{log_likelihood, log_likelihood_gradient, Dataset, NetworkSpec, ParamVector};
use crate::prior::{log_volume_mc, PriorConfig};
use crate::quad;
use crate::seeds;

const LOG_2PI: f64 = 1.8378770664093453; // ln(2 pi)

/// Bayesian information criterion: `neg_log_lik + (d/2) log n`.
pub fn bic(neg_log_lik: f64, d: usize, n: usize) -> f64 {
    neg_log_lik + 0.5 * d as f64 * (n as f64).ln()
}

/// Per-term breakdown of the razor for one fitted model.
///
/// `total = neg_log_lik + dim_term + log_v + observed_logdet - true_logdet`
/// holds as an exact arithmetic identity (plus `remainder` only when
/// `remainder_included` is set).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RazorReport {
    pub d: usize,
    pub n: usize,
    pub neg_log_lik: f64,
    /// `(D/2) log(N / 2 pi)`.
    pub dim_term: f64,
    pub log_v: f64,
    /// Monte-Carlo standard error of `log_v`; zero when the volume came from
    /// quadrature.
    pub log_v_std_error: f64,
    /// `(1/2) log |J(theta_hat) + I/(N eps2^2)|`.
    pub observed_logdet: f64,
    /// `(1/2) log |I(theta_hat) + eps1 I|`.
    pub true_logdet: f64,
    /// Quadratic remainder of the Laplace expansion, reported but excluded
    /// from `total` unless `remainder_included`.
    pub remainder: f64,
    pub remainder_included: bool,
    pub total: f64,
    pub bic: f64,
    pub warnings: Vec<String>,
}

impl RazorReport {
    /// Column order of [`RazorReport::csv_row`].
    pub const CSV_HEADER: &'static str =
        "d,n,neg_log_lik,dim_term,log_v,observed_logdet,true_logdet,remainder,total,bic";

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        d: usize,
        n: usize,
        neg_log_lik: f64,
        dim_term: f64,
        log_v: f64,
        log_v_std_error: f64,
        observed_logdet: f64,
        true_logdet: f64,
        remainder: f64,
        include_remainder: bool,
        warnings: Vec<String>,
    ) -> Self {
        let mut total = neg_log_lik + dim_term + log_v + observed_logdet - true_logdet;
        if include_remainder {
            total += remainder;
        }
        Self {
            d,
            n,
            neg_log_lik,
            dim_term,
            log_v,
            log_v_std_error,
            observed_logdet,
            true_logdet,
            remainder,
            remainder_included: include_remainder,
            total,
            bic: bic(neg_log_lik, d, n),
            warnings,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.d,
            self.n,
            self.neg_log_lik,
            self.dim_term,
            self.log_v,
            self.observed_logdet,
            self.true_logdet,
            self.remainder,
            self.total,
            self.bic
        )
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Eigenvalues of an observed Fisher matrix together with the mle rotated
/// into its eigenbasis; shared by the remainder and the Laplace integral.
struct ObservedEigenFrame {
    eigenvalues: Vec<f64>,
    /// Coordinates of `theta_hat` in the eigenbasis.
    rotated: Vec<f64>,
}

fn observed_eigen_frame(j_hat: &FisherMatrix, theta_hat: &[f64]) -> Result<ObservedEigenFrame> {
    if theta_hat.len() != j_hat.dim() {
        return Err(Error::DimensionMismatch(format!(
            "theta length {} vs matrix dim {}",
            theta_hat.len(),
            j_hat.dim()
        )));
    }
    let decomp = linalg::eig_sym(&j_hat.matrix)?;
    let eigenvalues = linalg::clamp_psd_eigenvalues(
        &decomp.eigenvalues,
        linalg::psd_clamp_tolerance(&j_hat.matrix),
    )?;
    let rotated = decomp
        .eigenvectors
        .iter()
        .map(|v| v.iter().zip(theta_hat).map(|(a, b)| a * b).sum())
        .collect();
    Ok(ObservedEigenFrame { eigenvalues, rotated })
}

/// Quadratic remainder of the Laplace expansion around the mle, in its
/// eigenvalue closed form:
/// `R = (1/2) sum_i a_i^2 N lambda_i / (N lambda_i eps2^2 + 1)`
/// where `a` is the mle rotated into the eigenbasis of the observed matrix.
pub fn remainder_term(
    j_hat: &FisherMatrix,
    theta_hat: &[f64],
    n: usize,
    config: &PriorConfig,
) -> Result<f64> {
    config.validate()?;
    let frame = observed_eigen_frame(j_hat, theta_hat)?;
    let nf = n as f64;
    let e2sq = config.eps2 * config.eps2;
    Ok(0.5
        * frame
            .eigenvalues
            .iter()
            .zip(&frame.rotated)
            .map(|(&l, &a)| a * a * nf * l / (nf * l * e2sq + 1.0))
            .sum::<f64>())
}

/// Both remainder bounds evaluated on one instance: the looser
/// `N lambda_max / (eps2^2 N lambda_max + 1) * ||theta||^2` and its
/// half-constant tightening.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemainderBoundCheck {
    pub remainder: f64,
    pub loose_bound: f64,
    pub tight_bound: f64,
    pub loose_holds: bool,
    pub tight_holds: bool,
}

impl RemainderBoundCheck {
    pub fn both_hold(&self) -> bool {
        self.loose_holds && self.tight_holds
    }
}

pub fn remainder_bound_check(
    j_hat: &FisherMatrix,
    theta_hat: &[f64],
    n: usize,
    config: &PriorConfig,
) -> Result<RemainderBoundCheck> {
    let frame = observed_eigen_frame(j_hat, theta_hat)?;
    let nf = n as f64;
    let e2sq = config.eps2 * config.eps2;
    let lambda_max = frame.eigenvalues.first().copied().unwrap_or(0.0);
    let norm_sq: f64 = theta_hat.iter().map(|v| v * v).sum();
    let remainder = remainder_term(j_hat, theta_hat, n, config)?;
    let loose_bound = nf * lambda_max / (e2sq * nf * lambda_max + 1.0) * norm_sq;
    let tight_bound = 0.5 * loose_bound;
    // exact-arithmetic ties count as holding
    let slack = 1e-12 * (1.0 + loose_bound.abs());
    Ok(RemainderBoundCheck {
        remainder,
        loose_bound,
        tight_bound,
        loose_holds: remainder.abs() <= loose_bound + slack,
        tight_holds: remainder.abs() <= tight_bound + slack,
    })
}

/// Closed form of the Laplace Gaussian integral
/// `log int exp(-||theta||^2/(2 eps2^2) - (N/2)(theta-theta_hat)^T J (theta-theta_hat)) dtheta`,
/// computed as `b^T A^{-1} b / 2 + c + (D/2) log 2 pi - (1/2) log |A|` with
/// `A = N J + I/eps2^2`, `b = N J theta_hat`, `c = -theta_hat^T N J theta_hat / 2`.
///
/// Internally cross-checks that `R = -c - b^T A^{-1} b / 2` against the
/// eigenvalue form of the remainder through a Cholesky solve.
pub fn laplace_gaussian_integral(
    j_hat: &FisherMatrix,
    theta_hat: &[f64],
    n: usize,
    config: &PriorConfig,
) -> Result<f64> {
    config.validate()?;
    let frame = observed_eigen_frame(j_hat, theta_hat)?;
    let d = j_hat.dim() as f64;
    let nf = n as f64;
    let inv_e2sq = 1.0 / (config.eps2 * config.eps2);

    let mut quad_term = 0.0; // b^T A^{-1} b / 2 in the eigenbasis
    let mut c = 0.0;
    let mut log_det_a = 0.0;
    for (&l, &a) in frame.eigenvalues.iter().zip(&frame.rotated) {
        let mu = nf * l + inv_e2sq;
        if mu <= 0.0 {
            return Err(Error::Numeric(format!(
                "Gaussian integral matrix not positive definite (eigenvalue {mu:e})"
            )));
        }
        let b = nf * l * a;
        quad_term += 0.5 * b * b / mu;
        c -= 0.5 * nf * l * a * a;
        log_det_a += mu.ln();
    }

    // independent route for the remainder identity: solve with A itself
    let a_mat = j_hat.matrix.scaled(nf).shifted(inv_e2sq);
    let b_vec: Vec<f64> = j_hat
        .matrix
        .mat_vec(theta_hat)?
        .into_iter()
        .map(|v| nf * v)
        .collect();
    let x = linalg::cholesky_solve(&a_mat, &b_vec)?;
    let quad_direct: f64 = 0.5 * b_vec.iter().zip(&x).map(|(b, x)| b * x).sum::<f64>();
    let r_direct = -c - quad_direct;
    let r_eigen = remainder_term(j_hat, theta_hat, n, config)?;
    if (r_direct - r_eigen).abs() > 1e-6 * (1.0 + r_eigen.abs()) {
        return Err(Error::Numeric(format!(
            "remainder cross-check failed: eigen form {r_eigen:e} vs direct form {r_direct:e}"
        )));
    }

    Ok(quad_term + c + 0.5 * d * LOG_2PI - 0.5 * log_det_a)
}

/// Everything the network razor needs beyond the prior scales: where inputs
/// come from and how much Monte Carlo to spend.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RazorConfig {
    pub prior: PriorConfig,
    pub input_dist: InputDistribution,
    /// True-Fisher draws at the mle are `fim_mc_factor * N`.
    pub fim_mc_factor: usize,
    /// Draws of the volume estimator.
    pub volume_draws: usize,
    /// Fisher Monte-Carlo inputs per volume draw.
    pub volume_fim_samples: usize,
    pub seed: u64,
    pub include_remainder: bool,
}

impl RazorConfig {
    pub fn new(prior: PriorConfig, input_dist: InputDistribution) -> Self {
        Self {
            prior,
            input_dist,
            fim_mc_factor: 100,
            volume_draws: 1000,
            volume_fim_samples: 32,
            seed: 0,
            include_remainder: false,
        }
    }
}

/// Gradient infinity-norm above which the razor flags the supplied mle.
pub const MLE_GRADIENT_GATE: f64 = 1e-4;

/// Assemble the razor for a fitted network.
///
/// The fit term and observed log-determinant are exact given the data; the
/// information volume and true-Fisher term are Monte-Carlo estimates whose
/// seeds derive from `config.seed`. The remainder is always reported and only
/// folded into `total` when `config.include_remainder` is set.
pub fn razor(
    spec: &NetworkSpec,
    theta_hat: &ParamVector,
    data: &Dataset,
    config: &RazorConfig,
) -> Result<RazorReport> {
    config.prior.validate()?;
    let d = spec.param_count();
    let n = data.len();
    let mut warnings = Vec::new();

    let grad = log_likelihood_gradient(spec, theta_hat, data)?;
    let grad_inf = grad.iter().fold(0.0_f64, |m, &g| m.max(g.abs()));
    if grad_inf > MLE_GRADIENT_GATE {
        warnings.push(format!(
            "gradient infinity norm {grad_inf:e} exceeds the mle gate {MLE_GRADIENT_GATE:e}; \
             the expansion point may not be a maximum-likelihood estimate"
        ));
    }

    let neg_log_lik = -log_likelihood(spec, theta_hat, data)?;
    let dim_term = 0.5 * d as f64 * ((n as f64) / (2.0 * std::f64::consts::PI)).ln();

    let j_hat = observed_fim(spec, theta_hat, data)?;
    let s = 1.0 / (n as f64 * config.prior.eps2 * config.prior.eps2);
    let observed_logdet = 0.5 * linalg::log_det_shifted(&j_hat.matrix, s)?;

    let i_hat = true_fim_estimate(
        spec,
        theta_hat,
        &config.input_dist,
        config.fim_mc_factor.max(1) * n,
        seeds::derive(config.seed, 1),
    )?;
    let true_logdet = 0.5 * linalg::log_det_shifted(&i_hat.matrix, config.prior.eps1)?;

    let volume = log_volume_mc(
        spec,
        &config.prior,
        &config.input_dist,
        config.volume_fim_samples,
        config.volume_draws,
        seeds::derive(config.seed, 2),
    )?;
    if let Some(w) = &volume.warning {
        warnings.push(w.clone());
    }

    let remainder = remainder_term(&j_hat, &theta_hat.values, n, &config.prior)?;

    Ok(RazorReport::assemble(
        d,
        n,
        neg_log_lik,
        dim_term,
        volume.log_v,
        volume.std_error,
        observed_logdet,
        true_logdet,
        remainder,
        config.include_remainder,
        warnings,
    ))
}

// log |M + shift I| for the 1x1 / 2x2 closed-form cases used on quadrature
// grids; NaN when the shifted determinant is not positive.
fn small_log_det_shifted(m: &SymMatrix, shift: f64) -> f64 {
    match m.dim() {
        1 => (m.get(0, 0) + shift).ln(),
        2 => {
            let det = (m.get(0, 0) + shift) * (m.get(1, 1) + shift) - m.get(0, 1) * m.get(0, 1);
            det.ln()
        }
        _ => f64::NAN,
    }
}

/// Razor for a regular low-dimensional model, with the information volume
/// integrated by quadrature over the model's bounded domain instead of
/// Monte Carlo. Fisher matrices come from the model's closed forms.
pub fn razor_low_dim(
    model: &dyn LowDimModel,
    config: &PriorConfig,
    include_remainder: bool,
) -> Result<RazorReport> {
    config.validate()?;
    let d = model.dim();
    let n = model.n_samples();
    if n == 0 {
        return Err(Error::Config("razor needs at least one observation".into()));
    }
    let theta_hat = model.mle();
    let neg_log_lik = -model.log_likelihood(&theta_hat);
    let dim_term = 0.5 * d as f64 * ((n as f64) / (2.0 * std::f64::consts::PI)).ln();

    let e2sq = config.eps2 * config.eps2;
    let log_prior = |theta: &[f64]| {
        let norm_sq: f64 = theta.iter().map(|v| v * v).sum();
        -norm_sq / (2.0 * e2sq) + 0.5 * small_log_det_shifted(&model.true_fim(theta), config.eps1)
    };
    let max_level = if d == 1 { 22 } else { 13 };
    let log_v = quad::adaptive_log_integral(&log_prior, &model.domain(), 1e-8, max_level)?;

    let j_hat = FisherMatrix {
        matrix: model.observed_fim(&theta_hat),
        kind: crate::fim::FimKind::Observed,
        n_samples: n,
    };
    let s = 1.0 / (n as f64 * e2sq);
    let observed_logdet = 0.5 * linalg::log_det_shifted(&j_hat.matrix, s)?;
    let true_logdet = 0.5 * linalg::log_det_shifted(&model.true_fim(&theta_hat), config.eps1)?;
    let remainder = remainder_term(&j_hat, &theta_hat, n, config)?;

    Ok(RazorReport::assemble(
        d,
        n,
        neg_log_lik,
        dim_term,
        log_v,
        0.0,
        observed_logdet,
        true_logdet,
        remainder,
        include_remainder,
        Vec::new(),
    ))
}

/// The classical Jeffreys-prior razor for a regular model:
/// fit term, dimension penalty, log Jeffreys volume over the bounded domain,
/// and the observed/true log-determinant ratio at the mle.
///
/// Requires the Fisher matrix to be strictly positive definite on the domain;
/// a vanishing or non-finite Jeffreys integrand is reported as divergence.
pub fn balasubramanian_razor(model: &dyn LowDimModel) -> Result<f64> {
    let d = model.dim();
    if d > 2 {
        return Err(Error::Config(format!(
            "the classical razor is implemented for at most 2 parameters, got {d}"
        )));
    }
    let n = model.n_samples();
    if n == 0 {
        return Err(Error::Config("razor needs at least one observation".into()));
    }
    let domain = model.domain();

    // positivity scan before integrating: the Jeffreys volume is only
    // defined where the metric is non-degenerate
    let scan = 256;
    let probe = |theta: &[f64]| -> Result<()> {
        let v = small_log_det_shifted(&model.true_fim(theta), 0.0);
        if !v.is_finite() {
            return Err(Error::Divergence(format!(
                "Fisher determinant not positive at theta = {theta:?}"
            )));
        }
        Ok(())
    };
    match d {
        1 => {
            let (a, b) = domain[0];
            for i in 0..=scan {
                let t = a + (b - a) * i as f64 / scan as f64;
                probe(&[t])?;
            }
        }
        _ => {
            let (a0, b0) = domain[0];
            let (a1, b1) = domain[1];
            for i in 0..=scan {
                for j in 0..=scan {
                    let t0 = a0 + (b0 - a0) * i as f64 / scan as f64;
                    let t1 = a1 + (b1 - a1) * j as f64 / scan as f64;
                    probe(&[t0, t1])?;
                }
            }
        }
    }

    let log_sqrt_det = |theta: &[f64]| 0.5 * small_log_det_shifted(&model.true_fim(theta), 0.0);
    let max_level = if d == 1 { 22 } else { 13 };
    let jeffreys = quad::adaptive_log_integral(&log_sqrt_det, &domain, 1e-8, max_level)?;
    if !jeffreys.is_finite() {
        return Err(Error::Divergence(
            "Jeffreys integral is not finite on the domain".into(),
        ));
    }

    let theta_hat = model.mle();
    let neg_log_lik = -model.log_likelihood(&theta_hat);
    let dim_term = 0.5 * d as f64 * ((n as f64) / (2.0 * std::f64::consts::PI)).ln();
    let observed = 0.5 * linalg::log_det_shifted(&model.observed_fim(&theta_hat), 0.0)?;
    let true_term = 0.5 * linalg::log_det_shifted(&model.true_fim(&theta_hat), 0.0)?;

    Ok(neg_log_lik + dim_term + jeffreys + observed - true_term)
}

/// Exact Bayesian code length `-log int p(X|theta) p(theta) dtheta` for a
/// model of at most two parameters, by adaptive trapezoidal quadrature in
/// log space. The prior is the bi-parametric density normalized by the same
/// quadrature; integration runs over the model domain clipped to
/// `+-20 eps2` per axis.
pub fn marginal_code_length_quadrature(
    model: &dyn LowDimModel,
    config: &PriorConfig,
) -> Result<f64> {
    let log_lik = |theta: &[f64]| model.log_likelihood(theta);
    let log_metric =
        |theta: &[f64]| 0.5 * small_log_det_shifted(&model.true_fim(theta), config.eps1);
    let bounds: Vec<(f64, f64)> = model
        .domain()
        .iter()
        .map(|&(lo, hi)| (lo.max(-20.0 * config.eps2), hi.min(20.0 * config.eps2)))
        .collect();
    marginal_code_length_quadrature_fn(&log_lik, &log_metric, &bounds, config)
}

/// [`marginal_code_length_quadrature`] over explicit closures: the
/// log-likelihood and the log metric factor `(1/2) log |I(theta) + eps1 I|`.
pub fn marginal_code_length_quadrature_fn(
    log_likelihood: &dyn Fn(&[f64]) -> f64,
    log_metric_factor: &dyn Fn(&[f64]) -> f64,
    bounds: &[(f64, f64)],
    config: &PriorConfig,
) -> Result<f64> {
    config.validate()?;
    if bounds.is_empty() || bounds.len() > 2 {
        return Err(Error::Config(format!(
            "quadrature code length supports 1 or 2 parameters, got {}",
            bounds.len()
        )));
    }
    let e2sq = config.eps2 * config.eps2;
    let log_prior_unnorm = |theta: &[f64]| {
        let norm_sq: f64 = theta.iter().map(|v| v * v).sum();
        -norm_sq / (2.0 * e2sq) + log_metric_factor(theta)
    };
    let max_level = if bounds.len() == 1 { 17 } else { 13 };
    let log_normalizer = quad::adaptive_log_integral(&log_prior_unnorm, bounds, 1e-6, max_level)?;
    let joint = |theta: &[f64]| log_likelihood(theta) + log_prior_unnorm(theta);
    let log_evidence = quad::adaptive_log_integral(&joint, bounds, 1e-6, max_level)?;
    Ok(-(log_evidence - log_normalizer))
}
