//! The bi-parametric prior, its log-normalizer (the information volume) by
//! importance sampling, and the sandwich bounds on that volume.
//!
//! The unnormalized log-density at `theta` is
//! `-||theta||^2 / (2 eps2^2) + (1/2) log |I(theta) + eps1 I|`: a Gaussian
//! envelope times the shifted Riemannian volume factor. Large `eps2` with
//! small `eps1` approaches the Jeffreys construction where that is defined;
//! large `eps1` flattens the metric factor into a plain Gaussian prior.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fim::{true_fim_estimate, FisherMatrix, InputDistribution};
use crate::linalg::{self, SymMatrix};
use crate::network::{NetworkSpec, ParamVector};
use crate::seeds;

/// The two scales of the prior: `eps1` shifts the metric to positive
/// definiteness, `eps2` is the Gaussian envelope scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig {
    pub eps1: f64,
    pub eps2: f64,
}

impl PriorConfig {
    pub fn new(eps1: f64, eps2: f64) -> Result<Self> {
        let config = Self { eps1, eps2 };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps1 > 0.0) || !self.eps1.is_finite() {
            return Err(Error::Config(format!("eps1 must be positive, got {}", self.eps1)));
        }
        if !(self.eps2 > 0.0) || !self.eps2.is_finite() {
            return Err(Error::Config(format!("eps2 must be positive, got {}", self.eps2)));
        }
        Ok(())
    }
}

/// Monte-Carlo estimate of the log information volume with its bracket.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub log_v: f64,
    /// Delta-method standard error of `log_v`.
    pub std_error: f64,
    pub n_mc: usize,
    /// Lower sandwich bound (exact).
    pub log_lower: f64,
    /// Upper sandwich bound using the largest eigenvalue seen across draws.
    pub log_upper: f64,
    /// Largest Fisher eigenvalue observed over the sampled points.
    pub lambda_max_seen: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub warning: Option<String>,
}

/// Anything that can produce a Fisher matrix estimate at a parameter point.
/// Networks implement this through Monte-Carlo Jacobian averaging; test
/// doubles can return closed-form matrices.
pub trait FimSource: Sync {
    fn dim(&self) -> usize;
    fn fim_at(&self, theta: &[f64], seed: u64) -> Result<SymMatrix>;
}

/// Fisher matrices of a network, estimated from `n_mc` fresh inputs per call.
pub struct NetworkFimSource<'a> {
    pub spec: &'a NetworkSpec,
    pub input_dist: &'a InputDistribution,
    pub n_mc: usize,
}

impl FimSource for NetworkFimSource<'_> {
    fn dim(&self) -> usize {
        self.spec.param_count()
    }

    fn fim_at(&self, theta: &[f64], seed: u64) -> Result<SymMatrix> {
        let theta = ParamVector::from_values(self.spec, theta.to_vec())?;
        Ok(true_fim_estimate(self.spec, &theta, self.input_dist, self.n_mc, seed)?.matrix)
    }
}

/// A fixed matrix regardless of the parameter point. The degenerate
/// `SymMatrix::zeros` case makes the volume integrand constant.
pub struct ConstantFimSource(pub SymMatrix);

impl FimSource for ConstantFimSource {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn fim_at(&self, _theta: &[f64], _seed: u64) -> Result<SymMatrix> {
        Ok(self.0.clone())
    }
}

/// Log of the unnormalized prior density at `theta` given the Fisher matrix
/// there: `-||theta||^2/(2 eps2^2) + (1/2) log |I + eps1 I|`.
pub fn log_unnormalized_prior(
    theta: &ParamVector,
    config: &PriorConfig,
    fim_at_theta: &FisherMatrix,
) -> Result<f64> {
    config.validate()?;
    if fim_at_theta.dim() != theta.dim() {
        return Err(Error::DimensionMismatch(format!(
            "Fisher matrix dim {} vs parameter dim {}",
            fim_at_theta.dim(),
            theta.dim()
        )));
    }
    let gaussian = -theta.norm_sq() / (2.0 * config.eps2 * config.eps2);
    let volume = 0.5 * linalg::log_det_shifted(&fim_at_theta.matrix, config.eps1)?;
    Ok(gaussian + volume)
}

/// Sandwich bounds on the log information volume for dimension `d`:
/// `d log(sqrt(2 pi eps1) eps2)` below and the same with `eps1 + lambda_max`
/// above.
pub fn volume_bounds(d: usize, config: &PriorConfig, lambda_max: f64) -> (f64, f64) {
    let d = d as f64;
    let two_pi = 2.0 * std::f64::consts::PI;
    let lower = d * ((two_pi * config.eps1).sqrt() * config.eps2).ln();
    let upper = d * ((two_pi * (config.eps1 + lambda_max)).sqrt() * config.eps2).ln();
    (lower, upper)
}

/// Tighter upper bound from the trace:
/// `d log(sqrt(2 pi) eps2) + (d/2) log(trace/d + eps1)`.
pub fn volume_upper_bound_from_trace(d: usize, config: &PriorConfig, trace: f64) -> f64 {
    let df = d as f64;
    let two_pi = 2.0 * std::f64::consts::PI;
    df * (two_pi.sqrt() * config.eps2).ln() + 0.5 * df * (trace / df + config.eps1).ln()
}

/// Importance-sampled log information volume.
///
/// Draws `theta ~ N(0, eps2^2 I)` so that
/// `log V = D log(sqrt(2 pi) eps2) + log E[ sqrt(|I(theta) + eps1 I|) ]`,
/// with the expectation estimated by a log-mean-exp over `n_mc` draws and a
/// delta-method standard error. Deterministic for a fixed seed: per-draw
/// substreams are derived up front and summed in draw order.
pub fn log_volume_mc_source(
    source: &dyn FimSource,
    config: &PriorConfig,
    n_mc: usize,
    seed: u64,
) -> Result<VolumeEstimate> {
    config.validate()?;
    if n_mc == 0 {
        return Err(Error::Config("n_mc must be >= 1".into()));
    }
    let d = source.dim();
    let draw_seeds: Vec<(u64, u64)> = {
        let mut state = seed;
        (0..n_mc)
            .map(|_| {
                let a = seeds::splitmix64(&mut state);
                let b = seeds::splitmix64(&mut state);
                (a, b)
            })
            .collect()
    };

    // per draw: (1/2) log |I(theta) + eps1 I| and the largest eigenvalue seen
    let samples: Vec<Result<(f64, f64)>> = draw_seeds
        .par_iter()
        .map(|&(theta_seed, fim_seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(theta_seed);
            let normal = Normal::new(0.0, config.eps2).unwrap();
            let theta: Vec<f64> = (0..d).map(|_| normal.sample(&mut rng)).collect();
            let fim = source.fim_at(&theta, fim_seed)?;
            let eigenvalues = linalg::eigenvalues_sym(&fim)?;
            let clamped =
                linalg::clamp_psd_eigenvalues(&eigenvalues, linalg::psd_clamp_tolerance(&fim))?;
            let log_half_det = 0.5 * linalg::log_det_from_eigenvalues(&clamped, config.eps1)?;
            let lambda_max = clamped.first().copied().unwrap_or(0.0);
            Ok((log_half_det, lambda_max))
        })
        .collect();

    let mut gs = Vec::with_capacity(n_mc);
    let mut lambda_max_seen = 0.0_f64;
    for s in samples {
        let (g, l) = s?;
        gs.push(g);
        lambda_max_seen = lambda_max_seen.max(l);
    }

    // log-mean-exp with a delta-method error on the log scale
    let c = gs.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let us: Vec<f64> = gs.iter().map(|&g| (g - c).exp()).collect();
    let mean_u: f64 = us.iter().sum::<f64>() / n_mc as f64;
    let var_u: f64 = if n_mc > 1 {
        us.iter().map(|&u| (u - mean_u) * (u - mean_u)).sum::<f64>() / (n_mc as f64 - 1.0)
    } else {
        0.0
    };
    let std_error = (var_u / n_mc as f64).sqrt() / mean_u;

    let two_pi = 2.0 * std::f64::consts::PI;
    let gaussian_mass = d as f64 * (two_pi.sqrt() * config.eps2).ln();
    let log_v = gaussian_mass + c + mean_u.ln();

    let (log_lower, log_upper) = volume_bounds(d, config, lambda_max_seen);
    let warning = (n_mc < 100)
        .then(|| format!("n_mc = {n_mc} is below 100; the standard error is unreliable"));

    Ok(VolumeEstimate {
        log_v,
        std_error,
        n_mc,
        log_lower,
        log_upper,
        lambda_max_seen,
        warning,
    })
}

/// [`log_volume_mc_source`] for a network: each draw estimates the Fisher
/// matrix from `fim_mc_samples` fresh inputs of `input_dist`.
pub fn log_volume_mc(
    spec: &NetworkSpec,
    config: &PriorConfig,
    input_dist: &InputDistribution,
    fim_mc_samples: usize,
    n_mc: usize,
    seed: u64,
) -> Result<VolumeEstimate> {
    let source = NetworkFimSource { spec, input_dist, n_mc: fim_mc_samples };
    log_volume_mc_source(&source, config, n_mc, seed)
}
