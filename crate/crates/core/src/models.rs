//! One- and two-parameter regular models with closed-form Fisher
//! information. These are the desk-scale references that the classical
//! razor, the quadrature code length, and the limit checks run against.

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

/// A model with at most two parameters, cheap enough to evaluate on
/// quadrature grids: log-likelihood of its captured data, both Fisher
/// matrices in closed form, the mle, and a bounded parameter domain for
/// integration.
pub trait LowDimModel {
    fn dim(&self) -> usize;
    fn n_samples(&self) -> usize;
    fn log_likelihood(&self, theta: &[f64]) -> f64;
    /// Population Fisher matrix at `theta`.
    fn true_fim(&self, theta: &[f64]) -> SymMatrix;
    /// Observed (empirical-curvature) Fisher matrix at `theta`.
    fn observed_fim(&self, theta: &[f64]) -> SymMatrix;
    fn mle(&self) -> Vec<f64>;
    /// Bounded box the quadratures integrate over.
    fn domain(&self) -> Vec<(f64, f64)>;
}

/// `x ~ N(theta, 1)` with unknown mean. Unit Fisher information everywhere.
#[derive(Debug, Clone)]
pub struct GaussianMeanModel {
    pub data: Vec<f64>,
    pub domain: (f64, f64),
}

impl GaussianMeanModel {
    pub fn new(data: Vec<f64>, domain: (f64, f64)) -> Self {
        Self { data, domain }
    }
}

impl LowDimModel for GaussianMeanModel {
    fn dim(&self) -> usize {
        1
    }

    fn n_samples(&self) -> usize {
        self.data.len()
    }

    fn log_likelihood(&self, theta: &[f64]) -> f64 {
        let t = theta[0];
        let log_2pi = (2.0 * std::f64::consts::PI).ln();
        self.data
            .iter()
            .map(|x| -0.5 * log_2pi - 0.5 * (x - t) * (x - t))
            .sum()
    }

    fn true_fim(&self, _theta: &[f64]) -> SymMatrix {
        SymMatrix::identity(1)
    }

    fn observed_fim(&self, _theta: &[f64]) -> SymMatrix {
        SymMatrix::identity(1)
    }

    fn mle(&self) -> Vec<f64> {
        let n = self.data.len().max(1) as f64;
        vec![self.data.iter().sum::<f64>() / n]
    }

    fn domain(&self) -> Vec<(f64, f64)> {
        vec![self.domain]
    }
}

/// Bernoulli trials with success probability `theta`, restricted to a closed
/// subinterval of (0, 1) so the Jeffreys integral is proper.
#[derive(Debug, Clone)]
pub struct BernoulliModel {
    pub successes: usize,
    pub trials: usize,
    pub domain: (f64, f64),
}

impl BernoulliModel {
    pub fn new(successes: usize, trials: usize, domain: (f64, f64)) -> Result<Self> {
        if successes > trials || trials == 0 {
            return Err(Error::Config(format!(
                "need 0 <= successes <= trials with trials >= 1, got {successes}/{trials}"
            )));
        }
        if !(0.0 < domain.0 && domain.0 < domain.1 && domain.1 < 1.0) {
            return Err(Error::Config(format!(
                "domain must satisfy 0 < lo < hi < 1, got ({}, {})",
                domain.0, domain.1
            )));
        }
        Ok(Self { successes, trials, domain })
    }
}

impl LowDimModel for BernoulliModel {
    fn dim(&self) -> usize {
        1
    }

    fn n_samples(&self) -> usize {
        self.trials
    }

    fn log_likelihood(&self, theta: &[f64]) -> f64 {
        let p = theta[0];
        let k = self.successes as f64;
        let n = self.trials as f64;
        k * p.ln() + (n - k) * (1.0 - p).ln()
    }

    fn true_fim(&self, theta: &[f64]) -> SymMatrix {
        let p = theta[0];
        SymMatrix::diagonal(&[1.0 / (p * (1.0 - p))])
    }

    fn observed_fim(&self, theta: &[f64]) -> SymMatrix {
        // -(1/N) d^2/dp^2 of the log-likelihood
        let p = theta[0];
        let k = self.successes as f64;
        let n = self.trials as f64;
        SymMatrix::diagonal(&[(k / (p * p) + (n - k) / ((1.0 - p) * (1.0 - p))) / n])
    }

    fn mle(&self) -> Vec<f64> {
        let raw = self.successes as f64 / self.trials as f64;
        vec![raw.clamp(self.domain.0, self.domain.1)]
    }

    fn domain(&self) -> Vec<(f64, f64)> {
        vec![self.domain]
    }
}

/// Linear-Gaussian regression `y ~ N(theta . x, 1)` with a fixed design and
/// a supplied constant population Fisher matrix (e.g. the identity for
/// standard normal inputs). One or two features.
#[derive(Debug, Clone)]
pub struct LinearModel {
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<f64>,
    pub population_fim: SymMatrix,
    pub domain: Vec<(f64, f64)>,
}

impl LinearModel {
    pub fn new(
        xs: Vec<Vec<f64>>,
        ys: Vec<f64>,
        population_fim: SymMatrix,
        domain: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::DimensionMismatch(
                "need matching nonempty xs and ys".into(),
            ));
        }
        let d = xs[0].len();
        if d == 0 || d > 2 {
            return Err(Error::Config(format!("feature dim must be 1 or 2, got {d}")));
        }
        if xs.iter().any(|x| x.len() != d) || population_fim.dim() != d || domain.len() != d {
            return Err(Error::DimensionMismatch("inconsistent feature dims".into()));
        }
        Ok(Self { xs, ys, population_fim, domain })
    }

    fn design_gram(&self) -> SymMatrix {
        let d = self.xs[0].len();
        let n = self.xs.len() as f64;
        SymMatrix::from_fn(d, |i, j| {
            self.xs.iter().map(|x| x[i] * x[j]).sum::<f64>() / n
        })
    }
}

impl LowDimModel for LinearModel {
    fn dim(&self) -> usize {
        self.xs[0].len()
    }

    fn n_samples(&self) -> usize {
        self.xs.len()
    }

    fn log_likelihood(&self, theta: &[f64]) -> f64 {
        let log_2pi = (2.0 * std::f64::consts::PI).ln();
        self.xs
            .iter()
            .zip(&self.ys)
            .map(|(x, y)| {
                let pred: f64 = x.iter().zip(theta).map(|(a, b)| a * b).sum();
                -0.5 * log_2pi - 0.5 * (y - pred) * (y - pred)
            })
            .sum()
    }

    fn true_fim(&self, _theta: &[f64]) -> SymMatrix {
        self.population_fim.clone()
    }

    fn observed_fim(&self, _theta: &[f64]) -> SymMatrix {
        self.design_gram()
    }

    fn mle(&self) -> Vec<f64> {
        // normal equations on the (at most 2x2) design Gram matrix
        let d = self.dim();
        let gram = self.design_gram();
        let n = self.xs.len() as f64;
        let rhs: Vec<f64> = (0..d)
            .map(|i| {
                self.xs
                    .iter()
                    .zip(&self.ys)
                    .map(|(x, y)| x[i] * y)
                    .sum::<f64>()
                    / n
            })
            .collect();
        match d {
            1 => vec![rhs[0] / gram.get(0, 0)],
            2 => {
                let (a, b, c) = (gram.get(0, 0), gram.get(0, 1), gram.get(1, 1));
                let det = a * c - b * b;
                vec![
                    (c * rhs[0] - b * rhs[1]) / det,
                    (a * rhs[1] - b * rhs[0]) / det,
                ]
            }
            _ => unreachable!("dim checked at construction"),
        }
    }

    fn domain(&self) -> Vec<(f64, f64)> {
        self.domain.clone()
    }
}
