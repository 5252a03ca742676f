//! Fisher information matrices for the Gaussian network model.
//!
//! The observed matrix averages `J(x_i)^T J(x_i)` over the dataset inputs;
//! the "true" matrix is the same average over fresh inputs drawn from an
//! input distribution, which converges to the population Fisher information.
//! Both share the network's intrinsic singular directions; only the observed
//! one picks up extra rank deficiency from small samples.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix};
use crate::network::{jacobian, NetworkSpec, ParamVector};

/// Provenance of a Fisher matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FimKind {
    /// Averaged over the empirical sample inputs.
    Observed,
    /// Monte-Carlo average over fresh inputs from the input distribution.
    TrueEstimate,
}

/// A `D x D` positive-semidefinite information matrix with provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FisherMatrix {
    pub matrix: SymMatrix,
    pub kind: FimKind,
    /// Dataset size for observed matrices, Monte-Carlo draw count otherwise.
    pub n_samples: usize,
}

impl FisherMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Seedable distribution over network inputs, used when estimating the true
/// Fisher matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InputDistribution {
    /// Independent standard normal coordinates.
    StandardNormal { dim: usize },
    /// Always the zero vector.
    Zero { dim: usize },
    /// Always the same point.
    Fixed { point: Vec<f64> },
}

impl InputDistribution {
    pub fn dim(&self) -> usize {
        match self {
            InputDistribution::StandardNormal { dim } | InputDistribution::Zero { dim } => *dim,
            InputDistribution::Fixed { point } => point.len(),
        }
    }

    /// Draw `n` inputs deterministically from the seed.
    pub fn sample_n(&self, seed: u64, n: usize) -> Vec<Vec<f64>> {
        match self {
            InputDistribution::StandardNormal { dim } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let normal = Normal::new(0.0, 1.0).unwrap();
                (0..n)
                    .map(|_| (0..*dim).map(|_| normal.sample(&mut rng)).collect())
                    .collect()
            }
            InputDistribution::Zero { dim } => (0..n).map(|_| vec![0.0; *dim]).collect(),
            InputDistribution::Fixed { point } => (0..n).map(|_| point.clone()).collect(),
        }
    }
}

// Accumulate sum_i J(x_i)^T J(x_i) over a slice of inputs (upper triangle).
fn accumulate_jtj(
    spec: &NetworkSpec,
    theta: &ParamVector,
    inputs: &[Vec<f64>],
) -> Result<Vec<f64>> {
    let d = spec.param_count();
    let mut acc = vec![0.0; d * d];
    for x in inputs {
        let jac = jacobian(spec, theta, x)?;
        for row in &jac {
            for i in 0..d {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                let base = i * d;
                for j in i..d {
                    acc[base + j] += ri * row[j];
                }
            }
        }
    }
    Ok(acc)
}

fn jtj_average(
    spec: &NetworkSpec,
    theta: &ParamVector,
    inputs: &[Vec<f64>],
    kind: FimKind,
) -> Result<FisherMatrix> {
    let n = inputs.len();
    if n == 0 {
        return Err(Error::DimensionMismatch("need at least one input".into()));
    }
    let d = spec.param_count();

    // Fixed-size chunks summed in chunk order keep the result bitwise
    // deterministic regardless of thread scheduling.
    const CHUNK: usize = 64;
    let partials: Vec<Result<Vec<f64>>> = inputs
        .par_chunks(CHUNK)
        .map(|chunk| accumulate_jtj(spec, theta, chunk))
        .collect();
    let mut total = vec![0.0; d * d];
    for p in partials {
        let p = p?;
        for (t, v) in total.iter_mut().zip(&p) {
            *t += v;
        }
    }

    let scale = 1.0 / n as f64;
    let matrix = SymMatrix::from_fn(d, |i, j| total[i * d + j] * scale);
    Ok(FisherMatrix { matrix, kind, n_samples: n })
}

/// Observed Fisher matrix `(1/N) sum_i J(x_i)^T J(x_i)` over the dataset
/// inputs.
pub fn observed_fim(
    spec: &NetworkSpec,
    theta: &ParamVector,
    data: &crate::network::Dataset,
) -> Result<FisherMatrix> {
    jtj_average(spec, theta, &data.inputs, FimKind::Observed)
}

/// Monte-Carlo estimate of the true Fisher matrix using `n_mc` fresh inputs
/// from `input_dist`. Targets never enter: under the unit-variance Gaussian
/// model the information depends on Jacobians only.
pub fn true_fim_estimate(
    spec: &NetworkSpec,
    theta: &ParamVector,
    input_dist: &InputDistribution,
    n_mc: usize,
    seed: u64,
) -> Result<FisherMatrix> {
    if n_mc == 0 {
        return Err(Error::Config("n_mc must be >= 1".into()));
    }
    if input_dist.dim() != spec.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "input distribution dim {} vs spec input dim {}",
            input_dist.dim(),
            spec.input_dim()
        )));
    }
    let inputs = input_dist.sample_n(seed, n_mc);
    jtj_average(spec, theta, &inputs, FimKind::TrueEstimate)
}

/// Rank, signature and screen/radical eigenvector split of a Fisher matrix
/// at an eigenvalue threshold.
#[derive(Debug, Clone)]
pub struct SignatureReport {
    /// Number of eigenvalues above the threshold.
    pub d_local: usize,
    /// (positive, negative, zero) counts; negative is always 0 for a psd
    /// metric.
    pub signature: (usize, usize, usize),
    pub threshold: f64,
    /// Orthonormal eigenvectors spanning the information-carrying directions.
    pub screen_basis: Vec<Vec<f64>>,
    /// Orthonormal eigenvectors spanning the (near-)null directions.
    pub radical_basis: Vec<Vec<f64>>,
}

/// Split the spectrum at `threshold`: eigenvalues above it count toward the
/// local dimensionality, the rest span the radical.
pub fn local_dimensionality(f: &FisherMatrix, threshold: f64) -> Result<SignatureReport> {
    if threshold < 0.0 {
        return Err(Error::Config(format!("threshold must be >= 0, got {threshold}")));
    }
    let decomp = linalg::eig_sym(&f.matrix)?;
    let d = f.dim();
    let d_local = decomp.eigenvalues.iter().filter(|&&l| l > threshold).count();
    let screen_basis = decomp.eigenvectors[..d_local].to_vec();
    let radical_basis = decomp.eigenvectors[d_local..].to_vec();
    Ok(SignatureReport {
        d_local,
        signature: (d_local, 0, d - d_local),
        threshold,
        screen_basis,
        radical_basis,
    })
}

/// Default relative eigenvalue threshold for numerical rank decisions.
pub const RANK_REL_THRESHOLD: f64 = 1e-10;

/// Numerical rank at the default relative threshold
/// `RANK_REL_THRESHOLD * lambda_max`.
pub fn numerical_rank(f: &FisherMatrix) -> Result<usize> {
    let eigenvalues = linalg::eigenvalues_sym(&f.matrix)?;
    let lambda_max = eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    let threshold = RANK_REL_THRESHOLD * lambda_max;
    Ok(eigenvalues.iter().filter(|&&l| l > threshold).count())
}

/// Check the observed-rank bound: numerical rank <= min(D, m * n).
pub fn rank_bound_check(f: &FisherMatrix, m: usize, n: usize) -> Result<bool> {
    if f.kind != FimKind::Observed {
        return Err(Error::Config("rank bound applies to observed matrices".into()));
    }
    let rank = numerical_rank(f)?;
    Ok(rank <= f.dim().min(m * n))
}

const FIM_MAGIC: &[u8; 8] = b"FIMDUMP1";

/// Write the matrix as a binary file: 8-byte magic, then `dim`, `kind`
/// (0 observed / 1 true estimate) and `n_samples` as little-endian u64,
/// then the row-major entries as little-endian f64.
pub fn write_fim_binary(f: &FisherMatrix, path: &Path) -> Result<()> {
    let mut out = Vec::with_capacity(32 + 8 * f.matrix.entries().len());
    out.extend_from_slice(FIM_MAGIC);
    out.extend_from_slice(&(f.dim() as u64).to_le_bytes());
    let kind: u64 = match f.kind {
        FimKind::Observed => 0,
        FimKind::TrueEstimate => 1,
    };
    out.extend_from_slice(&kind.to_le_bytes());
    out.extend_from_slice(&(f.n_samples as u64).to_le_bytes());
    for v in f.matrix.entries() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

pub fn read_fim_binary(path: &Path) -> Result<FisherMatrix> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 32 || &bytes[..8] != FIM_MAGIC {
        return Err(Error::Config("not a Fisher matrix dump (bad magic)".into()));
    }
    let read_u64 = |off: usize| u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
    let dim = read_u64(8) as usize;
    let kind = match read_u64(16) {
        0 => FimKind::Observed,
        1 => FimKind::TrueEstimate,
        k => return Err(Error::Config(format!("unknown Fisher matrix kind tag {k}"))),
    };
    let n_samples = read_u64(24) as usize;
    let expected = 32 + 8 * dim * dim;
    if bytes.len() != expected {
        return Err(Error::Config(format!(
            "truncated Fisher matrix dump: expected {expected} bytes, got {}",
            bytes.len()
        )));
    }
    let entries: Vec<f64> = (0..dim * dim)
        .map(|i| f64::from_le_bytes(bytes[32 + 8 * i..40 + 8 * i].try_into().unwrap()))
        .collect();
    Ok(FisherMatrix {
        matrix: SymMatrix::from_row_major(dim, &entries)?,
        kind,
        n_samples,
    })
}

/// Human-readable CSV dump of the matrix entries.
pub fn write_fim_csv(f: &FisherMatrix, path: &Path) -> Result<()> {
    let mut out = String::new();
    for i in 0..f.dim() {
        let row: Vec<String> = f.matrix.row(i).iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}
