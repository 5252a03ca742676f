//! Small feed-forward networks with exact per-sample parameter-output
//! Jacobians under a unit-variance Gaussian output model.
//!
//! Layer `l` computes `h^l = W^l x^{l-1} + b^l`, post-activation
//! `x^l = phi(h^l)` for hidden layers; the final layer output is the raw
//! pre-activation. Parameters flatten into a single vector in the canonical
//! order `vec(W^1), ..., vec(W^L), b^1, ..., b^L`, each `vec(W)` row-major
//! (row index = output unit).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Elementwise activation applied to hidden layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative at `x`; the ReLU subgradient at the kink is 0.
    #[inline]
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Architecture of a feed-forward network plus its initialization seed.
///
/// `layer_widths = [M_0, ..., M_L]`: `M_0` is the input dimension, `M_L` the
/// output dimension, and there are `L` weight layers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub layer_widths: Vec<usize>,
    pub activation: Activation,
    pub seed: u64,
}

/// Versioned envelope for standalone JSON serialization.
#[derive(Serialize, Deserialize)]
struct NetworkSpecFile {
    format: u32,
    #[serde(flatten)]
    spec: NetworkSpec,
}

/// Versioned envelope for parameter vectors.
#[derive(Serialize, Deserialize)]
struct ParamVectorFile {
    format: u32,
    values: Vec<f64>,
}

const JSON_FORMAT: u32 = 1;

impl NetworkSpec {
    pub fn new(layer_widths: Vec<usize>, activation: Activation, seed: u64) -> Result<Self> {
        let spec = Self { layer_widths, activation, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_widths.len() < 2 {
            return Err(Error::Config(
                "layer_widths needs at least an input and an output width".into(),
            ));
        }
        if self.layer_widths.iter().any(|&w| w == 0) {
            return Err(Error::Config("all layer widths must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of weight layers `L`.
    pub fn num_layers(&self) -> usize {
        self.layer_widths.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.layer_widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_widths.last().unwrap()
    }

    /// Total number of free parameters `D`.
    pub fn param_count(&self) -> usize {
        (1..self.layer_widths.len())
            .map(|l| self.layer_widths[l - 1] * self.layer_widths[l] + self.layer_widths[l])
            .sum()
    }

    /// Offset of `W^l` (1-based layer index) in the flattened vector.
    fn weight_offset(&self, layer: usize) -> usize {
        (1..layer)
            .map(|l| self.layer_widths[l - 1] * self.layer_widths[l])
            .sum()
    }

    /// Offset of `b^l` (1-based layer index) in the flattened vector.
    fn bias_offset(&self, layer: usize) -> usize {
        let all_weights: usize = (1..self.layer_widths.len())
            .map(|l| self.layer_widths[l - 1] * self.layer_widths[l])
            .sum();
        all_weights + (1..layer).map(|l| self.layer_widths[l]).sum::<usize>()
    }

    /// Index of `W^l[i][j]` in the flattened vector.
    pub fn weight_index(&self, layer: usize, row: usize, col: usize) -> usize {
        self.weight_offset(layer) + row * self.layer_widths[layer - 1] + col
    }

    /// Index of `b^l[i]` in the flattened vector.
    pub fn bias_index(&self, layer: usize, row: usize) -> usize {
        self.bias_offset(layer) + row
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&NetworkSpecFile {
            format: JSON_FORMAT,
            spec: self.clone(),
        })?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: NetworkSpecFile = serde_json::from_str(s)?;
        if file.format != JSON_FORMAT {
            return Err(Error::Config(format!(
                "unsupported network spec format {}",
                file.format
            )));
        }
        file.spec.validate()?;
        Ok(file.spec)
    }
}

/// Flattened parameter vector in the canonical layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub values: Vec<f64>,
}

impl ParamVector {
    pub fn zeros(spec: &NetworkSpec) -> Self {
        Self { values: vec![0.0; spec.param_count()] }
    }

    pub fn from_values(spec: &NetworkSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.param_count() {
            return Err(Error::DimensionMismatch(format!(
                "spec has {} parameters, got {}",
                spec.param_count(),
                values.len()
            )));
        }
        Ok(Self { values })
    }

    /// Seeded initialization: weights zero-mean Gaussian with variance
    /// 1/fan-in, biases zero.
    pub fn init(spec: &NetworkSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut values = vec![0.0; spec.param_count()];
        for layer in 1..=spec.num_layers() {
            let fan_in = spec.layer_widths[layer - 1];
            let dist = Normal::new(0.0, (1.0 / fan_in as f64).sqrt()).unwrap();
            let rows = spec.layer_widths[layer];
            for i in 0..rows {
                for j in 0..fan_in {
                    values[spec.weight_index(layer, i, j)] = dist.sample(&mut rng);
                }
            }
        }
        Self { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(&ParamVectorFile {
            format: JSON_FORMAT,
            values: self.values.clone(),
        })?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: ParamVectorFile = serde_json::from_str(s)?;
        if file.format != JSON_FORMAT {
            return Err(Error::Config(format!(
                "unsupported parameter vector format {}",
                file.format
            )));
        }
        Ok(Self { values: file.values })
    }
}

/// Paired inputs and regression targets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.is_empty() || inputs.len() != targets.len() {
            return Err(Error::DimensionMismatch(format!(
                "need N >= 1 with matching inputs/targets, got {} inputs and {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        let in_dim = inputs[0].len();
        let out_dim = targets[0].len();
        for (x, y) in inputs.iter().zip(&targets) {
            if x.len() != in_dim || y.len() != out_dim {
                return Err(Error::DimensionMismatch("ragged dataset rows".into()));
            }
            if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("dataset entries must be finite".into()));
            }
        }
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn target_dim(&self) -> usize {
        self.targets[0].len()
    }
}

/// Pre- and post-activations of every layer for one input.
struct ForwardTrace {
    /// `post[l]` is `x^l`; `post[0]` is the input itself.
    post: Vec<Vec<f64>>,
    /// `pre[l - 1]` is `h^l` for layers `1..=L`.
    pre: Vec<Vec<f64>>,
}

fn check_input(spec: &NetworkSpec, theta: &ParamVector, x: &[f64]) -> Result<()> {
    if theta.dim() != spec.param_count() {
        return Err(Error::DimensionMismatch(format!(
            "parameter vector length {} vs spec D = {}",
            theta.dim(),
            spec.param_count()
        )));
    }
    if x.len() != spec.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "input length {} vs spec input dim {}",
            x.len(),
            spec.input_dim()
        )));
    }
    Ok(())
}

fn forward_trace(spec: &NetworkSpec, theta: &ParamVector, x: &[f64]) -> Result<ForwardTrace> {
    check_input(spec, theta, x)?;
    let num_layers = spec.num_layers();
    let mut post = Vec::with_capacity(num_layers + 1);
    let mut pre = Vec::with_capacity(num_layers);
    post.push(x.to_vec());
    for layer in 1..=num_layers {
        let rows = spec.layer_widths[layer];
        let cols = spec.layer_widths[layer - 1];
        let prev = &post[layer - 1];
        let mut h = vec![0.0; rows];
        for i in 0..rows {
            let mut acc = theta.values[spec.bias_index(layer, i)];
            let w_base = spec.weight_index(layer, i, 0);
            for j in 0..cols {
                acc += theta.values[w_base + j] * prev[j];
            }
            h[i] = acc;
        }
        let activated = if layer == num_layers {
            h.clone()
        } else {
            h.iter().map(|&v| spec.activation.apply(v)).collect()
        };
        pre.push(h);
        post.push(activated);
    }
    Ok(ForwardTrace { post, pre })
}

/// Network output `y = h^L` for one input (no activation on the last layer).
pub fn forward(spec: &NetworkSpec, theta: &ParamVector, x: &[f64]) -> Result<Vec<f64>> {
    Ok(forward_trace(spec, theta, x)?.post.pop().unwrap())
}

/// Exact `m x D` parameter-output Jacobian at one input, by reverse
/// accumulation. Row `k` is the gradient of output `y_k` with respect to the
/// flattened parameters.
pub fn jacobian(spec: &NetworkSpec, theta: &ParamVector, x: &[f64]) -> Result<Vec<Vec<f64>>> {
    let trace = forward_trace(spec, theta, x)?;
    let num_layers = spec.num_layers();
    let m = spec.output_dim();
    let d = spec.param_count();

    let mut rows = Vec::with_capacity(m);
    for k in 0..m {
        let mut grad = vec![0.0; d];
        // delta over the current layer's pre-activations, seeded at output k
        let mut delta = vec![0.0; m];
        delta[k] = 1.0;
        for layer in (1..=num_layers).rev() {
            let cols = spec.layer_widths[layer - 1];
            let post_prev = &trace.post[layer - 1];
            for (i, &di) in delta.iter().enumerate() {
                if di == 0.0 {
                    continue;
                }
                grad[spec.bias_index(layer, i)] = di;
                let w_base = spec.weight_index(layer, i, 0);
                for j in 0..cols {
                    grad[w_base + j] = di * post_prev[j];
                }
            }
            if layer > 1 {
                let pre_prev = &trace.pre[layer - 2];
                let mut next = vec![0.0; cols];
                for (i, &di) in delta.iter().enumerate() {
                    if di == 0.0 {
                        continue;
                    }
                    let w_base = spec.weight_index(layer, i, 0);
                    for j in 0..cols {
                        next[j] += theta.values[w_base + j] * di;
                    }
                }
                for j in 0..cols {
                    next[j] *= spec.activation.derivative(pre_prev[j]);
                }
                delta = next;
            }
        }
        rows.push(grad);
    }
    Ok(rows)
}

/// Gaussian log-likelihood of the dataset:
/// `sum_i [ -(m/2) log 2 pi - ||y_i - y(x_i)||^2 / 2 ]`.
pub fn log_likelihood(spec: &NetworkSpec, theta: &ParamVector, data: &Dataset) -> Result<f64> {
    let m = spec.output_dim() as f64;
    let mut total = 0.0;
    for (x, y) in data.inputs.iter().zip(&data.targets) {
        let pred = forward(spec, theta, x)?;
        if y.len() != pred.len() {
            return Err(Error::DimensionMismatch(format!(
                "target dim {} vs network output dim {}",
                y.len(),
                pred.len()
            )));
        }
        let ss: f64 = pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum();
        total += -0.5 * m * (2.0 * std::f64::consts::PI).ln() - 0.5 * ss;
    }
    Ok(total)
}

/// Gradient of the log-likelihood with respect to the flattened parameters,
/// accumulated by backpropagating the residuals.
pub fn log_likelihood_gradient(
    spec: &NetworkSpec,
    theta: &ParamVector,
    data: &Dataset,
) -> Result<Vec<f64>> {
    let d = spec.param_count();
    let num_layers = spec.num_layers();
    let mut grad = vec![0.0; d];
    for (x, y) in data.inputs.iter().zip(&data.targets) {
        let trace = forward_trace(spec, theta, x)?;
        let pred = &trace.post[num_layers];
        // d log p / d y = (target - prediction)
        let mut delta: Vec<f64> = y.iter().zip(pred).map(|(t, p)| t - p).collect();
        for layer in (1..=num_layers).rev() {
            let cols = spec.layer_widths[layer - 1];
            let post_prev = &trace.post[layer - 1];
            for (i, &di) in delta.iter().enumerate() {
                if di == 0.0 {
                    continue;
                }
                grad[spec.bias_index(layer, i)] += di;
                let w_base = spec.weight_index(layer, i, 0);
                for j in 0..cols {
                    grad[w_base + j] += di * post_prev[j];
                }
            }
            if layer > 1 {
                let pre_prev = &trace.pre[layer - 2];
                let mut next = vec![0.0; cols];
                for (i, &di) in delta.iter().enumerate() {
                    if di == 0.0 {
                        continue;
                    }
                    let w_base = spec.weight_index(layer, i, 0);
                    for j in 0..cols {
                        next[j] += theta.values[w_base + j] * di;
                    }
                }
                for j in 0..cols {
                    next[j] *= spec.activation.derivative(pre_prev[j]);
                }
                delta = next;
            }
        }
    }
    Ok(grad)
}

/// Sum of squared residuals over the dataset.
pub fn residual_sum_squares(
    spec: &NetworkSpec,
    theta: &ParamVector,
    data: &Dataset,
) -> Result<f64> {
    let mut total = 0.0;
    for (x, y) in data.inputs.iter().zip(&data.targets) {
        let pred = forward(spec, theta, x)?;
        total += pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>();
    }
    Ok(total)
}

/// Settings for [`fit_mle`]. Defaults: 50k iterations, gradient tolerance
/// 1e-6 (infinity norm of the log-likelihood gradient).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerSettings {
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Starting point; defaults to the seeded initialization of the spec.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub init: Option<ParamVector>,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self { max_iters: 50_000, grad_tol: 1e-6, init: None }
    }
}

/// Why the optimizer stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradientTolerance,
    MaxIterations,
    /// Backtracking could not find an improving step; the iterate is
    /// numerically stationary even if the gradient norm is above tolerance.
    LineSearchStalled,
}

/// Result of a maximum-likelihood fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub theta: ParamVector,
    pub termination: Termination,
    pub iterations: usize,
    pub grad_inf_norm: f64,
    pub log_likelihood: f64,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, &x| m.max(x.abs()))
}

/// Full-batch gradient descent with backtracking (Armijo) line search on the
/// squared-residual loss. Deterministic for a fixed spec seed and dataset.
pub fn fit_mle(
    spec: &NetworkSpec,
    data: &Dataset,
    settings: &OptimizerSettings,
) -> Result<FitResult> {
    if data.input_dim() != spec.input_dim() || data.target_dim() != spec.output_dim() {
        return Err(Error::DimensionMismatch(format!(
            "dataset dims ({}, {}) vs spec dims ({}, {})",
            data.input_dim(),
            data.target_dim(),
            spec.input_dim(),
            spec.output_dim()
        )));
    }
    let mut theta = match &settings.init {
        Some(t) => {
            ParamVector::from_values(spec, t.values.clone())?
        }
        None => ParamVector::init(spec),
    };

    let mut loss = 0.5 * residual_sum_squares(spec, &theta, data)?;
    let mut step = 1.0_f64;
    let mut iterations = 0;
    let mut termination = Termination::MaxIterations;
    let mut grad_inf = f64::INFINITY;
    // previous iterate and gradient for the Barzilai-Borwein step estimate
    let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;
    // spectral steps pair with a non-monotone acceptance window
    let mut recent_losses = std::collections::VecDeque::from([loss]);

    for iter in 0..settings.max_iters {
        iterations = iter;
        let grad_ll = log_likelihood_gradient(spec, &theta, data)?;
        grad_inf = inf_norm(&grad_ll);
        if !grad_inf.is_finite() || !loss.is_finite() {
            return Err(Error::Optimization(format!(
                "diverged at iteration {iter}: loss = {loss}, |grad| = {grad_inf}"
            )));
        }
        if grad_inf <= settings.grad_tol {
            termination = Termination::GradientTolerance;
            break;
        }
        // Barzilai-Borwein spectral step from the secant pair, backtracked
        // below for safety; plain doubling keeps progress when the secant
        // curvature is unusable
        if let Some((prev_theta, prev_grad)) = &previous {
            let mut s_dot_y = 0.0;
            let mut s_dot_s = 0.0;
            for i in 0..theta.values.len() {
                let s = theta.values[i] - prev_theta[i];
                // y is the change of the loss gradient, i.e. -grad_ll
                let y = prev_grad[i] - grad_ll[i];
                s_dot_y += s * y;
                s_dot_s += s * s;
            }
            if s_dot_y > 0.0 && s_dot_s > 0.0 {
                step = (s_dot_s / s_dot_y).clamp(1e-12, 1e8);
            } else {
                step = (step * 2.0).min(1e6);
            }
        }
        previous = Some((theta.values.clone(), grad_ll.clone()));

        // descent direction on the loss is the log-likelihood gradient itself
        let grad_norm_sq: f64 = grad_ll.iter().map(|g| g * g).sum();
        let reference_loss = recent_losses.iter().cloned().fold(loss, f64::max);
        let mut accepted = false;
        for _ in 0..60 {
            let candidate: Vec<f64> = theta
                .values
                .iter()
                .zip(&grad_ll)
                .map(|(t, g)| t + step * g)
                .collect();
            let cand = ParamVector { values: candidate };
            let cand_loss = 0.5 * residual_sum_squares(spec, &cand, data)?;
            if cand_loss <= reference_loss - 1e-4 * step * grad_norm_sq {
                theta = cand;
                loss = cand_loss;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            termination = Termination::LineSearchStalled;
            break;
        }
        recent_losses.push_back(loss);
        if recent_losses.len() > 10 {
            recent_losses.pop_front();
        }
    }

    let grad_ll = log_likelihood_gradient(spec, &theta, data)?;
    grad_inf = inf_norm(&grad_ll).min(grad_inf);
    let ll = log_likelihood(spec, &theta, data)?;
    if !ll.is_finite() {
        return Err(Error::Optimization("final log-likelihood is not finite".into()));
    }
    Ok(FitResult {
        theta,
        termination,
        iterations,
        grad_inf_norm: grad_inf,
        log_likelihood: ll,
    })
}

/// Draw a synthetic regression dataset from a teacher network of the given
/// spec, with standard normal inputs and optional Gaussian target noise.
pub fn synthetic_dataset(
    spec: &NetworkSpec,
    teacher: &ParamVector,
    n_samples: usize,
    noise_std: f64,
    seed: u64,
) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut inputs = Vec::with_capacity(n_samples);
    let mut targets = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let x: Vec<f64> = (0..spec.input_dim()).map(|_| normal.sample(&mut rng)).collect();
        let mut y = forward(spec, teacher, &x)?;
        if noise_std > 0.0 {
            for v in &mut y {
                *v += noise_std * normal.sample(&mut rng);
            }
        }
        inputs.push(x);
        targets.push(y);
    }
    Dataset::new(inputs, targets)
}

/// Convenience wrapper: inputs drawn standard normal, targets zero.
pub fn random_inputs(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    (0..n)
        .map(|_| (0..dim).map(|_| normal.sample(&mut rng)).collect())
        .collect()
}

/// Uniform random parameter vector in `[-scale, scale]`, seeded.
pub fn random_params(spec: &NetworkSpec, scale: f64, seed: u64) -> ParamVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..spec.param_count())
        .map(|_| rng.gen_range(-scale..=scale))
        .collect();
    ParamVector { values }
}
