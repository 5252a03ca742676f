//! Python bindings for the occam toolkit: network construction and fitting,
//! Fisher matrices and spectra, the prior volume, and razor reports.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use occam::fim::InputDistribution;
use occam::linalg::SymMatrix;
use occam::network::{Activation, OptimizerSettings};
use occam::prior::PriorConfig as CorePriorConfig;
use occam::razor::RazorConfig;

fn to_py_err(e: occam::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_activation(name: &str) -> PyResult<Activation> {
    match name {
        "relu" => Ok(Activation::Relu),
        "tanh" => Ok(Activation::Tanh),
        "identity" => Ok(Activation::Identity),
        other => Err(PyValueError::new_err(format!(
            "unknown activation '{other}' (expected relu, tanh or identity)"
        ))),
    }
}

fn sym_from_rows(rows: Vec<Vec<f64>>) -> PyResult<SymMatrix> {
    let dim = rows.len();
    let mut entries = Vec::with_capacity(dim * dim);
    for row in &rows {
        if row.len() != dim {
            return Err(PyValueError::new_err("matrix must be square"));
        }
        entries.extend_from_slice(row);
    }
    SymMatrix::from_row_major(dim, &entries).map_err(to_py_err)
}

fn matrix_rows(m: &SymMatrix) -> Vec<Vec<f64>> {
    (0..m.dim()).map(|i| m.row(i).to_vec()).collect()
}

/// Feed-forward architecture: layer widths, hidden activation, init seed.
#[pyclass(name = "NetworkSpec")]
#[derive(Clone)]
struct PyNetworkSpec {
    inner: occam::network::NetworkSpec,
}

#[pymethods]
impl PyNetworkSpec {
    #[new]
    #[pyo3(signature = (layer_widths, activation, seed=0))]
    fn new(layer_widths: Vec<usize>, activation: &str, seed: u64) -> PyResult<Self> {
        let inner =
            occam::network::NetworkSpec::new(layer_widths, parse_activation(activation)?, seed)
                .map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn layer_widths(&self) -> Vec<usize> {
        self.inner.layer_widths.clone()
    }

    #[getter]
    fn param_count(&self) -> usize {
        self.inner.param_count()
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    #[getter]
    fn output_dim(&self) -> usize {
        self.inner.output_dim()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json_string().map_err(to_py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: occam::network::NetworkSpec::from_json_str(text).map_err(to_py_err)? })
    }

    fn __repr__(&self) -> String {
        format!(
            "NetworkSpec(layer_widths={:?}, activation={:?}, seed={}, D={})",
            self.inner.layer_widths,
            self.inner.activation,
            self.inner.seed,
            self.inner.param_count()
        )
    }
}

/// Paired inputs and targets.
#[pyclass(name = "Dataset")]
#[derive(Clone)]
struct PyDataset {
    inner: occam::network::Dataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    fn new(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self { inner: occam::network::Dataset::new(inputs, targets).map_err(to_py_err)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn inputs(&self) -> Vec<Vec<f64>> {
        self.inner.inputs.clone()
    }

    #[getter]
    fn targets(&self) -> Vec<Vec<f64>> {
        self.inner.targets.clone()
    }
}

/// The two prior scales.
#[pyclass(name = "PriorConfig")]
#[derive(Clone)]
struct PyPriorConfig {
    inner: CorePriorConfig,
}

#[pymethods]
impl PyPriorConfig {
    #[new]
    fn new(eps1: f64, eps2: f64) -> PyResult<Self> {
        Ok(Self { inner: CorePriorConfig::new(eps1, eps2).map_err(to_py_err)? })
    }

    #[getter]
    fn eps1(&self) -> f64 {
        self.inner.eps1
    }

    #[getter]
    fn eps2(&self) -> f64 {
        self.inner.eps2
    }
}

/// Per-term razor breakdown.
#[pyclass(name = "RazorReport", get_all)]
struct PyRazorReport {
    d: usize,
    n: usize,
    neg_log_lik: f64,
    dim_term: f64,
    log_v: f64,
    log_v_std_error: f64,
    observed_logdet: f64,
    true_logdet: f64,
    remainder: f64,
    remainder_included: bool,
    total: f64,
    bic: f64,
    warnings: Vec<String>,
}

impl From<occam::razor::RazorReport> for PyRazorReport {
    fn from(r: occam::razor::RazorReport) -> Self {
        Self {
            d: r.d,
            n: r.n,
            neg_log_lik: r.neg_log_lik,
            dim_term: r.dim_term,
            log_v: r.log_v,
            log_v_std_error: r.log_v_std_error,
            observed_logdet: r.observed_logdet,
            true_logdet: r.true_logdet,
            remainder: r.remainder,
            remainder_included: r.remainder_included,
            total: r.total,
            bic: r.bic,
            warnings: r.warnings,
        }
    }
}

#[pymethods]
impl PyRazorReport {
    fn __repr__(&self) -> String {
        format!(
            "RazorReport(d={}, n={}, total={:.6}, bic={:.6})",
            self.d, self.n, self.total, self.bic
        )
    }
}

/// Seeded Gaussian initialization of the flattened parameter vector.
#[pyfunction]
fn init_params(spec: &PyNetworkSpec) -> Vec<f64> {
    occam::network::ParamVector::init(&spec.inner).values
}

fn param_vector(spec: &PyNetworkSpec, theta: Vec<f64>) -> PyResult<occam::network::ParamVector> {
    occam::network::ParamVector::from_values(&spec.inner, theta).map_err(to_py_err)
}

/// Network output at one input.
#[pyfunction]
fn forward(spec: &PyNetworkSpec, theta: Vec<f64>, x: Vec<f64>) -> PyResult<Vec<f64>> {
    occam::network::forward(&spec.inner, &param_vector(spec, theta)?, &x).map_err(to_py_err)
}

/// Exact parameter-output Jacobian (rows = outputs, columns = parameters).
#[pyfunction]
fn jacobian(spec: &PyNetworkSpec, theta: Vec<f64>, x: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    occam::network::jacobian(&spec.inner, &param_vector(spec, theta)?, &x).map_err(to_py_err)
}

/// Gaussian log-likelihood of the dataset.
#[pyfunction]
fn log_likelihood(spec: &PyNetworkSpec, theta: Vec<f64>, data: &PyDataset) -> PyResult<f64> {
    occam::network::log_likelihood(&spec.inner, &param_vector(spec, theta)?, &data.inner)
        .map_err(to_py_err)
}

/// Fit by spectral gradient descent; returns (theta, converged, iterations).
#[pyfunction]
#[pyo3(signature = (spec, data, max_iters=50_000, grad_tol=1e-6))]
fn fit_mle(
    spec: &PyNetworkSpec,
    data: &PyDataset,
    max_iters: usize,
    grad_tol: f64,
) -> PyResult<(Vec<f64>, bool, usize)> {
    let settings = OptimizerSettings { max_iters, grad_tol, init: None };
    let fit = occam::network::fit_mle(&spec.inner, &data.inner, &settings).map_err(to_py_err)?;
    Ok((
        fit.theta.values,
        fit.termination == occam::network::Termination::GradientTolerance,
        fit.iterations,
    ))
}

/// Synthetic regression data from a teacher network of the same
/// architecture.
#[pyfunction]
#[pyo3(signature = (spec, n_samples, teacher_seed, noise_std=0.0, seed=0))]
fn synthetic_dataset(
    spec: &PyNetworkSpec,
    n_samples: usize,
    teacher_seed: u64,
    noise_std: f64,
    seed: u64,
) -> PyResult<PyDataset> {
    let teacher_spec = occam::network::NetworkSpec { seed: teacher_seed, ..spec.inner.clone() };
    let teacher = occam::network::ParamVector::init(&teacher_spec);
    let data = occam::network::synthetic_dataset(&spec.inner, &teacher, n_samples, noise_std, seed)
        .map_err(to_py_err)?;
    Ok(PyDataset { inner: data })
}

/// Observed Fisher matrix at theta over the dataset inputs, as nested lists.
#[pyfunction]
fn observed_fim(
    spec: &PyNetworkSpec,
    theta: Vec<f64>,
    data: &PyDataset,
) -> PyResult<Vec<Vec<f64>>> {
    let f = occam::fim::observed_fim(&spec.inner, &param_vector(spec, theta)?, &data.inner)
        .map_err(to_py_err)?;
    Ok(matrix_rows(&f.matrix))
}

/// Monte-Carlo estimate of the population Fisher matrix with standard normal
/// inputs.
#[pyfunction]
#[pyo3(signature = (spec, theta, n_mc, seed=0))]
fn true_fim_estimate(
    spec: &PyNetworkSpec,
    theta: Vec<f64>,
    n_mc: usize,
    seed: u64,
) -> PyResult<Vec<Vec<f64>>> {
    let dist = InputDistribution::StandardNormal { dim: spec.inner.input_dim() };
    let f = occam::fim::true_fim_estimate(
        &spec.inner,
        &param_vector(spec, theta)?,
        &dist,
        n_mc,
        seed,
    )
    .map_err(to_py_err)?;
    Ok(matrix_rows(&f.matrix))
}

/// Eigenvalues of a symmetric matrix, sorted descending.
#[pyfunction]
fn sym_eigenvalues(matrix: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    occam::linalg::eigenvalues_sym(&sym_from_rows(matrix)?).map_err(to_py_err)
}

/// `log |A + shift I|` of a positive-semidefinite symmetric matrix.
#[pyfunction]
fn log_det_shifted(matrix: Vec<Vec<f64>>, shift: f64) -> PyResult<f64> {
    occam::linalg::log_det_shifted(&sym_from_rows(matrix)?, shift).map_err(to_py_err)
}

/// Full razor report for a fitted network.
#[pyfunction]
#[pyo3(signature = (spec, theta, data, prior, seed=0, volume_draws=400,
                    volume_fim_samples=16, fim_mc_factor=100, include_remainder=false))]
#[allow(clippy::too_many_arguments)]
fn razor(
    spec: &PyNetworkSpec,
    theta: Vec<f64>,
    data: &PyDataset,
    prior: &PyPriorConfig,
    seed: u64,
    volume_draws: usize,
    volume_fim_samples: usize,
    fim_mc_factor: usize,
    include_remainder: bool,
) -> PyResult<PyRazorReport> {
    let config = RazorConfig {
        prior: prior.inner,
        input_dist: InputDistribution::StandardNormal { dim: spec.inner.input_dim() },
        fim_mc_factor,
        volume_draws,
        volume_fim_samples,
        seed,
        include_remainder,
    };
    let report =
        occam::razor::razor(&spec.inner, &param_vector(spec, theta)?, &data.inner, &config)
            .map_err(to_py_err)?;
    Ok(report.into())
}

/// Bayesian information criterion.
#[pyfunction]
fn bic(neg_log_lik: f64, d: usize, n: usize) -> f64 {
    occam::razor::bic(neg_log_lik, d, n)
}

/// The closed-form BIC/MDL comparison curves as (d, bic, mdl) tuples.
#[pyfunction]
fn figure2_curves(d_values: Vec<usize>) -> PyResult<Vec<(usize, f64, f64)>> {
    let points = occam::experiments::figure2_curves(&d_values).map_err(to_py_err)?;
    Ok(points.into_iter().map(|p| (p.d, p.bic, p.mdl)).collect())
}

/// Marchenko-Pastur atom mass and support for an aspect ratio and scale.
#[pyfunction]
fn mp_density_summary(aspect: f64, scale: f64) -> PyResult<(f64, (f64, f64))> {
    let mp = occam::spectral::mp_density(aspect, scale).map_err(to_py_err)?;
    Ok((mp.atom_mass, mp.support))
}

#[pymodule]
fn occampy(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetworkSpec>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyPriorConfig>()?;
    m.add_class::<PyRazorReport>()?;
    m.add_function(wrap_pyfunction!(init_params, m)?)?;
    m.add_function(wrap_pyfunction!(forward, m)?)?;
    m.add_function(wrap_pyfunction!(jacobian, m)?)?;
    m.add_function(wrap_pyfunction!(log_likelihood, m)?)?;
    m.add_function(wrap_pyfunction!(fit_mle, m)?)?;
    m.add_function(wrap_pyfunction!(synthetic_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(observed_fim, m)?)?;
    m.add_function(wrap_pyfunction!(true_fim_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(sym_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(log_det_shifted, m)?)?;
    m.add_function(wrap_pyfunction!(razor, m)?)?;
    m.add_function(wrap_pyfunction!(bic, m)?)?;
    m.add_function(wrap_pyfunction!(figure2_curves, m)?)?;
    m.add_function(wrap_pyfunction!(mp_density_summary, m)?)?;
    Ok(())
}
