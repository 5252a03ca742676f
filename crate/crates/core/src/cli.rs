//! Command-line entry points: razor reports, spectrum dumps, the comparison
//! curves, and a self-contained verification table.
//!
//! Every run is fully determined by the config document (plus explicit flag
//! overrides); all randomness is seeded from it. Exit codes: 0 success,
//! 1 verification failure, 2 usage or config error, 3 numeric failure.

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiments::{figure2_csv, figure2_curves, figure2_svg};
use crate::fim::{observed_fim, true_fim_estimate, FimKind, InputDistribution};
use crate::linalg;
use crate::network::{
    fit_mle, synthetic_dataset, Dataset, NetworkSpec, OptimizerSettings, ParamVector,
};
use crate::prior::{log_volume_mc_source, ConstantFimSource, PriorConfig};
use crate::razor::{
    laplace_gaussian_integral, razor, remainder_bound_check, RazorConfig, RazorReport,
};
use crate::seeds;
use crate::spectral::{logdet_limit_check, mp_density, spectrum_of, wishart};
use crate::{fim, quad};

const CONFIG_FORMAT: u32 = 1;

/// Dataset source: synthesized from a teacher network of the same
/// architecture, or loaded from a JSON file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum DatasetSource {
    Synthetic {
        n_samples: usize,
        teacher_seed: u64,
        #[serde(default)]
        noise_std: f64,
    },
    File { path: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    #[serde(default = "default_volume_draws")]
    pub volume_draws: usize,
    #[serde(default = "default_volume_fim_samples")]
    pub volume_fim_samples: usize,
    #[serde(default = "default_fim_mc_factor")]
    pub fim_mc_factor: usize,
}

fn default_volume_draws() -> usize {
    400
}
fn default_volume_fim_samples() -> usize {
    16
}
fn default_fim_mc_factor() -> usize {
    100
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            volume_draws: default_volume_draws(),
            volume_fim_samples: default_volume_fim_samples(),
            fim_mc_factor: default_fim_mc_factor(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_grad_tol")]
    pub grad_tol: f64,
}

fn default_max_iters() -> usize {
    50_000
}
fn default_grad_tol() -> f64 {
    1e-6
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { max_iters: default_max_iters(), grad_tol: default_grad_tol() }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMatrix {
    Observed,
    TrueEstimate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_spectrum_matrix")]
    pub matrix: SpectrumMatrix,
}

fn default_bins() -> usize {
    16
}
fn default_spectrum_matrix() -> SpectrumMatrix {
    SpectrumMatrix::Observed
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { bins: default_bins(), matrix: default_spectrum_matrix() }
    }
}

/// The complete run record: everything a command needs, versioned.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub format: u32,
    #[serde(default)]
    pub seed: u64,
    pub network: NetworkSpec,
    pub dataset: DatasetSource,
    pub prior: PriorConfig,
    #[serde(default)]
    pub monte_carlo: MonteCarloConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    /// Input distribution for population-Fisher estimates; defaults to
    /// standard normal inputs of the network's input width.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_distribution: Option<InputDistribution>,
}

/// On-disk dataset document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    format: u32,
    inputs: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: ExperimentConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != CONFIG_FORMAT {
            return Err(Error::Config(format!(
                "unsupported config format {}, expected {CONFIG_FORMAT}",
                self.format
            )));
        }
        self.network.validate()?;
        self.prior.validate()?;
        if let DatasetSource::Synthetic { n_samples, .. } = &self.dataset {
            if *n_samples == 0 {
                return Err(Error::Config("dataset.n_samples must be >= 1".into()));
            }
        }
        if let Some(dist) = &self.input_distribution {
            if dist.dim() != self.network.input_dim() {
                return Err(Error::Config(format!(
                    "input_distribution dim {} vs network input dim {}",
                    dist.dim(),
                    self.network.input_dim()
                )));
            }
        }
        Ok(())
    }

    fn build_dataset(&self, config_dir: &Path) -> Result<Dataset> {
        match &self.dataset {
            DatasetSource::Synthetic { n_samples, teacher_seed, noise_std } => {
                let teacher_spec =
                    NetworkSpec { seed: *teacher_seed, ..self.network.clone() };
                let teacher = ParamVector::init(&teacher_spec);
                synthetic_dataset(
                    &self.network,
                    &teacher,
                    *n_samples,
                    *noise_std,
                    seeds::derive(self.seed, 0xDA7A),
                )
            }
            DatasetSource::File { path } => {
                let resolved = if path.is_absolute() {
                    path.clone()
                } else {
                    config_dir.join(path)
                };
                let text = std::fs::read_to_string(&resolved)?;
                let file: DatasetFile = serde_json::from_str(&text)?;
                if file.format != CONFIG_FORMAT {
                    return Err(Error::Config(format!(
                        "unsupported dataset format {}",
                        file.format
                    )));
                }
                Dataset::new(file.inputs, file.targets)
            }
        }
    }

    fn input_dist(&self) -> InputDistribution {
        self.input_distribution.clone().unwrap_or(InputDistribution::StandardNormal {
            dim: self.network.input_dim(),
        })
    }
}

#[derive(Parser)]
#[command(
    name = "occam",
    about = "Description-length razor reports for small feed-forward networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the configured network and write its razor report (JSON + CSV row).
    Razor {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Fold the quadratic remainder into the total.
        #[arg(long)]
        include_remainder: bool,
    },
    /// Fit the configured network and write its Fisher spectrum histogram.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write the closed-form BIC/MDL comparison curves for D in 1..=1000.
    Figure2 {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also render an SVG chart.
        #[arg(long)]
        svg: bool,
    },
    /// Run the built-in bound and oracle checks; exit 1 if any fail.
    Verify {
        #[arg(long)]
        seed: Option<u64>,
        /// Force one check to fail (debugging the exit-code contract).
        #[arg(long, hide = true)]
        inject_failure: bool,
    },
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Json(_) | Error::Io(_) | Error::DimensionMismatch(_) => 2,
        _ => 3,
    }
}

fn out_dir(out: Option<PathBuf>) -> Result<PathBuf> {
    let dir = out.unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn cmd_razor(
    config_path: &Path,
    out: Option<PathBuf>,
    seed: Option<u64>,
    include_remainder: bool,
) -> Result<()> {
    let mut config = ExperimentConfig::load(config_path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    let dir = out_dir(out)?;
    let config_dir = config_path.parent().unwrap_or(Path::new("."));
    let data = config.build_dataset(config_dir)?;

    let fit_settings = OptimizerSettings {
        max_iters: config.fit.max_iters,
        grad_tol: config.fit.grad_tol,
        init: None,
    };
    let fit = fit_mle(&config.network, &data, &fit_settings)?;

    let razor_config = RazorConfig {
        prior: config.prior,
        input_dist: config.input_dist(),
        fim_mc_factor: config.monte_carlo.fim_mc_factor,
        volume_draws: config.monte_carlo.volume_draws,
        volume_fim_samples: config.monte_carlo.volume_fim_samples,
        seed: seeds::derive(config.seed, 0x4A20),
        include_remainder,
    };
    let report = razor(&config.network, &fit.theta, &data, &razor_config)?;

    std::fs::write(dir.join("razor_report.json"), report.to_json_string()?)?;
    std::fs::write(
        dir.join("razor_report.csv"),
        format!("{}\n{}\n", RazorReport::CSV_HEADER, report.csv_row()),
    )?;
    println!(
        "razor total {:.6} (fit {:?} after {} iterations, |grad| {:.2e})",
        report.total, fit.termination, fit.iterations, fit.grad_inf_norm
    );
    println!("wrote {}", dir.join("razor_report.json").display());
    Ok(())
}

fn cmd_spectrum(config_path: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<()> {
    let mut config = ExperimentConfig::load(config_path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    let dir = out_dir(out)?;
    let config_dir = config_path.parent().unwrap_or(Path::new("."));
    let data = config.build_dataset(config_dir)?;

    let fit_settings = OptimizerSettings {
        max_iters: config.fit.max_iters,
        grad_tol: config.fit.grad_tol,
        init: None,
    };
    let fit = fit_mle(&config.network, &data, &fit_settings)?;

    let matrix = match config.spectrum.matrix {
        SpectrumMatrix::Observed => observed_fim(&config.network, &fit.theta, &data)?,
        SpectrumMatrix::TrueEstimate => true_fim_estimate(
            &config.network,
            &fit.theta,
            &config.input_dist(),
            config.monte_carlo.fim_mc_factor.max(1) * data.len(),
            seeds::derive(config.seed, 0x5EC7),
        )?,
    };
    let spectrum = spectrum_of(&matrix, config.spectrum.bins)?;
    std::fs::write(dir.join("spectrum.csv"), spectrum.histogram_csv())?;
    std::fs::write(dir.join("spectrum_moments.json"), spectrum.moments_json())?;
    println!(
        "spectrum of {} matrix: dim {}, m1 {:.6}, m2 {:.6}",
        match matrix.kind {
            FimKind::Observed => "observed",
            FimKind::TrueEstimate => "estimated true",
        },
        spectrum.dim,
        spectrum.m1,
        spectrum.m2
    );
    println!("wrote {}", dir.join("spectrum.csv").display());
    Ok(())
}

fn cmd_figure2(out: Option<PathBuf>, svg: bool) -> Result<()> {
    let dir = out_dir(out)?;
    let d_values: Vec<usize> = (1..=1000).collect();
    let points = figure2_curves(&d_values)?;
    std::fs::write(dir.join("figure2.csv"), figure2_csv(&points))?;
    if svg {
        std::fs::write(dir.join("figure2.svg"), figure2_svg(&points))?;
    }
    println!("wrote {}", dir.join("figure2.csv").display());
    Ok(())
}

/// Outcome of one verification check.
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, result: Result<(bool, String)>) -> CheckResult {
    match result {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult { name, passed: false, detail: format!("error: {e}") },
    }
}

/// The built-in verification suite: bound and identity checks at desk scale.
pub fn run_verification(seed: u64, inject_failure: bool) -> Vec<CheckResult> {
    let mut results = Vec::new();

    // observed-rank bound over random architectures and sample counts
    results.push(check("rank bound (observed FIM)", (|| {
        let mut failures = 0;
        let cases = 25;
        for k in 0..cases {
            let s = seeds::derive(seed, k);
            let widths = vec![
                2 + (s % 3) as usize,
                2 + ((s >> 8) % 4) as usize,
                1 + ((s >> 16) % 2) as usize,
            ];
            let spec = NetworkSpec::new(widths, crate::network::Activation::Tanh, s)?;
            let n = 1 + (s >> 24) as usize % 8;
            let inputs = crate::network::random_inputs(spec.input_dim(), n, s ^ 1);
            let targets = vec![vec![0.0; spec.output_dim()]; n];
            let data = Dataset::new(inputs, targets)?;
            let theta = ParamVector::init(&spec);
            let f = observed_fim(&spec, &theta, &data)?;
            let limit = if inject_failure {
                // deliberately impossible cap used to test the exit contract
                0
            } else {
                f.dim().min(spec.output_dim() * n)
            };
            if fim::numerical_rank(&f)? > limit {
                failures += 1;
            }
        }
        Ok((failures == 0, format!("{}/{cases} cases within min(D, mN)", cases - failures)))
    })()));

    // psd metric signature: no negative eigenvalues
    results.push(check("metric signature (psd)", (|| {
        let mut ok = true;
        for k in 0..10 {
            let s = seeds::derive(seed, 100 + k);
            let spec =
                NetworkSpec::new(vec![2, 3, 2], crate::network::Activation::Relu, s)?;
            let theta = ParamVector::init(&spec);
            let dist = InputDistribution::StandardNormal { dim: 2 };
            let f = true_fim_estimate(&spec, &theta, &dist, 20, s)?;
            let report = fim::local_dimensionality(&f, 1e-12)?;
            ok &= report.signature.1 == 0
                && report.signature.0 + report.signature.2 == f.dim();
        }
        Ok((ok, "signature (d, 0, D-d) on 10 random estimates".into()))
    })()));

    // remainder closed form, its bounds, and the Gaussian-integral cross-check
    results.push(check("remainder bounds + closed form", (|| {
        let mut ok = true;
        for k in 0..50 {
            let s = seeds::derive(seed, 200 + k);
            let d = 2 + (s % 5) as usize;
            let f = fim::FisherMatrix {
                matrix: random_psd(d, s),
                kind: FimKind::Observed,
                n_samples: 1,
            };
            let theta: Vec<f64> =
                (0..d).map(|i| ((seeds::derive(s, i as u64) % 1000) as f64 / 500.0) - 1.0).collect();
            let n = 1 + (s >> 12) as usize % 60;
            let config = PriorConfig::new(1e-4, 0.5 + (s % 7) as f64 * 0.35)?;
            let bounds = remainder_bound_check(&f, &theta, n, &config)?;
            ok &= bounds.both_hold();
            // errors internally if the two remainder routes disagree
            laplace_gaussian_integral(&f, &theta, n, &config)?;
        }
        Ok((ok, "50 random instances".into()))
    })()));

    // volume sandwich on small networks plus the degenerate exact case
    results.push(check("information volume sandwich", (|| {
        let config = PriorConfig::new(0.01, 1.0)?;
        let mut ok = true;
        for k in 0..3 {
            let s = seeds::derive(seed, 300 + k);
            let spec =
                NetworkSpec::new(vec![2, 2, 1], crate::network::Activation::Tanh, s)?;
            let dist = InputDistribution::StandardNormal { dim: 2 };
            let est = crate::prior::log_volume_mc(&spec, &config, &dist, 8, 300, s)?;
            ok &= est.log_v >= est.log_lower - 3.0 * est.std_error - 1e-9
                && est.log_v <= est.log_upper + 3.0 * est.std_error + 1e-9;
        }
        let degenerate = ConstantFimSource(linalg::SymMatrix::zeros(4));
        let est = log_volume_mc_source(&degenerate, &config, 200, seed)?;
        ok &= (est.log_v - est.log_lower).abs() < 1e-10;
        Ok((ok, "3 networks in bounds; degenerate case exact".into()))
    })()));

    // scaled log-determinant approaches the spectral-density integral
    results.push(check("spectral log-det limit", (|| {
        let b = 0.1;
        let mp = mp_density(1.0, 1.0)?;
        let rho_integral = mp.expectation(|l| (l + b).ln());
        let sampler = |d: usize, s: u64| wishart(d, d, 1.0, s);
        let table = logdet_limit_check(&sampler, &[40, 80, 160], b, rho_integral, 6, seed)?;
        let final_gap = table.rows.last().unwrap().gap;
        let ok = table.shrinking && final_gap < 0.05 * rho_integral.abs();
        Ok((ok, format!("gap at d=160: {final_gap:.4} vs integral {rho_integral:.4}")))
    })()));

    // closed-form Gaussian integral against direct quadrature
    results.push(check("Gaussian integral vs quadrature", (|| {
        let mut ok = true;
        for k in 0..2 {
            let s = seeds::derive(seed, 400 + k);
            let f = fim::FisherMatrix {
                matrix: random_psd(2, s),
                kind: FimKind::Observed,
                n_samples: 1,
            };
            let theta = [0.4, -0.3];
            let n = 10;
            let config = PriorConfig::new(1e-4, 1.0)?;
            let closed = laplace_gaussian_integral(&f, &theta, n, &config)?;
            let e2sq = config.eps2 * config.eps2;
            let log_f = |t: &[f64]| {
                let dx = [t[0] - theta[0], t[1] - theta[1]];
                let quad_form = linalg::quadratic_form(&f.matrix, &dx).unwrap();
                -(t[0] * t[0] + t[1] * t[1]) / (2.0 * e2sq) - 0.5 * n as f64 * quad_form
            };
            let box2 = [(-20.0, 20.0), (-20.0, 20.0)];
            let numeric = quad::adaptive_log_integral(&log_f, &box2, 1e-7, 13)?;
            ok &= (closed - numeric).abs() <= 1e-5 * (1.0 + closed.abs());
        }
        Ok((ok, "2 random 2-parameter instances at 1e-5".into()))
    })()));

    // razor report arithmetic and the spectrum/log-det bridge
    results.push(check("razor identities", (|| {
        let spec = NetworkSpec::new(vec![1, 2, 1], crate::network::Activation::Tanh, seed)?;
        let teacher = ParamVector::init(&spec);
        let data = synthetic_dataset(&spec, &teacher, 12, 0.05, seeds::derive(seed, 500))?;
        let fit = fit_mle(&spec, &data, &OptimizerSettings::default())?;
        let config = RazorConfig {
            volume_draws: 120,
            volume_fim_samples: 8,
            seed,
            ..RazorConfig::new(
                PriorConfig::new(1e-4, 1.0)?,
                InputDistribution::StandardNormal { dim: 1 },
            )
        };
        let report = razor(&spec, &fit.theta, &data, &config)?;
        let identity = report.neg_log_lik + report.dim_term + report.log_v
            + report.observed_logdet
            - report.true_logdet;
        let mut ok = report.total == identity;

        let i_hat = true_fim_estimate(
            &spec,
            &fit.theta,
            &InputDistribution::StandardNormal { dim: 1 },
            300,
            seed,
        )?;
        let spectrum = spectrum_of(&i_hat, 8)?;
        let shift = 1.0 / (data.len() as f64 * config.prior.eps2 * config.prior.eps2);
        let mean_log: f64 = spectrum.eigenvalues.iter().map(|&l| (l + shift).ln()).sum::<f64>()
            / spectrum.dim as f64;
        let bridge = 0.5 * spectrum.dim as f64 * mean_log;
        let direct = 0.5 * linalg::log_det_shifted(&i_hat.matrix, shift)?;
        ok &= (bridge - direct).abs() < 1e-10;
        Ok((ok, "total identity exact; spectral bridge at 1e-10".into()))
    })()));

    // comparison curves: closed forms and tail monotonicity
    results.push(check("comparison curves", (|| {
        let ds: Vec<usize> = (1..=1000).collect();
        let points = figure2_curves(&ds)?;
        let mut ok = true;
        for p in &points {
            let d = p.d as f64;
            let bic = 10.0 / (d + 1.0) + d / 10.0;
            let m = (0.5 * d).sqrt();
            let mdl = bic - 0.002 * d / ((1.0 / m + 0.001) * (1.0 / m + 0.001));
            ok &= (p.bic - bic).abs() <= 1e-12 * bic.abs().max(1.0);
            ok &= (p.mdl - mdl).abs() <= 1e-12 * mdl.abs().max(1.0);
        }
        for w in points[99..].windows(2) {
            ok &= w[1].bic > w[0].bic && w[1].mdl < w[0].mdl;
        }
        Ok((ok, "values exact; tails monotone on [100, 1000]".into()))
    })()));

    // analytic Jacobians against central finite differences
    results.push(check("Jacobian finite differences", (|| {
        let mut worst = 0.0_f64;
        for k in 0..5 {
            let s = seeds::derive(seed, 600 + k);
            let spec =
                NetworkSpec::new(vec![3, 4, 2], crate::network::Activation::Tanh, s)?;
            let theta = ParamVector::init(&spec);
            let x = crate::network::random_inputs(3, 1, s)[0].clone();
            let jac = crate::network::jacobian(&spec, &theta, &x)?;
            let h = 1e-5;
            for i in 0..spec.param_count() {
                let mut plus = theta.clone();
                plus.values[i] += h;
                let mut minus = theta.clone();
                minus.values[i] -= h;
                let yp = crate::network::forward(&spec, &plus, &x)?;
                let ym = crate::network::forward(&spec, &minus, &x)?;
                for r in 0..2 {
                    let fd = (yp[r] - ym[r]) / (2.0 * h);
                    let scale = jac[r][i].abs().max(1.0);
                    worst = worst.max((jac[r][i] - fd).abs() / scale);
                }
            }
        }
        Ok((worst < 1e-5, format!("max relative error {worst:.2e}")))
    })()));

    results
}

fn random_psd(d: usize, seed: u64) -> linalg::SymMatrix {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let g: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..d).map(|_| normal.sample(&mut rng)).collect())
        .collect();
    linalg::SymMatrix::from_fn(d, |i, j| {
        (0..d).map(|k| g[k][i] * g[k][j]).sum::<f64>() / d as f64
    })
}

fn cmd_verify(seed: u64, inject_failure: bool) -> i32 {
    let results = run_verification(seed, inject_failure);
    let mut all_passed = true;
    for r in &results {
        println!(
            "{:<36} {}  {}",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.detail
        );
        all_passed &= r.passed;
    }
    if all_passed {
        println!("all {} checks passed", results.len());
        0
    } else {
        println!("verification FAILED");
        1
    }
}

/// Parse arguments and run; returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Razor { config, out, seed, include_remainder } => {
            cmd_razor(&config, out, seed, include_remainder)
        }
        Command::Spectrum { config, out, seed } => cmd_spectrum(&config, out, seed),
        Command::Figure2 { out, svg } => cmd_figure2(out, svg),
        Command::Verify { seed, inject_failure } => {
            return cmd_verify(seed.unwrap_or(0), inject_failure);
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e) as i32
        }
    }
}
