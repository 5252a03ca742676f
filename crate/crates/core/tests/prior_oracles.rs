//! Prior-volume checks: the constant-Fisher analytic value, the sandwich
//! bounds on random networks, the trace inequality behind the stronger upper
//! bound, and the Gaussian limit at large metric shift.

mod common;

use occam::fim::{true_fim_estimate, FimKind, FisherMatrix, InputDistribution};
use occam::linalg::{self, SymMatrix};
use occam::network::{random_params, Activation, NetworkSpec, ParamVector};
use occam::prior::{
    log_unnormalized_prior, log_volume_mc, log_volume_mc_source, volume_bounds,
    volume_upper_bound_from_trace, ConstantFimSource, PriorConfig,
};

#[test]
fn constant_fim_volume_matches_analytic_value() {
    // single identity layer with standard normal inputs: the population
    // Fisher matrix is the 2x2 identity at every parameter point, so
    // log V = D log(sqrt(2 pi (1 + eps1)) eps2) exactly
    let spec = NetworkSpec::new(vec![1, 1], Activation::Identity, 0).unwrap();
    let config = PriorConfig::new(0.05, 1.3).unwrap();
    let dist = InputDistribution::StandardNormal { dim: 1 };
    let est = log_volume_mc(&spec, &config, &dist, 1024, 500, 31).unwrap();
    let two_pi = 2.0 * std::f64::consts::PI;
    let analytic = 2.0 * ((two_pi * 1.05).sqrt() * 1.3).ln();
    assert!(
        (est.log_v - analytic).abs() <= 3.0 * est.std_error + 5e-3,
        "estimate {} vs analytic {analytic} (se {})",
        est.log_v,
        est.std_error
    );
}

#[test]
fn degenerate_source_hits_lower_bound_exactly() {
    let config = PriorConfig::new(0.02, 2.0).unwrap();
    let source = ConstantFimSource(SymMatrix::zeros(5));
    let est = log_volume_mc_source(&source, &config, 400, 3).unwrap();
    let (lower, _) = volume_bounds(5, &config, 0.0);
    assert!((est.log_v - lower).abs() < 1e-10);
}

#[test]
fn sandwich_bounds_hold_on_random_networks() {
    let config = PriorConfig::new(0.01, 1.0).unwrap();
    for seed in 0..5 {
        let spec = NetworkSpec::new(vec![2, 3, 1], Activation::Tanh, seed).unwrap();
        let dist = InputDistribution::StandardNormal { dim: 2 };
        let est = log_volume_mc(&spec, &config, &dist, 16, 300, seed).unwrap();
        assert!(
            est.log_v >= est.log_lower - 3.0 * est.std_error,
            "seed {seed}: {} below {}",
            est.log_v,
            est.log_lower
        );
        assert!(
            est.log_v <= est.log_upper + 3.0 * est.std_error,
            "seed {seed}: {} above {}",
            est.log_v,
            est.log_upper
        );
        // the estimate invariant on its own fields
        assert!(est.log_lower <= est.log_v + 3.0 * est.std_error);
        assert!(est.log_v - 3.0 * est.std_error <= est.log_upper);
    }
}

#[test]
fn trace_bound_dominates_pointwise_metric_factor() {
    // (1/2) log |I(theta) + eps1 I| <= (D/2) log(tr/D + eps1) at every
    // sampled parameter point (the arithmetic-geometric mean step)
    let spec = NetworkSpec::new(vec![2, 2, 2], Activation::Tanh, 9).unwrap();
    let config = PriorConfig::new(0.03, 1.0).unwrap();
    let dist = InputDistribution::StandardNormal { dim: 2 };
    let d = spec.param_count();
    for seed in 0..10 {
        let theta = random_params(&spec, 1.5, seed);
        let fim = true_fim_estimate(&spec, &theta, &dist, 32, seed).unwrap();
        let half_logdet = 0.5 * linalg::log_det_shifted(&fim.matrix, config.eps1).unwrap();
        let am_gm =
            0.5 * d as f64 * (fim.matrix.trace() / d as f64 + config.eps1).ln();
        assert!(half_logdet <= am_gm + 1e-9, "seed {seed}: {half_logdet} > {am_gm}");
        // and the full-volume trace bound dominates the lambda-max lower one
        let (lower, _) = volume_bounds(d, &config, 0.0);
        let trace_bound = volume_upper_bound_from_trace(d, &config, fim.matrix.trace());
        assert!(lower <= trace_bound);
    }
}

#[test]
fn large_metric_shift_becomes_a_gaussian_prior() {
    // at eps1 = 1e6 * lambda_max the metric factor is theta-independent:
    // the difference from the Gaussian log-density has vanishing variance
    let spec = NetworkSpec::new(vec![1, 2, 1], Activation::Tanh, 4).unwrap();
    let dist = InputDistribution::StandardNormal { dim: 1 };

    let thetas: Vec<ParamVector> =
        (0..10).map(|s| random_params(&spec, 1.0, 100 + s)).collect();
    let fims: Vec<FisherMatrix> = thetas
        .iter()
        .enumerate()
        .map(|(i, t)| true_fim_estimate(&spec, t, &dist, 64, i as u64).unwrap())
        .collect();
    let lambda_max = fims
        .iter()
        .map(|f| linalg::eigenvalues_sym(&f.matrix).unwrap()[0])
        .fold(0.0_f64, f64::max);

    let config = PriorConfig::new(1e6 * lambda_max, 1.0).unwrap();
    let diffs: Vec<f64> = thetas
        .iter()
        .zip(&fims)
        .map(|(theta, fim)| {
            let logp = log_unnormalized_prior(theta, &config, fim).unwrap();
            let gaussian = -theta.norm_sq() / (2.0 * config.eps2 * config.eps2);
            logp - gaussian
        })
        .collect();
    let mean: f64 = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let variance: f64 =
        diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / diffs.len() as f64;
    assert!(variance < 1e-12, "variance {variance:e}");
}

#[test]
fn bounds_invariant_fields_are_consistent() {
    let config = PriorConfig::new(0.5, 2.0).unwrap();
    let source = ConstantFimSource(SymMatrix::diagonal(&[2.0, 0.5, 0.0]));
    let est = log_volume_mc_source(&source, &config, 150, 8).unwrap();
    assert!(est.log_lower <= est.log_upper);
    assert!((est.lambda_max_seen - 2.0).abs() < 1e-12);
    assert_eq!(est.n_mc, 150);
    assert!(est.warning.is_none());
}

#[test]
fn fisher_kind_is_true_estimate_for_sampled_matrices() {
    let spec = NetworkSpec::new(vec![2, 2, 1], Activation::Relu, 12).unwrap();
    let theta = ParamVector::init(&spec);
    let dist = InputDistribution::StandardNormal { dim: 2 };
    let fim = true_fim_estimate(&spec, &theta, &dist, 10, 0).unwrap();
    assert_eq!(fim.kind, FimKind::TrueEstimate);
    let config = PriorConfig::new(0.1, 1.0).unwrap();
    // prior evaluation composes the Gaussian part and the metric factor
    let val = log_unnormalized_prior(&theta, &config, &fim).unwrap();
    let expected = -theta.norm_sq() / 2.0
        + 0.5 * linalg::log_det_shifted(&fim.matrix, 0.1).unwrap();
    assert!((val - expected).abs() < 1e-12);
}
