//! Razor checks: the quadratic remainder against its naive matrix form, the
//! Gaussian integral against fixed-grid quadrature, the conjugate marginal,
//! term identities, and the kernel-direction effect on the observed
//! log-determinant.

mod common;

use common::{
    conjugate_gaussian_log_marginal, log_trapezoid_2d_fixed, naive_matrix_remainder,
    random_psd, TestRng,
};
use occam::fim::{observed_fim, true_fim_estimate, FimKind, FisherMatrix, InputDistribution};
use occam::linalg::{self, SymMatrix};
use occam::models::{GaussianMeanModel, LowDimModel};
use occam::network::{
    forward, random_inputs, random_params, Activation, Dataset, NetworkSpec,
};
use occam::prior::PriorConfig;
use occam::razor::{
    balasubramanian_razor, bic, laplace_gaussian_integral, marginal_code_length_quadrature,
    razor, razor_low_dim, remainder_bound_check, remainder_term, RazorConfig,
};
use occam::spectral::{simplified_razor, spectrum_of};
use proptest::prelude::*;

fn observed(matrix: SymMatrix, n: usize) -> FisherMatrix {
    FisherMatrix { matrix, kind: FimKind::Observed, n_samples: n }
}

#[test]
fn remainder_eigen_form_matches_naive_matrix_form() {
    let mut rng = TestRng::new(2);
    for case in 0..40 {
        let d = rng.usize_in(2, 7);
        let j = random_psd(d, d + 1, rng.next_u64());
        let theta: Vec<f64> = (0..d).map(|_| rng.range(-1.5, 1.5)).collect();
        let n = rng.usize_in(1, 80);
        let eps2 = rng.range(0.3, 3.0);
        let config = PriorConfig::new(1e-4, eps2).unwrap();
        let eigen = remainder_term(&observed(j.clone(), n), &theta, n, &config).unwrap();
        let naive = naive_matrix_remainder(&j, &theta, n, eps2);
        assert!(
            (eigen - naive).abs() <= 1e-9 * naive.abs().max(1.0),
            "case {case}: {eigen} vs {naive}"
        );
    }
}

#[test]
fn laplace_integral_matches_quadrature_oracle() {
    let mut rng = TestRng::new(5);
    for case in 0..3 {
        let j = random_psd(2, 3, rng.next_u64());
        let theta = [rng.range(-0.8, 0.8), rng.range(-0.8, 0.8)];
        let n = rng.usize_in(5, 40);
        let eps2 = rng.range(0.6, 1.2);
        let config = PriorConfig::new(1e-4, eps2).unwrap();
        let closed = laplace_gaussian_integral(&observed(j.clone(), n), &theta, n, &config)
            .unwrap();
        let log_f = |x: f64, y: f64| {
            let dv = [x - theta[0], y - theta[1]];
            let q = linalg::quadratic_form(&j, &dv).unwrap();
            -(x * x + y * y) / (2.0 * eps2 * eps2) - 0.5 * n as f64 * q
        };
        let numeric = log_trapezoid_2d_fixed(&log_f, (-20.0 * eps2, 20.0 * eps2), 4096);
        assert!(
            (closed - numeric).abs() <= 1e-5 * closed.abs().max(1.0),
            "case {case}: closed {closed} vs quadrature {numeric}"
        );
    }
}

#[test]
fn marginal_quadrature_matches_conjugate_closed_form() {
    // Gaussian-mean model: the metric factor is constant, so the prior is
    // exactly N(0, eps2^2) and the marginal has a closed form
    let data = vec![0.3, -0.5, 1.1, 0.7, -0.2];
    let eps2 = 1.0;
    let model = GaussianMeanModel::new(data.clone(), (-1e6, 1e6));
    let config = PriorConfig::new(100.0, eps2).unwrap();
    let ours = marginal_code_length_quadrature(&model, &config).unwrap();
    let closed = -conjugate_gaussian_log_marginal(&data, eps2);
    assert!((ours - closed).abs() < 1e-4, "{ours} vs {closed}");
}

#[test]
fn razor_fit_term_is_exact_at_interpolation() {
    // targets generated by the network: zero residuals exactly
    let spec = NetworkSpec::new(vec![2, 3, 1], Activation::Tanh, 21).unwrap();
    let theta = random_params(&spec, 0.6, 22);
    let inputs = random_inputs(2, 5, 23);
    let targets: Vec<Vec<f64>> = inputs
        .iter()
        .map(|x| forward(&spec, &theta, x).unwrap())
        .collect();
    let data = Dataset::new(inputs, targets).unwrap();
    let config = RazorConfig {
        volume_draws: 100,
        volume_fim_samples: 8,
        ..RazorConfig::new(
            PriorConfig::new(1e-4, 1.0).unwrap(),
            InputDistribution::StandardNormal { dim: 2 },
        )
    };
    let report = razor(&spec, &theta, &data, &config).unwrap();
    let expected = 5.0 * 0.5 * (2.0 * std::f64::consts::PI).ln();
    assert_eq!(report.neg_log_lik, expected);
    assert!(report.warnings.is_empty(), "{:?}", report.warnings);
}

#[test]
fn added_null_units_shift_observed_logdet_by_exactly_the_floor() {
    // widen a network with a unit whose incoming and outgoing weights are
    // all zero: the function is unchanged and every added direction is an
    // exact kernel direction, so the observed log-determinant moves by the
    // per-dimension floor log(1/(N eps2^2))/2 and no more
    let n = 6;
    let eps2 = 1.0;
    let shift = 1.0 / (n as f64 * eps2 * eps2);

    let small = NetworkSpec::new(vec![2, 3, 1], Activation::Tanh, 31).unwrap();
    let theta_small = random_params(&small, 1.0, 32);
    let inputs = random_inputs(2, n, 33);
    let data = Dataset::new(inputs, vec![vec![0.0]; n]).unwrap();

    let large = NetworkSpec::new(vec![2, 4, 1], Activation::Tanh, 31).unwrap();
    let mut theta_large = occam::network::ParamVector::zeros(&large);
    for unit in 0..3 {
        for j in 0..2 {
            theta_large.values[large.weight_index(1, unit, j)] =
                theta_small.values[small.weight_index(1, unit, j)];
        }
        theta_large.values[large.bias_index(1, unit)] =
            theta_small.values[small.bias_index(1, unit)];
        theta_large.values[large.weight_index(2, 0, unit)] =
            theta_small.values[small.weight_index(2, 0, unit)];
    }
    theta_large.values[large.bias_index(2, 0)] = theta_small.values[small.bias_index(2, 0)];
    // unit 3 of the large net keeps all-zero weights and bias

    for x in &data.inputs {
        assert_eq!(
            forward(&small, &theta_small, x).unwrap(),
            forward(&large, &theta_large, x).unwrap()
        );
    }

    let fim_small = observed_fim(&small, &theta_small, &data).unwrap();
    let fim_large = observed_fim(&large, &theta_large, &data).unwrap();
    let logdet_small = 0.5 * linalg::log_det_shifted(&fim_small.matrix, shift).unwrap();
    let logdet_large = 0.5 * linalg::log_det_shifted(&fim_large.matrix, shift).unwrap();

    let added = (large.param_count() - small.param_count()) as f64;
    let delta = logdet_large - logdet_small;
    let per_dim_floor = 0.5 * shift.ln();
    assert!((delta - added * per_dim_floor).abs() < 1e-9, "delta {delta}");
    assert!(delta <= added * per_dim_floor + 1e-9);
}

#[test]
fn simplified_razor_tracks_full_terms_for_constant_diagonal_fim() {
    // single identity layer: the population Fisher matrix is the identity,
    // constant and diagonal, where the closed-form volume turns the full
    // razor terms into (D/2) log N + observed half log-det
    let spec = NetworkSpec::new(vec![1, 1], Activation::Identity, 41).unwrap();
    let teacher = random_params(&spec, 0.5, 42);
    let n = 100;
    let data =
        occam::network::synthetic_dataset(&spec, &teacher, n, 0.2, 43).unwrap();
    let fit = occam::network::fit_mle(
        &spec,
        &data,
        &occam::network::OptimizerSettings::default(),
    )
    .unwrap();
    let config = PriorConfig::new(1e-3, 1.0).unwrap();
    let d = spec.param_count();

    let i_hat = true_fim_estimate(
        &spec,
        &fit.theta,
        &InputDistribution::StandardNormal { dim: 1 },
        20_000,
        44,
    )
    .unwrap();

    // full razor terms with the closed-form volume substituted:
    // dim_term + log_v_closed + observed_logdet - true_logdet
    let s = 1.0 / (n as f64 * config.eps2 * config.eps2);
    let j_hat = observed_fim(&spec, &fit.theta, &data).unwrap();
    let true_logdet = 0.5 * linalg::log_det_shifted(&i_hat.matrix, config.eps1).unwrap();
    let log_v_closed = 0.5 * d as f64 * (2.0 * std::f64::consts::PI).ln()
        + d as f64 * config.eps2.ln()
        + true_logdet * 2.0 * 0.5;
    let dim_term = 0.5 * d as f64 * ((n as f64) / (2.0 * std::f64::consts::PI)).ln();
    let observed_logdet = 0.5 * linalg::log_det_shifted(&j_hat.matrix, s).unwrap();
    let full_terms = dim_term + log_v_closed + observed_logdet - true_logdet;

    let spectrum = spectrum_of(&i_hat, 8).unwrap();
    let simplified = simplified_razor(0.0, d, n, &spectrum, &config).unwrap();
    assert!(
        (full_terms - simplified).abs() < 0.5,
        "full terms {full_terms} vs simplified {simplified}"
    );
}

#[test]
fn spectral_bridge_identity_is_exact() {
    let spec = NetworkSpec::new(vec![2, 3, 1], Activation::Tanh, 51).unwrap();
    let theta = random_params(&spec, 1.0, 52);
    let i_hat = true_fim_estimate(
        &spec,
        &theta,
        &InputDistribution::StandardNormal { dim: 2 },
        200,
        53,
    )
    .unwrap();
    let s = 1.0 / (40.0 * 1.7 * 1.7);
    let spectrum = spectrum_of(&i_hat, 8).unwrap();
    let d = spectrum.dim as f64;
    let mean_log: f64 =
        spectrum.eigenvalues.iter().map(|&l| (l + s).ln()).sum::<f64>() / d;
    let bridge = 0.5 * d * mean_log;
    let direct = 0.5 * linalg::log_det_shifted(&i_hat.matrix, s).unwrap();
    assert!((bridge - direct).abs() < 1e-10);
}

#[test]
fn classical_razor_term_identity_against_bic() {
    // Gaussian-mean model: both Fisher matrices are 1, so chi and BIC
    // differ exactly by the order-one geometric terms
    let data: Vec<f64> = (0..100).map(|i| 0.3 + 0.01 * (i as f64 % 7.0)).collect();
    let domain = (-8.0, 8.0);
    let model = GaussianMeanModel::new(data.clone(), domain);
    let chi = balasubramanian_razor(&model).unwrap();
    let nll = -model.log_likelihood(&model.mle());
    let bic_val = bic(nll, 1, 100);
    let expected_gap =
        -0.5 * (2.0 * std::f64::consts::PI).ln() + (domain.1 - domain.0).ln();
    assert!(
        ((chi - bic_val) - expected_gap).abs() < 1e-6,
        "chi - bic = {} vs {expected_gap}",
        chi - bic_val
    );
}

#[test]
fn low_dim_razor_approaches_classical_razor_at_large_scale() {
    let model = occam::models::BernoulliModel::new(35, 100, (0.01, 0.99)).unwrap();
    let chi = balasubramanian_razor(&model).unwrap();
    let config = PriorConfig::new(1e-6, 1000.0).unwrap();
    let report = razor_low_dim(&model, &config, false).unwrap();
    assert!(
        (report.total - chi).abs() < 0.05,
        "razor {} vs classical {chi}",
        report.total
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // both remainder bounds hold on arbitrary psd instances
    #[test]
    fn remainder_bounds_always_hold(
        seed in 0u64..100_000,
        d in 1usize..7,
        n in 1usize..200,
        eps2 in 0.1f64..5.0,
    ) {
        let j = random_psd(d, d.max(2), seed);
        let mut state = seed ^ 0x5555;
        let theta: Vec<f64> = (0..d)
            .map(|_| (occam::seeds::splitmix64(&mut state) % 4000) as f64 / 1000.0 - 2.0)
            .collect();
        let config = PriorConfig::new(1e-5, eps2).unwrap();
        let check = remainder_bound_check(&observed(j, n), &theta, n, &config).unwrap();
        prop_assert!(check.both_hold(), "loose {} tight {} r {}",
            check.loose_bound, check.tight_bound, check.remainder);
    }

    // the report total never drifts from its defining sum
    #[test]
    fn report_total_identity_under_remainder_flag(include in any::<bool>()) {
        let model = GaussianMeanModel::new(vec![0.5, -0.1, 0.9], (-50.0, 50.0));
        let config = PriorConfig::new(0.01, 1.0).unwrap();
        let report = razor_low_dim(&model, &config, include).unwrap();
        let mut expected = report.neg_log_lik + report.dim_term + report.log_v
            + report.observed_logdet - report.true_logdet;
        if include {
            expected += report.remainder;
        }
        prop_assert_eq!(report.total, expected);
    }
}
