mod common;

use common::*;
use proptest::prelude::*;
use shrinkwave::nalgebra::DMatrix;
use shrinkwave::plm::{huber_objective, penalized_objective, PlmWarning, WaveletModel};
use shrinkwave::{
    denoise, fit_plm, theta_given_beta, DenoiseConfig, FilterPair, PlmData, PlmLambda, PlmSigma,
    ShrinkageRule, SigmaPolicy,
};

fn random_instance(seed: u64, n: usize, p: usize) -> (Vec<f64>, DMatrix<f64>, Vec<f64>) {
    let mut r = rng(seed);
    let z: Vec<f64> = gaussian(&mut r, n).iter().map(|v| 3.0 * v).collect();
    let a = DMatrix::from_vec(n, p, gaussian(&mut r, n * p));
    let beta = gaussian(&mut r, p);
    (z, a, beta)
}

/// `y = Xβ₀ + f + σε` with Gaussian covariates and a piecewise smooth `f`.
fn simulate(seed: u64, n: usize, beta0: &[f64], sigma: f64) -> PlmData {
    let mut r = rng(seed);
    let p = beta0.len();
    let x = DMatrix::from_vec(n, p, gaussian(&mut r, n * p));
    let eps = gaussian(&mut r, n);
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let t = (i + 1) as f64 / n as f64;
            let f = if t < 0.4 { 2.0 } else { -1.0 } + (2.0 * std::f64::consts::PI * t).sin();
            (0..p).map(|j| x[(i, j)] * beta0[j]).sum::<f64>() + f + sigma * eps[i]
        })
        .collect();
    PlmData::new(y, x).unwrap()
}

proptest! {
    #[test]
    fn profile_identity(seed in any::<u64>(), p in 1usize..=3, lambda in 0.01f64..5.0, i0 in 1usize..8) {
        let (z, a, beta) = random_instance(seed, 16, p);
        let theta = theta_given_beta(&z, &a, &beta, lambda, i0);
        let lhs = penalized_objective(&z, &a, &beta, &theta, lambda, i0);
        let rhs = huber_objective(&z, &a, &beta, lambda, i0);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
    }

    #[test]
    fn theta_is_the_partial_minimizer(seed in any::<u64>(), lambda in 0.01f64..5.0, i in 0usize..16, bump in -1.0f64..1.0) {
        let (z, a, beta) = random_instance(seed, 16, 2);
        let theta = theta_given_beta(&z, &a, &beta, lambda, 4);
        let best = penalized_objective(&z, &a, &beta, &theta, lambda, 4);
        let mut moved = theta.clone();
        moved[i] += bump;
        prop_assert!(penalized_objective(&z, &a, &beta, &moved, lambda, 4) >= best - 1e-12);
    }

    #[test]
    fn fit_is_a_local_minimum(seed in 0u64..10_000, p in 1usize..=3) {
        let data = simulate(seed, 64, &vec![1.5; p], 0.5);
        let basis = FilterPair::daubechies(2).unwrap();
        let fit = fit_plm(&data, &basis, 2, PlmSigma::Qr, PlmLambda::Universal).unwrap();
        let model = WaveletModel::new(&data, &basis, 2).unwrap();
        let i0 = model.i0();
        let at = huber_objective(&model.z, &model.a, &fit.beta_hat, fit.lambda, i0);
        prop_assert!((at - fit.objective).abs() <= 1e-9 * at.max(1.0));
        for j in 0..p {
            for h in [-1e-3, 1e-3] {
                let mut b = fit.beta_hat.clone();
                b[j] += h;
                prop_assert!(huber_objective(&model.z, &model.a, &b, fit.lambda, i0) >= at - 1e-12);
            }
        }
        // θ̂ is recomputed from β̂ by the same function
        prop_assert_eq!(&fit.theta_hat, &theta_given_beta(&model.z, &model.a, &fit.beta_hat, fit.lambda, i0));
    }
}

#[test]
fn tiny_brute_force_joint_minimum() {
    let basis = FilterPair::haar();
    for seed in 0..3 {
        let data = simulate(seed, 8, &[0.7], 0.8);
        let lambda = 0.9;
        let fit = fit_plm(
            &data,
            &basis,
            1,
            PlmSigma::Known(0.8),
            PlmLambda::Fixed(lambda),
        )
        .unwrap();
        let model = WaveletModel::new(&data, &basis, 1).unwrap();
        let (z, a, i0) = (&model.z, &model.a, model.i0());

        // the criterion separates over θ once β is fixed, so a dense grid per
        // coordinate is a joint grid search
        let thetas = linspace(-15.0, 15.0, 6001);
        let step_t = thetas[1] - thetas[0];
        let mut best = f64::INFINITY;
        for beta in linspace(-5.0, 5.0, 2001) {
            let mut total = 0.0;
            for i in 0..8 {
                let r = z[i] - a[(i, 0)] * beta;
                let pen = if i >= i0 { lambda } else { 0.0 };
                total += thetas
                    .iter()
                    .map(|&t| 0.5 * (r - t).powi(2) + pen * t.abs())
                    .fold(f64::INFINITY, f64::min);
            }
            best = best.min(total);
        }
        // grid error: each θ_i is off by at most half a step, and the profile
        // in β has curvature at most Σ a_i² around its minimum
        let beta_step: f64 = 10.0 / 2000.0;
        let col_norm2: f64 = a.column(0).iter().map(|v| v * v).sum();
        let resolution = 8.0 * (0.5 * (step_t / 2.0).powi(2) + lambda * step_t / 2.0)
            + 0.5 * col_norm2 * (beta_step / 2.0).powi(2);
        assert!(
            best >= fit.objective - 1e-9,
            "grid {best} below fit {}",
            fit.objective
        );
        assert!(
            best - fit.objective <= resolution,
            "gap {} > {resolution}",
            best - fit.objective
        );
    }
}

#[test]
fn zero_design_reduces_to_soft_denoising() {
    let n = 128;
    let data = simulate(4, n, &[0.0], 0.3);
    let zero = PlmData::new(data.y().to_vec(), DMatrix::zeros(n, 1)).unwrap();
    let basis = FilterPair::daubechies(3).unwrap();
    let fit = fit_plm(&zero, &basis, 3, PlmSigma::Known(0.3), PlmLambda::Universal).unwrap();
    assert_eq!(fit.beta_hat, vec![0.0]);
    assert!(fit.warnings.contains(&PlmWarning::ZeroColumn(0)));
    let mut cfg = DenoiseConfig::new(basis, ShrinkageRule::soft(1.0).unwrap());
    cfg.coarse_level = 3;
    cfg.sigma = SigmaPolicy::Known(0.3);
    let f = denoise(zero.y(), &cfg).unwrap();
    assert!(max_abs_diff(&f, &fit.f_hat) < 1e-12);
}

#[test]
fn intercept_column_is_flagged() {
    let n = 64;
    let data = simulate(9, n, &[1.0], 0.2);
    let mut x = DMatrix::from_element(n, 2, 1.0);
    x.set_column(1, &data.x().column(0));
    let with_intercept = PlmData::new(data.y().to_vec(), x).unwrap();
    let fit = fit_plm(
        &with_intercept,
        &FilterPair::haar(),
        2,
        PlmSigma::Qr,
        PlmLambda::Universal,
    )
    .unwrap();
    assert_eq!(fit.beta_hat[0], 0.0);
    assert!((fit.beta_hat[1] - 1.0).abs() < 0.2);
    assert!(fit.warnings.contains(&PlmWarning::ZeroColumn(0)));
}

#[test]
fn qr_sigma_calibration() {
    let basis = FilterPair::daubechies(4).unwrap();
    let hits = (0..100)
        .filter(|&rep| {
            let data = simulate(20_000 + rep, 512, &[1.0, -2.0], 1.0);
            let fit = fit_plm(&data, &basis, 3, PlmSigma::Qr, PlmLambda::Universal).unwrap();
            (fit.sigma_hat - 1.0).abs() <= 0.2
        })
        .count();
    assert!(hits >= 90, "{hits}");
}
