mod common;

use common::*;
use shrinkwave::montecarlo::{
    make_noisy_with, mse, population_sd, replication_rng, write_results_csv, DEFAULT_SEED,
};
use shrinkwave::{
    denoise, make_noisy, run_mc, BenchMethod, DenoiseConfig, FilterPair, McConfig, MethodDefaults,
    ShrinkageRule, SigmaPolicy, TestSignal,
};

fn small_sweep(seed: u64) -> McConfig {
    let defaults = MethodDefaults::default();
    let methods = ["noisy", "soft", "hard", "firm", "neigh_coeff", "soft_ti"]
        .iter()
        .map(|m| BenchMethod::standard(m, &defaults).unwrap())
        .collect();
    McConfig {
        methods,
        signals: TestSignal::ALL.to_vec(),
        snrs: vec![3.0, 7.0],
        n: 128,
        reps: 4,
        base_seed: seed,
    }
}

#[test]
fn same_seed_same_table() {
    let a = run_mc(&small_sweep(5));
    let b = run_mc(&small_sweep(5));
    assert_eq!(a, b);
    let c = run_mc(&small_sweep(6));
    assert_ne!(a, c);
}

#[test]
fn thread_count_does_not_change_results() {
    let cfg = small_sweep(DEFAULT_SEED);
    let with = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_mc(&cfg))
    };
    assert_eq!(with(1), with(4));
}

#[test]
fn cells_are_finite_and_mean_is_exact() {
    for r in run_mc(&small_sweep(11)) {
        assert!(r.failure.is_none(), "{}: {:?}", r.method, r.failure);
        assert_eq!(r.per_rep.len(), r.reps);
        assert!(r.per_rep.iter().all(|e| e.is_finite() && *e >= 0.0));
        let mean = r.per_rep.iter().sum::<f64>() / r.reps as f64;
        assert_eq!(r.mean_mse, mean);
    }
}

#[test]
fn scaling_multiplies_mse_by_c_squared() {
    let truth = TestSignal::Corner.sample(256);
    let basis = FilterPair::daubechies(4).unwrap();
    for rule in [
        ShrinkageRule::soft(1.0).unwrap(),
        ShrinkageRule::hard(1.0).unwrap(),
    ] {
        for c in [0.01, 3.0, 250.0] {
            let scaled: Vec<f64> = truth.iter().map(|v| c * v).collect();
            let (noisy, sigma) = make_noisy_with(&truth, 3.0, &mut rng(8)).unwrap();
            let (noisy_c, sigma_c) = make_noisy_with(&scaled, 3.0, &mut rng(8)).unwrap();
            assert!((sigma_c / sigma - c).abs() < 1e-12 * c);
            let mut cfg = DenoiseConfig::new(basis.clone(), rule);
            cfg.coarse_level = 4;
            cfg.sigma = SigmaPolicy::Known(sigma);
            let base = mse(&denoise(&noisy, &cfg).unwrap(), &truth);
            cfg.sigma = SigmaPolicy::Known(sigma_c);
            let big = mse(&denoise(&noisy_c, &cfg).unwrap(), &scaled);
            assert!((big / (c * c * base) - 1.0).abs() < 1e-9, "{rule} c={c}");
        }
    }
}

#[test]
fn noise_level_matches_snr() {
    let truth = TestSignal::Heavisine.sample(512);
    let sd = population_sd(&truth);
    let mut ratios = Vec::new();
    for rep in 0..100 {
        let mut r = replication_rng(DEFAULT_SEED, TestSignal::Heavisine, 3.0, rep);
        let (noisy, sigma) = make_noisy_with(&truth, 3.0, &mut r).unwrap();
        assert!((sigma - sd / 3.0).abs() < 1e-15);
        let noise: Vec<f64> = noisy.iter().zip(&truth).map(|(a, b)| a - b).collect();
        ratios.push(population_sd(&noise) / sd);
    }
    for ratio in ratios {
        assert!((ratio * 3.0 - 1.0).abs() <= 0.1, "{ratio}");
    }
}

#[test]
fn huge_snr_reproduces_the_signal() {
    let truth = TestSignal::Wave.sample(64);
    let (noisy, sigma) = make_noisy(&truth, 1e12, 1).unwrap();
    assert!(sigma < 1e-12);
    assert!(max_abs_diff(&noisy, &truth) < 1e-10);
    let defaults = MethodDefaults {
        coarse_level: 3,
        ..MethodDefaults::default()
    };
    let cfg = McConfig {
        methods: vec![
            BenchMethod::identity(),
            BenchMethod::standard("hard", &defaults).unwrap(),
        ],
        signals: vec![TestSignal::Wave],
        snrs: vec![1e12],
        n: 64,
        reps: 1,
        base_seed: 1,
    };
    for r in run_mc(&cfg) {
        assert!(r.mean_mse < 1e-20, "{} {}", r.method, r.mean_mse);
    }
}

#[test]
fn too_coarse_a_level_fails_the_cell_only() {
    let cfg = McConfig {
        n: 32,
        reps: 2,
        ..small_sweep(1)
    };
    let results = run_mc(&cfg);
    assert!(results
        .iter()
        .filter(|r| r.method == "noisy")
        .all(|r| r.failure.is_none()));
    assert!(results
        .iter()
        .filter(|r| r.method == "soft")
        .all(|r| r.failure.is_some() && r.mean_mse.is_nan()));
}

#[test]
fn csv_has_the_documented_columns() {
    let results = run_mc(&McConfig {
        reps: 2,
        ..small_sweep(1)
    });
    let mut buf = Vec::new();
    write_results_csv(&results, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("method,signal,snr,n,reps,mean_mse,sd_mse")
    );
    assert_eq!(lines.count(), results.len());
}
