//! Test signals, noise injection and a Monte Carlo harness for comparing
//! denoisers.
//!
//! Signals are sampled at `t_i = i/n`, `i = 1..=n`. The noise level of a
//! cell is `σ = sd(signal)/snr` with the population standard deviation.
//! Noise for replication `r` of a (signal, snr) pair depends only on the
//! base seed, the signal, the snr and `r`, so every method sees the same
//! noisy data and any cell can be recomputed on its own.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::block::{BlockConfig, BlockScheme};
use crate::denoise::{denoise, DenoiseConfig, Method, SigmaPolicy, ThresholdPolicy};
use crate::dwt::FilterPair;
use crate::shrink::{RuleKind, ShrinkageRule};

#[derive(Debug, Error)]
pub enum McError {
    #[error("signal is constant, so no noise level can be derived from an SNR")]
    ConstantSignal,
    #[error("snr must be positive, got {0}")]
    Snr(f64),
    #[error("need at least two samples, got {0}")]
    TooShort(usize),
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestSignal {
    Heavisine,
    Blip,
    Corner,
    Wave,
}

impl TestSignal {
    pub const ALL: [TestSignal; 4] = [
        TestSignal::Heavisine,
        TestSignal::Blip,
        TestSignal::Corner,
        TestSignal::Wave,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestSignal::Heavisine => "heavisine",
            TestSignal::Blip => "blip",
            TestSignal::Corner => "corner",
            TestSignal::Wave => "wave",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, McError> {
        match name.trim().to_ascii_lowercase().as_str() {
            "heavisine" | "heavi" => Ok(TestSignal::Heavisine),
            "blip" => Ok(TestSignal::Blip),
            "corner" => Ok(TestSignal::Corner),
            "wave" => Ok(TestSignal::Wave),
            other => Err(McError::UnknownSignal(other.to_string())),
        }
    }

    /// The function on `[0, 1]`.
    ///
    /// - heavisine: `4 sin(4πt) − sgn(t − 0.3) − sgn(0.72 − t)`
    /// - blip: `(0.32 + 0.6t + 0.3e^{−100(t−0.3)²})` for `t ≤ 0.8`,
    ///   `(−0.28 + 0.6t + 0.3e^{−100(t−1.3)²})` beyond
    /// - corner: `623.87t³(1 − 2t)` on `[0, 0.5]`,
    ///   `187.161(0.125 − t³)t⁴` on `(0.5, 0.8]`, `3708.470441(t − 1)³` beyond
    /// - wave: `0.5 + 0.2cos(4πt) + 0.1cos(24πt)`
    pub fn evaluate(self, t: f64) -> f64 {
        match self {
            TestSignal::Heavisine => 4.0 * (4.0 * PI * t).sin() - sgn(t - 0.3) - sgn(0.72 - t),
            TestSignal::Blip => {
                if t <= 0.8 {
                    0.32 + 0.6 * t + 0.3 * (-100.0 * (t - 0.3).powi(2)).exp()
                } else {
                    -0.28 + 0.6 * t + 0.3 * (-100.0 * (t - 1.3).powi(2)).exp()
                }
            }
            TestSignal::Corner => {
                if t <= 0.5 {
                    623.87 * t.powi(3) * (1.0 - 2.0 * t)
                } else if t <= 0.8 {
                    187.161 * (0.125 - t.powi(3)) * t.powi(4)
                } else {
                    3708.470441 * (t - 1.0).powi(3)
                }
            }
            TestSignal::Wave => 0.5 + 0.2 * (4.0 * PI * t).cos() + 0.1 * (24.0 * PI * t).cos(),
        }
    }

    /// Values at `t_i = i/n` for `i = 1..=n`.
    pub fn sample(self, n: usize) -> Vec<f64> {
        (1..=n)
            .map(|i| self.evaluate(i as f64 / n as f64))
            .collect()
    }
}

impl fmt::Display for TestSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Population standard deviation.
pub fn population_sd(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Mean squared error between an estimate and the truth.
pub fn mse(estimate: &[f64], truth: &[f64]) -> f64 {
    estimate
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / truth.len() as f64
}

/// Adds Gaussian noise with `σ = sd(signal)/snr` drawn from `rng`.
pub fn make_noisy_with<R: Rng>(
    signal: &[f64],
    snr: f64,
    rng: &mut R,
) -> Result<(Vec<f64>, f64), McError> {
    if signal.len() < 2 {
        return Err(McError::TooShort(signal.len()));
    }
    if !(snr > 0.0) {
        return Err(McError::Snr(snr));
    }
    let sd = population_sd(signal);
    if sd == 0.0 {
        return Err(McError::ConstantSignal);
    }
    let sigma = sd / snr;
    let noisy = signal
        .iter()
        .map(|&v| {
            let e: f64 = rng.sample(StandardNormal);
            v + sigma * e
        })
        .collect();
    Ok((noisy, sigma))
}

/// [`make_noisy_with`] using a ChaCha8 generator seeded from `seed`.
pub fn make_noisy(signal: &[f64], snr: f64, seed: u64) -> Result<(Vec<f64>, f64), McError> {
    make_noisy_with(signal, snr, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Generator for one replication of a (signal, snr) pair: the base seed
/// picks the key and the stream encodes signal, snr and replication.
pub fn replication_rng(base_seed: u64, signal: TestSignal, snr: f64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    let stream = ((signal as u64) << 56) ^ (((snr as f32).to_bits() as u64) << 24) ^ rep as u64;
    rng.set_stream(stream);
    rng
}

/// A named denoiser of the benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchMethod {
    pub name: String,
    /// `None` returns the noisy data unchanged.
    pub config: Option<DenoiseConfig>,
}

/// Shared settings for the built-in method catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodDefaults {
    pub basis: FilterPair,
    pub coarse_level: usize,
    /// With [`SigmaPolicy::Known`] the harness substitutes each cell's true
    /// noise level.
    pub sigma: SigmaPolicy,
}

impl Default for MethodDefaults {
    /// Daubechies filter with 8 taps, `j0 = 6`, true noise level.
    fn default() -> Self {
        Self {
            basis: FilterPair::daubechies(4).expect("db4 ships"),
            coarse_level: 6,
            sigma: SigmaPolicy::Known(1.0),
        }
    }
}

/// Names accepted by [`BenchMethod::standard`], in table order.
pub const STANDARD_METHODS: [&str; 10] = [
    "weick", "hard", "soft", "garrote", "firm", "lin", "perona", "char", "tukey", "scad",
];

/// Block methods accepted by [`BenchMethod::standard`].
pub const BLOCK_METHODS: [&str; 3] = ["block_js", "neigh_block", "neigh_coeff"];

impl BenchMethod {
    pub fn identity() -> Self {
        Self {
            name: "noisy".to_string(),
            config: None,
        }
    }

    /// A catalog method by name: any rule name or alias (firm uses
    /// `λ2 = 2λ`, scad `a = 3.7`), `block_js`, `neigh_block`,
    /// `neigh_coeff`, or `noisy`/`identity`. A `_ti` suffix turns on cycle
    /// spinning. Term-by-term rules use the universal threshold.
    pub fn standard(name: &str, defaults: &MethodDefaults) -> Result<Self, McError> {
        let lower = name.trim().to_ascii_lowercase();
        if lower == "noisy" || lower == "identity" {
            return Ok(Self::identity());
        }
        let (base, ti) = match lower.strip_suffix("_ti") {
            Some(b) => (b, true),
            None => (lower.as_str(), false),
        };
        let method = if let Some(scheme) = BlockScheme::from_name(base) {
            Method::Block(BlockConfig::new(scheme))
        } else {
            let kind: RuleKind = base
                .parse()
                .map_err(|_| McError::UnknownMethod(name.to_string()))?;
            Method::Rule(ShrinkageRule::new(kind, 1.0).expect("unit threshold is valid"))
        };
        Ok(Self {
            name: lower.clone(),
            config: Some(DenoiseConfig {
                basis: defaults.basis.clone(),
                coarse_level: defaults.coarse_level,
                method,
                threshold: ThresholdPolicy::Universal,
                sigma: defaults.sigma,
                translation_invariant: ti,
            }),
        })
    }

    /// Estimate for one noisy realization with true noise level `sigma`.
    pub fn estimate(&self, noisy: &[f64], sigma: f64) -> Result<Vec<f64>, String> {
        match &self.config {
            None => Ok(noisy.to_vec()),
            Some(cfg) => {
                let cfg = match cfg.sigma {
                    SigmaPolicy::Known(_) => DenoiseConfig {
                        sigma: SigmaPolicy::Known(sigma),
                        ..cfg.clone()
                    },
                    SigmaPolicy::Mad => cfg.clone(),
                };
                denoise(noisy, &cfg).map_err(|e| e.to_string())
            }
        }
    }
}

/// Mean squared errors of one (method, signal, snr) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub method: String,
    pub signal: TestSignal,
    pub snr: f64,
    pub n: usize,
    pub reps: usize,
    pub mean_mse: f64,
    /// Sample standard deviation of the per-replication errors.
    pub sd_mse: f64,
    pub per_rep: Vec<f64>,
    /// First error met in the cell, if any; the statistics are then NaN.
    pub failure: Option<String>,
}

impl BenchResult {
    fn from_errors(
        method: &str,
        signal: TestSignal,
        snr: f64,
        n: usize,
        per_rep: Result<Vec<f64>, String>,
    ) -> Self {
        match per_rep {
            Ok(per_rep) => {
                let reps = per_rep.len();
                let mean_mse = per_rep.iter().sum::<f64>() / reps as f64;
                let sd_mse = if reps > 1 {
                    (per_rep.iter().map(|m| (m - mean_mse).powi(2)).sum::<f64>()
                        / (reps - 1) as f64)
                        .sqrt()
                } else {
                    0.0
                };
                Self {
                    method: method.to_string(),
                    signal,
                    snr,
                    n,
                    reps,
                    mean_mse,
                    sd_mse,
                    per_rep,
                    failure: None,
                }
            }
            Err(e) => Self {
                method: method.to_string(),
                signal,
                snr,
                n,
                reps: 0,
                mean_mse: f64::NAN,
                sd_mse: f64::NAN,
                per_rep: Vec::new(),
                failure: Some(e),
            },
        }
    }
}

/// Base seed used when none is given.
pub const DEFAULT_SEED: u64 = 2024;

/// A full factorial Monte Carlo sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub methods: Vec<BenchMethod>,
    pub signals: Vec<TestSignal>,
    pub snrs: Vec<f64>,
    pub n: usize,
    pub reps: usize,
    pub base_seed: u64,
}

impl McConfig {
    /// The ten catalog rules plus the noisy input, on all four signals at
    /// SNR 3 and 7.
    pub fn standard_study(
        defaults: &MethodDefaults,
        n: usize,
        reps: usize,
        base_seed: u64,
    ) -> Self {
        let mut methods = vec![BenchMethod::identity()];
        methods.extend(
            STANDARD_METHODS
                .iter()
                .map(|m| BenchMethod::standard(m, defaults).expect("catalog name")),
        );
        Self {
            methods,
            signals: TestSignal::ALL.to_vec(),
            snrs: vec![3.0, 7.0],
            n,
            reps,
            base_seed,
        }
    }
}

/// Runs every (method, signal, snr) cell. Results come back in
/// method-major order regardless of how cells are scheduled; a failing cell
/// is recorded and the sweep continues.
pub fn run_mc(config: &McConfig) -> Vec<BenchResult> {
    let cells: Vec<(usize, TestSignal, f64)> = (0..config.methods.len())
        .flat_map(|m| {
            config
                .signals
                .iter()
                .flat_map(move |&s| config.snrs.iter().map(move |&snr| (m, s, snr)))
        })
        .collect();
    cells
        .par_iter()
        .map(|&(m, signal, snr)| run_cell(&config.methods[m], signal, snr, config))
        .collect()
}

fn run_cell(method: &BenchMethod, signal: TestSignal, snr: f64, config: &McConfig) -> BenchResult {
    let truth = signal.sample(config.n);
    let per_rep: Result<Vec<f64>, String> = (0..config.reps)
        .map(|rep| {
            let mut rng = replication_rng(config.base_seed, signal, snr, rep);
            let (noisy, sigma) =
                make_noisy_with(&truth, snr, &mut rng).map_err(|e| e.to_string())?;
            let estimate = method.estimate(&noisy, sigma)?;
            Ok(mse(&estimate, &truth))
        })
        .collect();
    BenchResult::from_errors(&method.name, signal, snr, config.n, per_rep)
}

/// Writes `method,signal,snr,n,reps,mean_mse,sd_mse` rows.
pub fn write_results_csv<W: Write>(results: &[BenchResult], out: W) -> Result<(), McError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "signal", "snr", "n", "reps", "mean_mse", "sd_mse"])?;
    for r in results {
        w.write_record([
            r.method.clone(),
            r.signal.name().to_string(),
            r.snr.to_string(),
            r.n.to_string(),
            r.reps.to_string(),
            r.mean_mse.to_string(),
            r.sd_mse.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signal_values() {
        // heavisine at t = 0.5: 4 sin(2π) − 1 − 1
        assert!((TestSignal::Heavisine.evaluate(0.5) + 2.0).abs() < 1e-12);
        assert!((TestSignal::Wave.evaluate(0.0) - 0.8).abs() < 1e-15);
        assert!((TestSignal::Corner.evaluate(1.0)).abs() < 1e-15);
        assert_eq!(TestSignal::Blip.sample(8).len(), 8);
        assert!((TestSignal::Blip.evaluate(0.3) - (0.32 + 0.18 + 0.3)).abs() < 1e-15);
    }

    #[test]
    fn noise_is_reproducible() {
        let s = TestSignal::Wave.sample(64);
        let (a, sa) = make_noisy(&s, 3.0, 11).unwrap();
        let (b, sb) = make_noisy(&s, 3.0, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(sa, sb);
        assert!((sa - population_sd(&s) / 3.0).abs() < 1e-15);
        let (c, _) = make_noisy(&s, 1e12, 11).unwrap();
        assert!(mse(&c, &s) < 1e-20);
    }

    #[test]
    fn noise_errors() {
        assert!(matches!(
            make_noisy(&[1.0; 8], 3.0, 0),
            Err(McError::ConstantSignal)
        ));
        assert!(make_noisy(&[1.0], 3.0, 0).is_err());
        assert!(make_noisy(&[1.0, 2.0], 0.0, 0).is_err());
    }

    #[test]
    fn replication_streams_differ() {
        let mut a = replication_rng(1, TestSignal::Blip, 3.0, 0);
        let mut b = replication_rng(1, TestSignal::Blip, 3.0, 1);
        let mut c = replication_rng(1, TestSignal::Blip, 7.0, 0);
        let (x, y, z): (u64, u64, u64) = (a.random(), b.random(), c.random());
        assert!(x != y && x != z && y != z);
    }

    #[test]
    fn method_catalog() {
        let d = MethodDefaults::default();
        for name in STANDARD_METHODS.iter().chain(BLOCK_METHODS.iter()) {
            assert!(BenchMethod::standard(name, &d).is_ok(), "{name}");
        }
        let ti = BenchMethod::standard("soft_ti", &d).unwrap();
        assert!(ti.config.unwrap().translation_invariant);
        assert!(BenchMethod::standard("median", &d).is_err());
    }

    #[test]
    fn failures_are_recorded() {
        let cfg = McConfig {
            methods: vec![BenchMethod::standard("soft", &MethodDefaults::default()).unwrap()],
            signals: vec![TestSignal::Wave],
            snrs: vec![3.0],
            n: 6,
            reps: 2,
            base_seed: 0,
        };
        let res = run_mc(&cfg);
        assert_eq!(res.len(), 1);
        assert!(res[0].failure.is_some());
        assert!(res[0].mean_mse.is_nan());
    }
}
