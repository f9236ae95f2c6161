//! Transform, estimate the noise level, shrink, invert.

use thiserror::Error;

use crate::block::{block_threshold, BlockConfig, BlockError};
use crate::dwt::{cycle_spin, dwt, idwt, DwtError, FilterPair, WaveletDecomposition};
use crate::shrink::{RuleError, ShrinkageRule};

/// Consistency constant of the MAD for Gaussian noise, `Φ⁻¹(3/4)`.
pub const MAD_NORMALIZER: f64 = 0.6745;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DenoiseError {
    #[error(transparent)]
    Dwt(#[from] DwtError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error("cannot estimate a noise level from no coefficients")]
    NoCoefficients,
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Median of a nonempty slice; the mean of the two middle values for even
/// lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 0 {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    })
}

/// `median(|d|) / 0.6745`.
pub fn mad_sigma(finest_details: &[f64]) -> Result<f64, DenoiseError> {
    let abs: Vec<f64> = finest_details.iter().map(|d| d.abs()).collect();
    median(&abs)
        .map(|m| m / MAD_NORMALIZER)
        .ok_or(DenoiseError::NoCoefficients)
}

/// `σ·√(2 ln n)`.
pub fn universal_threshold(n: usize, sigma: f64) -> f64 {
    sigma * (2.0 * (n as f64).ln()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdPolicy {
    Universal,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaPolicy {
    /// Known noise level; zero is accepted and means "no noise".
    Known(f64),
    /// MAD of the finest detail coefficients.
    Mad,
}

/// What is done to the detail coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Term-by-term rule whose threshold comes from the threshold policy.
    Rule(ShrinkageRule),
    /// Block rule; its own threshold replaces the threshold policy.
    Block(BlockConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseConfig {
    pub basis: FilterPair,
    pub coarse_level: usize,
    pub method: Method,
    pub threshold: ThresholdPolicy,
    pub sigma: SigmaPolicy,
    pub translation_invariant: bool,
}

impl DenoiseConfig {
    /// Term-by-term denoising with the universal threshold, MAD noise
    /// estimate, `j0 = 0` and no cycle spinning.
    pub fn new(basis: FilterPair, rule: ShrinkageRule) -> Self {
        Self {
            basis,
            coarse_level: 0,
            method: Method::Rule(rule),
            threshold: ThresholdPolicy::Universal,
            sigma: SigmaPolicy::Mad,
            translation_invariant: false,
        }
    }

    pub fn block(basis: FilterPair, block: BlockConfig) -> Self {
        Self {
            method: Method::Block(block),
            ..Self::new(basis, ShrinkageRule::soft(1.0).expect("valid"))
        }
    }

    pub fn validate(&self) -> Result<(), DenoiseError> {
        if let ThresholdPolicy::Fixed(t) = self.threshold {
            if !(t.is_finite() && t > 0.0) {
                return Err(DenoiseError::Config(format!(
                    "fixed threshold must be positive, got {t}"
                )));
            }
        }
        if let SigmaPolicy::Known(s) = self.sigma {
            if !(s.is_finite() && s >= 0.0) {
                return Err(DenoiseError::Config(format!(
                    "known sigma must be nonnegative, got {s}"
                )));
            }
        }
        Ok(())
    }

    /// Noise level for `signal` under the configured policy.
    pub fn resolve_sigma(&self, signal: &[f64]) -> Result<f64, DenoiseError> {
        match self.sigma {
            SigmaPolicy::Known(s) => Ok(s),
            SigmaPolicy::Mad => {
                let d = dwt(signal, &self.basis, self.coarse_level)?;
                mad_sigma(d.finest_details())
            }
        }
    }

    /// Threshold for a signal of length `n` with noise level `sigma`.
    pub fn resolve_threshold(&self, n: usize, sigma: f64) -> f64 {
        match self.threshold {
            ThresholdPolicy::Universal => universal_threshold(n, sigma),
            ThresholdPolicy::Fixed(t) => t,
        }
    }
}

type Modifier = Box<dyn Fn(&mut WaveletDecomposition) -> Result<(), DenoiseError> + Sync>;

/// Runs the configured pipeline. Scaling coefficients pass through
/// untouched. A zero threshold (or a zero noise level for block rules)
/// returns the input unchanged.
pub fn denoise(signal: &[f64], config: &DenoiseConfig) -> Result<Vec<f64>, DenoiseError> {
    config.validate()?;
    let depth = crate::dwt::dyadic_depth(signal.len())?;
    if config.coarse_level >= depth {
        return Err(DwtError::CoarseLevel {
            coarse_level: config.coarse_level,
            depth,
        }
        .into());
    }
    let sigma = config.resolve_sigma(signal)?;
    let modify: Modifier = match config.method {
        Method::Rule(rule) => {
            let threshold = config.resolve_threshold(signal.len(), sigma);
            if threshold == 0.0 {
                return Ok(signal.to_vec());
            }
            let rule = rule.with_threshold(threshold)?;
            Box::new(move |d| {
                d.map_details(|x| rule.apply(x));
                Ok(())
            })
        }
        Method::Block(block) => {
            if sigma == 0.0 {
                return Ok(signal.to_vec());
            }
            block.resolve(signal.len())?;
            Box::new(move |d| {
                *d = block_threshold(d, sigma, &block)?;
                Ok(())
            })
        }
    };
    if config.translation_invariant {
        cycle_spin(signal, &config.basis, config.coarse_level, modify)
    } else {
        let mut d = dwt(signal, &config.basis, config.coarse_level)?;
        modify(&mut d)?;
        Ok(idwt(&d, &config.basis))
    }
}

/// Level-dependent linear shrinkage `d_{j,k} / (1 + λ·2^{2js})`.
pub fn linear_shrink_denoise(
    signal: &[f64],
    basis: &FilterPair,
    s: f64,
    lambda: f64,
    coarse_level: usize,
) -> Result<Vec<f64>, DenoiseError> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(DenoiseError::Config(format!(
            "lambda must be nonnegative, got {lambda}"
        )));
    }
    let mut d = dwt(signal, basis, coarse_level)?;
    if lambda == 0.0 {
        return Ok(signal.to_vec());
    }
    for (j, level) in d.levels_mut() {
        let factor = 1.0 / (1.0 + lambda * 2f64.powf(2.0 * j as f64 * s));
        level.iter_mut().for_each(|c| *c *= factor);
    }
    Ok(idwt(&d, basis))
}
