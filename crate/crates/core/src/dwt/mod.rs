//! Orthogonal discrete wavelet transform with periodic boundaries.
//!
//! The forward transform is Mallat's pyramid: at each level the current
//! approximation of length `m` is convolved with the scaling and wavelet
//! filters, indices taken modulo `m`, and decimated by two. Because the
//! periodized filter rows are orthonormal at every level, the whole cascade
//! is an orthogonal matrix `W` and the inverse is its transpose.

mod filters;
mod spin;

pub use filters::{FilterPair, FILTER_TOLERANCE};
pub use spin::{cycle_spin, cycle_spin_denoise, rotate};

use thiserror::Error;

use crate::shrink::RuleError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DwtError {
    #[error("signal length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("coarse level {coarse_level} must be below the depth {depth}")]
    CoarseLevel { coarse_level: usize, depth: usize },
    #[error("decomposition shape mismatch: {0}")]
    Shape(String),
    #[error("unknown wavelet `{0}`")]
    UnknownWavelet(String),
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

/// Returns `J` with `n = 2^J`, or an error when `n` is not a power of two.
pub fn dyadic_depth(n: usize) -> Result<usize, DwtError> {
    if n == 0 || !n.is_power_of_two() {
        return Err(DwtError::NotPowerOfTwo(n));
    }
    Ok(n.trailing_zeros() as usize)
}

/// Scaling coefficients at the coarse level `j0` and detail coefficients
/// for every level `j0..J`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletDecomposition {
    coarse_level: usize,
    depth: usize,
    scaling: Vec<f64>,
    /// `details[i]` holds level `coarse_level + i`, of length `2^(j0+i)`.
    details: Vec<Vec<f64>>,
}

impl WaveletDecomposition {
    /// Assembles a decomposition from its parts, checking every level has
    /// the dyadic length its index requires.
    pub fn from_parts(
        coarse_level: usize,
        scaling: Vec<f64>,
        details: Vec<Vec<f64>>,
    ) -> Result<Self, DwtError> {
        if scaling.len() != 1 << coarse_level {
            return Err(DwtError::Shape(format!(
                "{} scaling coefficients at level {coarse_level}",
                scaling.len()
            )));
        }
        if details.is_empty() {
            return Err(DwtError::Shape("no detail levels".into()));
        }
        for (i, level) in details.iter().enumerate() {
            let j = coarse_level + i;
            if level.len() != 1 << j {
                return Err(DwtError::Shape(format!(
                    "level {j} has {} coefficients, expected {}",
                    level.len(),
                    1usize << j
                )));
            }
        }
        let depth = coarse_level + details.len();
        Ok(Self {
            coarse_level,
            depth,
            scaling,
            details,
        })
    }

    /// All-zero decomposition of a length-`2^depth` signal.
    pub fn zeros(depth: usize, coarse_level: usize) -> Result<Self, DwtError> {
        if coarse_level >= depth {
            return Err(DwtError::CoarseLevel {
                coarse_level,
                depth,
            });
        }
        let details = (coarse_level..depth).map(|j| vec![0.0; 1 << j]).collect();
        Self::from_parts(coarse_level, vec![0.0; 1 << coarse_level], details)
    }

    /// Rebuilds a decomposition from the flat `Wg` layout produced by
    /// [`to_flat`](Self::to_flat).
    pub fn from_flat(flat: &[f64], coarse_level: usize) -> Result<Self, DwtError> {
        let depth = dyadic_depth(flat.len())?;
        if coarse_level >= depth {
            return Err(DwtError::CoarseLevel {
                coarse_level,
                depth,
            });
        }
        let i0 = 1 << coarse_level;
        let scaling = flat[..i0].to_vec();
        let details = (coarse_level..depth)
            .map(|j| flat[(1 << j)..(2 << j)].to_vec())
            .collect();
        Self::from_parts(coarse_level, scaling, details)
    }

    pub fn coarse_level(&self) -> usize {
        self.coarse_level
    }

    /// `J`, with `2^J` the signal length.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Total number of coefficients, `2^J`.
    pub fn len(&self) -> usize {
        1 << self.depth
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn scaling(&self) -> &[f64] {
        &self.scaling
    }

    pub fn scaling_mut(&mut self) -> &mut [f64] {
        &mut self.scaling
    }

    /// Detail coefficients `d_{j,·}`. Panics if `j` is outside `j0..J`.
    pub fn detail(&self, level: usize) -> &[f64] {
        &self.details[level - self.coarse_level]
    }

    pub fn detail_mut(&mut self, level: usize) -> &mut [f64] {
        &mut self.details[level - self.coarse_level]
    }

    /// Finest detail level `J − 1`.
    pub fn finest_details(&self) -> &[f64] {
        self.details
            .last()
            .expect("decompositions have at least one level")
    }

    /// `(j, d_{j,·})` from coarse to fine.
    pub fn levels(&self) -> impl Iterator<Item = (usize, &[f64])> + '_ {
        self.details
            .iter()
            .enumerate()
            .map(move |(i, d)| (self.coarse_level + i, d.as_slice()))
    }

    pub fn levels_mut(&mut self) -> impl Iterator<Item = (usize, &mut Vec<f64>)> + '_ {
        let j0 = self.coarse_level;
        self.details
            .iter_mut()
            .enumerate()
            .map(move |(i, d)| (j0 + i, d))
    }

    /// Applies `f` to every detail coefficient in place.
    pub fn map_details(&mut self, mut f: impl FnMut(f64) -> f64) {
        for level in &mut self.details {
            for d in level.iter_mut() {
                *d = f(*d);
            }
        }
    }

    /// The coefficient vector `Wg`: scaling coefficients first, then the
    /// detail levels from coarse to fine. Index `i < 2^j0` is a scaling
    /// coefficient; level `j` occupies `2^j..2^(j+1)`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.len());
        flat.extend_from_slice(&self.scaling);
        for level in &self.details {
            flat.extend_from_slice(level);
        }
        flat
    }

    /// Sum of squares of all coefficients.
    pub fn energy(&self) -> f64 {
        self.scaling.iter().map(|c| c * c).sum::<f64>()
            + self.details.iter().flatten().map(|d| d * d).sum::<f64>()
    }
}

fn analysis_step(x: &[f64], basis: &FilterPair) -> (Vec<f64>, Vec<f64>) {
    let m = x.len();
    let half = m / 2;
    let h = basis.low_pass();
    let g = basis.high_pass();
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    for k in 0..half {
        let mut a = 0.0;
        let mut d = 0.0;
        for (tap, (hm, gm)) in h.iter().zip(g).enumerate() {
            let v = x[(2 * k + tap) % m];
            a += hm * v;
            d += gm * v;
        }
        approx[k] = a;
        detail[k] = d;
    }
    (approx, detail)
}

fn synthesis_step(approx: &[f64], detail: &[f64], basis: &FilterPair) -> Vec<f64> {
    let m = 2 * approx.len();
    let h = basis.low_pass();
    let g = basis.high_pass();
    let mut out = vec![0.0; m];
    for (k, (a, d)) in approx.iter().zip(detail).enumerate() {
        for (tap, (hm, gm)) in h.iter().zip(g).enumerate() {
            out[(2 * k + tap) % m] += hm * a + gm * d;
        }
    }
    out
}

/// Forward transform of a length-`2^J` signal down to level `coarse_level`.
pub fn dwt(
    signal: &[f64],
    basis: &FilterPair,
    coarse_level: usize,
) -> Result<WaveletDecomposition, DwtError> {
    let depth = dyadic_depth(signal.len())?;
    if coarse_level >= depth {
        return Err(DwtError::CoarseLevel {
            coarse_level,
            depth,
        });
    }
    let mut details = Vec::with_capacity(depth - coarse_level);
    let mut approx = signal.to_vec();
    for _ in coarse_level..depth {
        let (a, d) = analysis_step(&approx, basis);
        details.push(d);
        approx = a;
    }
    details.reverse();
    Ok(WaveletDecomposition {
        coarse_level,
        depth,
        scaling: approx,
        details,
    })
}

/// Inverse transform, `g = Wᵀd`.
pub fn idwt(decomp: &WaveletDecomposition, basis: &FilterPair) -> Vec<f64> {
    let mut approx = decomp.scaling.clone();
    for detail in &decomp.details {
        approx = synthesis_step(&approx, detail, basis);
    }
    approx
}
