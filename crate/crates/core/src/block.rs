//! Block thresholding: James–Stein shrinkage of groups of neighbouring
//! detail coefficients.
//!
//! Every coefficient of an inner block is multiplied by
//!
//! ```text
//! max(0, (S² − λ·L·σ²) / S²)
//! ```
//!
//! where `S²` is the energy of a window of length `L` containing the block.
//! BlockJS uses nonoverlapping windows equal to the blocks; NeighBlock and
//! NeighCoeff extend each block by `L1` coefficients on both sides,
//! wrapping around the level.

use thiserror::Error;

use crate::dwt::WaveletDecomposition;

/// Root of `λ − ln λ − 3 = 0` above 1, the BlockJS and NeighBlock threshold.
pub const BLOCK_JS_LAMBDA: f64 = 4.50524;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlockError {
    #[error("noise level must be positive and finite, got {0}")]
    Sigma(f64),
    #[error("block length must be at least 1")]
    BlockLength,
    #[error("block threshold must be positive and finite, got {0}")]
    Lambda(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockScheme {
    BlockJs,
    NeighBlock,
    NeighCoeff,
}

impl BlockScheme {
    pub fn name(self) -> &'static str {
        match self {
            BlockScheme::BlockJs => "block_js",
            BlockScheme::NeighBlock => "neigh_block",
            BlockScheme::NeighCoeff => "neigh_coeff",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "block_js" | "blockjs" => Some(BlockScheme::BlockJs),
            "neigh_block" | "neighblock" => Some(BlockScheme::NeighBlock),
            "neigh_coeff" | "neighcoeff" => Some(BlockScheme::NeighCoeff),
            _ => None,
        }
    }
}

/// Block length: `L` for BlockJS, the inner length `L0` for NeighBlock.
/// NeighCoeff always uses `L0 = L1 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockLength {
    /// `⌊ln n⌋` for BlockJS, `⌊ln n / 2⌋` for NeighBlock.
    Default,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockLambda {
    /// 4.50524 for BlockJS and NeighBlock, `(2/3)·ln n` for NeighCoeff.
    Default,
    Fixed(f64),
}

/// How the last, incomplete block of a level is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailPolicy {
    /// Fill the window with the leading coefficients of the level.
    Augmented,
    /// Discard the incomplete block: its coefficients are set to zero.
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockConfig {
    pub scheme: BlockScheme,
    pub block_length: BlockLength,
    pub lambda: BlockLambda,
    pub tail: TailPolicy,
}

impl BlockConfig {
    pub fn new(scheme: BlockScheme) -> Self {
        Self {
            scheme,
            block_length: BlockLength::Default,
            lambda: BlockLambda::Default,
            tail: TailPolicy::Augmented,
        }
    }

    pub fn block_js() -> Self {
        Self::new(BlockScheme::BlockJs)
    }

    pub fn neigh_block() -> Self {
        Self::new(BlockScheme::NeighBlock)
    }

    pub fn neigh_coeff() -> Self {
        Self::new(BlockScheme::NeighCoeff)
    }

    pub fn with_block_length(mut self, length: usize) -> Self {
        self.block_length = BlockLength::Fixed(length);
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = BlockLambda::Fixed(lambda);
        self
    }

    pub fn with_tail(mut self, tail: TailPolicy) -> Self {
        self.tail = tail;
        self
    }

    /// Inner block length, extension on each side and threshold for a
    /// signal of length `n`.
    pub fn resolve(&self, n: usize) -> Result<Geometry, BlockError> {
        let ln_n = (n.max(1) as f64).ln();
        let (inner, pad) = match self.scheme {
            BlockScheme::BlockJs => {
                let l = match self.block_length {
                    BlockLength::Default => (ln_n.floor() as usize).max(1),
                    BlockLength::Fixed(l) => l,
                };
                (l, 0)
            }
            BlockScheme::NeighBlock => {
                let l0 = match self.block_length {
                    BlockLength::Default => ((ln_n / 2.0).floor() as usize).max(1),
                    BlockLength::Fixed(l) => l,
                };
                (l0, (l0 / 2).max(1))
            }
            BlockScheme::NeighCoeff => (1, 1),
        };
        if inner == 0 {
            return Err(BlockError::BlockLength);
        }
        let lambda = match (self.lambda, self.scheme) {
            (BlockLambda::Fixed(v), _) => v,
            (BlockLambda::Default, BlockScheme::NeighCoeff) => 2.0 / 3.0 * ln_n,
            (BlockLambda::Default, _) => BLOCK_JS_LAMBDA,
        };
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(BlockError::Lambda(lambda));
        }
        Ok(Geometry {
            inner,
            pad,
            lambda,
            tail: self.tail,
        })
    }
}

/// Resolved block layout for one signal length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    /// Coefficients shrunk together.
    pub inner: usize,
    /// Extension on each side of an inner block.
    pub pad: usize,
    pub lambda: f64,
    pub tail: TailPolicy,
}

impl Geometry {
    /// Window length `L = inner + 2·pad`.
    pub fn window(&self) -> usize {
        self.inner + 2 * self.pad
    }
}

/// James–Stein factor `max(0, (S² − λLσ²)/S²)`, zero for an empty block.
pub fn james_stein_factor(energy: f64, lambda: f64, window: usize, sigma: f64) -> f64 {
    if energy <= 0.0 {
        return 0.0;
    }
    ((energy - lambda * window as f64 * sigma * sigma) / energy).max(0.0)
}

fn check_sigma(sigma: f64) -> Result<(), BlockError> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(BlockError::Sigma(sigma))
    }
}

/// Shrinks one level in place. Levels shorter than the window are treated
/// as a single block whose length is the level length.
fn shrink_level(level: &mut [f64], geom: &Geometry, sigma: f64) {
    let m = level.len();
    let window = geom.window();
    if m < window {
        let energy: f64 = level.iter().map(|d| d * d).sum();
        let factor = james_stein_factor(energy, geom.lambda, m, sigma);
        level.iter_mut().for_each(|d| *d *= factor);
        return;
    }
    let original = level.to_vec();
    for start in (0..m).step_by(geom.inner) {
        let end = (start + geom.inner).min(m);
        if end - start < geom.inner && geom.tail == TailPolicy::Truncated {
            level[start..end].iter_mut().for_each(|d| *d = 0.0);
            continue;
        }
        // window [start − pad, start + inner + pad), wrapping around
        let first = start + m - geom.pad;
        let energy: f64 = (first..first + window)
            .map(|i| original[i % m].powi(2))
            .sum();
        let factor = james_stein_factor(energy, geom.lambda, window, sigma);
        level[start..end].iter_mut().for_each(|d| *d *= factor);
    }
}

/// Applies the configured block rule to every detail level; scaling
/// coefficients are left alone.
pub fn block_threshold(
    decomp: &WaveletDecomposition,
    sigma: f64,
    config: &BlockConfig,
) -> Result<WaveletDecomposition, BlockError> {
    check_sigma(sigma)?;
    let geom = config.resolve(decomp.len())?;
    let mut out = decomp.clone();
    for (_, level) in out.levels_mut() {
        shrink_level(level, &geom, sigma);
    }
    Ok(out)
}

/// Nonoverlapping James–Stein blocks.
pub fn block_js(
    decomp: &WaveletDecomposition,
    sigma: f64,
    config: &BlockConfig,
) -> Result<WaveletDecomposition, BlockError> {
    block_threshold(
        decomp,
        sigma,
        &BlockConfig {
            scheme: BlockScheme::BlockJs,
            ..*config
        },
    )
}

/// Overlapping blocks: inner length `L0`, extended by `L1 = max(1, ⌊L0/2⌋)`
/// on each side.
pub fn neigh_block(
    decomp: &WaveletDecomposition,
    sigma_hat: f64,
    config: &BlockConfig,
) -> Result<WaveletDecomposition, BlockError> {
    block_threshold(
        decomp,
        sigma_hat,
        &BlockConfig {
            scheme: BlockScheme::NeighBlock,
            ..*config
        },
    )
}

/// NeighBlock with `L0 = L1 = 1` and `λ = (2/3)·ln n`.
pub fn neigh_coeff(
    decomp: &WaveletDecomposition,
    sigma_hat: f64,
) -> Result<WaveletDecomposition, BlockError> {
    block_threshold(decomp, sigma_hat, &BlockConfig::neigh_coeff())
}
