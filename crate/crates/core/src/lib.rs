//! Wavelet shrinkage and thresholding.
//!
//! The crate covers the orthogonal periodic wavelet transform, a catalog of
//! scalar shrinkage rules, their correspondence with explicit nonlinear
//! diffusion and with penalized least squares, block thresholding, a
//! wavelet-domain estimator for partially linear models, and a Monte Carlo
//! harness for comparing denoisers on standard test signals.

pub mod block;
pub mod denoise;
pub mod diffusion;
pub mod dwt;
pub mod io;
pub mod montecarlo;
pub mod penalty;
pub mod plm;
pub mod quadrature;
pub mod shrink;

pub use nalgebra;

pub use block::{BlockConfig, BlockError, BlockScheme, TailPolicy, BLOCK_JS_LAMBDA};
pub use denoise::{
    denoise, linear_shrink_denoise, mad_sigma, universal_threshold, DenoiseConfig, DenoiseError,
    Method, SigmaPolicy, ThresholdPolicy,
};
pub use diffusion::{
    diffusion_step, diffusivity_to_shrink, haar_shift_shrink_step, shrink_to_diffusivity,
    Diffusivity, InducedShrinkage,
};
pub use dwt::{cycle_spin_denoise, dwt, idwt, rotate, DwtError, FilterPair, WaveletDecomposition};
pub use montecarlo::{
    make_noisy, run_mc, BenchMethod, BenchResult, McConfig, McError, MethodDefaults, TestSignal,
};
pub use penalty::{
    generalized_inverse, penalized_ls_minimizer, penalty_from_rule, PenaltyError, PenaltyFunction,
};
pub use plm::{
    estimate_sigma_qr, fit_plm, huber_loss, rho_from_rule, theta_given_beta, PlmData, PlmError,
    PlmFit, PlmLambda, PlmSigma,
};
pub use shrink::{RuleError, RuleKind, ShrinkageRule};
