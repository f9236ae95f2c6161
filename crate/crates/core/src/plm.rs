//! Partially linear models `y_i = X_iᵀβ + f(t_i) + u_i` fitted in the
//! wavelet domain.
//!
//! With `z = Wy`, `A = WX` and an L1 penalty on the detail coefficients of
//! `f`, profiling out `θ` leaves Huber's objective
//! `Σ_{i ≥ i0} ρ_λ(z_i − A_iᵀβ)`. The fit minimizes that for `β̂`, then
//! soft-thresholds the residual detail coefficients to get `f̂`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::denoise::{mad_sigma, universal_threshold, DenoiseError};
use crate::dwt::{dwt, dyadic_depth, idwt, DwtError, FilterPair, WaveletDecomposition};
use crate::quadrature::integrate_piecewise;
use crate::shrink::ShrinkageRule;

/// Iteration cap of the Huber solver.
pub const MAX_ITERATIONS: usize = 200;

/// Gradient tolerance of the Huber solver, relative to the gradient scale
/// `max(1, λ·max_j Σ_i |A_ij|)`.
pub const GRADIENT_TOLERANCE: f64 = 1e-10;

/// Columns whose detail part has norm below this fraction of the largest
/// column norm (or is exactly zero) are treated as absent.
const ZERO_COLUMN_TOLERANCE: f64 = 1e-12;

/// `|R_kk|` below this fraction of the largest diagonal entry marks a rank
/// deficiency.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlmError {
    #[error(transparent)]
    Dwt(#[from] DwtError),
    #[error(transparent)]
    Denoise(#[from] DenoiseError),
    #[error("design has {rows} rows but the response has {n}")]
    Shape { rows: usize, n: usize },
    #[error("need more observations than covariates, got n = {n}, p = {p}")]
    TooFewObservations { n: usize, p: usize },
    #[error("design is rank deficient at column {column}")]
    RankDeficient { column: usize },
    #[error("Huber solver did not converge in {iterations} iterations (gradient {gradient:e})")]
    NotConverged {
        iterations: usize,
        gradient: f64,
        beta: Vec<f64>,
    },
    #[error("invalid setting: {0}")]
    Config(String),
}

/// Non-fatal conditions met during a fit.
#[derive(Debug, Clone, PartialEq)]
pub enum PlmWarning {
    /// The column has no detail content, so its coefficient is not
    /// identified and is set to zero.
    ZeroColumn(usize),
    /// A solver system was singular and was solved in the least-norm sense.
    Regularized,
}

/// `ρ_λ(u)`: `u²/2` for `|u| ≤ λ`, `λ|u| − λ²/2` beyond.
pub fn huber_loss(u: f64, lambda: f64) -> f64 {
    let a = u.abs();
    if a <= lambda {
        0.5 * u * u
    } else {
        lambda * a - 0.5 * lambda * lambda
    }
}

/// The partial minimizer of the penalized criterion for fixed `β`: the
/// residual below `i0`, its soft-thresholded value from `i0` on.
pub fn theta_given_beta(
    z: &[f64],
    a: &DMatrix<f64>,
    beta: &[f64],
    lambda: f64,
    i0: usize,
) -> Vec<f64> {
    residuals(z, a, beta)
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            if i < i0 {
                r
            } else {
                r.signum() * (r.abs() - lambda).max(0.0)
            }
        })
        .collect()
}

/// `J(β, θ) = ½ Σ_i (z_i − A_iᵀβ − θ_i)² + λ Σ_{i ≥ i0} |θ_i|`.
pub fn penalized_objective(
    z: &[f64],
    a: &DMatrix<f64>,
    beta: &[f64],
    theta: &[f64],
    lambda: f64,
    i0: usize,
) -> f64 {
    let r = residuals(z, a, beta);
    let fit: f64 = r
        .iter()
        .zip(theta)
        .map(|(r, t)| 0.5 * (r - t).powi(2))
        .sum();
    let pen: f64 = theta.iter().skip(i0).map(|t| t.abs()).sum();
    fit + lambda * pen
}

/// `Σ_{i ≥ i0} ρ_λ(z_i − A_iᵀβ)`.
pub fn huber_objective(z: &[f64], a: &DMatrix<f64>, beta: &[f64], lambda: f64, i0: usize) -> f64 {
    residuals(z, a, beta)
        .iter()
        .skip(i0)
        .map(|&r| huber_loss(r, lambda))
        .sum()
}

fn residuals(z: &[f64], a: &DMatrix<f64>, beta: &[f64]) -> Vec<f64> {
    let mut r = z.to_vec();
    for (j, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            for (ri, aij) in r.iter_mut().zip(a.column(j).iter()) {
                *ri -= aij * b;
            }
        }
    }
    r
}

/// Noise level from the part of `z_J` orthogonal to the columns of `A_J`:
/// with `A_J = Q(R; 0)`, the last `n − p` entries of `Qᵀz_J` are pure noise
/// and their MAD estimates `σ`.
pub fn estimate_sigma_qr(a_j: &DMatrix<f64>, z_j: &[f64]) -> Result<f64, PlmError> {
    let (n, p) = a_j.shape();
    if n != z_j.len() {
        return Err(PlmError::Shape {
            rows: n,
            n: z_j.len(),
        });
    }
    if p == 0 {
        return Ok(mad_sigma(z_j)?);
    }
    if n <= p {
        return Err(PlmError::TooFewObservations { n, p });
    }
    let qr = a_j.clone().qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..p).map(|k| r[(k, k)].abs()).collect();
    let largest = diag.iter().copied().fold(0.0, f64::max);
    if let Some(column) = diag
        .iter()
        .position(|&d| d <= RANK_TOLERANCE * largest || d == 0.0)
    {
        return Err(PlmError::RankDeficient { column });
    }
    let mut w = DVector::from_column_slice(z_j);
    qr.q_tr_mul(&mut w);
    Ok(mad_sigma(&w.as_slice()[p..])?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlmData {
    y: Vec<f64>,
    x: DMatrix<f64>,
}

impl PlmData {
    pub fn new(y: Vec<f64>, x: DMatrix<f64>) -> Result<Self, PlmError> {
        let n = y.len();
        dyadic_depth(n)?;
        if x.nrows() != n {
            return Err(PlmError::Shape { rows: x.nrows(), n });
        }
        if x.ncols() >= n {
            return Err(PlmError::TooFewObservations { n, p: x.ncols() });
        }
        Ok(Self { y, x })
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlmSigma {
    Known(f64),
    /// QR + MAD on the finest-level rows of the transformed model.
    Qr,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlmLambda {
    /// `σ̂·√(2 ln n)`.
    Universal,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlmFit {
    pub beta_hat: Vec<f64>,
    /// Wavelet coefficients of `f̂` in the flat layout.
    pub theta_hat: Vec<f64>,
    pub f_hat: Vec<f64>,
    pub sigma_hat: f64,
    pub lambda: f64,
    pub coarse_level: usize,
    /// Value of the Huber objective at `β̂`.
    pub objective: f64,
    pub iterations: usize,
    pub warnings: Vec<PlmWarning>,
}

/// The model in the wavelet domain: `z = Wy` and `A = WX` in flat layout.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletModel {
    pub z: Vec<f64>,
    pub a: DMatrix<f64>,
    pub coarse_level: usize,
}

impl WaveletModel {
    pub fn new(data: &PlmData, basis: &FilterPair, coarse_level: usize) -> Result<Self, PlmError> {
        let z = dwt(data.y(), basis, coarse_level)?.to_flat();
        let n = data.n();
        let mut a = DMatrix::zeros(n, data.p());
        for (j, col) in data.x().column_iter().enumerate() {
            let col: Vec<f64> = col.iter().copied().collect();
            let flat = dwt(&col, basis, coarse_level)?.to_flat();
            a.set_column(j, &DVector::from_vec(flat));
        }
        Ok(Self { z, a, coarse_level })
    }

    /// Index of the first penalized coefficient, `2^{j0}`.
    pub fn i0(&self) -> usize {
        1 << self.coarse_level
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }
}

/// Columns of `a` that carry no information below row `i0`.
fn zero_columns(a: &DMatrix<f64>, i0: usize) -> Vec<usize> {
    let norms: Vec<f64> = a
        .column_iter()
        .map(|c| c.iter().skip(i0).map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let largest = norms.iter().copied().fold(0.0, f64::max);
    norms
        .iter()
        .enumerate()
        .filter(|(_, &nrm)| nrm == 0.0 || nrm <= ZERO_COLUMN_TOLERANCE * largest)
        .map(|(j, _)| j)
        .collect()
}

fn select_columns(a: &DMatrix<f64>, keep: &[usize], rows: std::ops::Range<usize>) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), keep.len(), |i, k| a[(rows.start + i, keep[k])])
}

/// Solves `m·x = b` for symmetric positive semidefinite `m`; falls back to a
/// least-norm SVD solve (flagging it) when Cholesky fails.
fn solve_psd(m: DMatrix<f64>, b: &DVector<f64>, regularized: &mut bool) -> DVector<f64> {
    if let Some(ch) = m.clone().cholesky() {
        return ch.solve(b);
    }
    *regularized = true;
    let svd = m.svd(true, true);
    let eps = 1e-12 * svd.singular_values.max().max(f64::MIN_POSITIVE);
    svd.solve(b, eps)
        .unwrap_or_else(|_| DVector::zeros(b.len()))
}

/// Result of minimizing the Huber objective over `β`.
#[derive(Debug, Clone, PartialEq)]
pub struct HuberSolution {
    pub beta: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub regularized: bool,
}

/// Minimizes `Σ_{i ≥ i0} ρ_λ(z_i − A_iᵀβ)`.
///
/// Starts from least squares on the penalized rows. Each iteration tries a
/// Newton step on the quadratic pieces (`H = Σ_{|r_i| ≤ λ} A_iA_iᵀ`) with
/// backtracking, and falls back to an iteratively reweighted least-squares
/// step with weights `min(1, λ/|r_i|)`, which never increases the
/// objective. Stops when the gradient's ∞-norm is within
/// [`GRADIENT_TOLERANCE`] of its scale.
pub fn minimize_huber(
    z: &[f64],
    a: &DMatrix<f64>,
    lambda: f64,
    i0: usize,
) -> Result<HuberSolution, PlmError> {
    let (n, p) = a.shape();
    let mut regularized = false;
    if p == 0 {
        return Ok(HuberSolution {
            beta: Vec::new(),
            objective: huber_objective(z, a, &[], lambda, i0),
            iterations: 0,
            regularized,
        });
    }
    let rows = i0..n;
    let ap = select_columns(a, &(0..p).collect::<Vec<_>>(), rows.clone());
    let zp = DVector::from_column_slice(&z[i0..]);

    let scale = (0..p)
        .map(|j| ap.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        * lambda;
    let tol = GRADIENT_TOLERANCE * scale.max(1.0);

    let objective = |beta: &DVector<f64>| -> f64 {
        (&zp - &ap * beta)
            .iter()
            .map(|&r| huber_loss(r, lambda))
            .sum()
    };

    let mut beta = solve_psd(
        ap.transpose() * &ap,
        &(ap.transpose() * &zp),
        &mut regularized,
    );
    let mut value = objective(&beta);
    let mut gradient = f64::INFINITY;
    for iteration in 0..=MAX_ITERATIONS {
        let r = &zp - &ap * &beta;
        let psi = r.map(|v| v.clamp(-lambda, lambda));
        // the gradient of the objective is −Aᵀψ
        let descent = ap.transpose() * &psi;
        gradient = descent.amax();
        if gradient <= tol {
            return Ok(HuberSolution {
                beta: beta.iter().copied().collect(),
                objective: value,
                iterations: iteration,
                regularized,
            });
        }
        if iteration == MAX_ITERATIONS {
            break;
        }

        let inliers: Vec<usize> = (0..r.len()).filter(|&i| r[i].abs() <= lambda).collect();
        let mut accepted = false;
        if inliers.len() >= p {
            let ai = DMatrix::from_fn(inliers.len(), p, |i, j| ap[(inliers[i], j)]);
            if let Some(ch) = (ai.transpose() * &ai).cholesky() {
                let step = ch.solve(&descent);
                let slope = -descent.dot(&step);
                let mut t = 1.0;
                for _ in 0..40 {
                    let candidate = &beta + &step * t;
                    let v = objective(&candidate);
                    if v <= value + 1e-4 * t * slope {
                        beta = candidate;
                        value = v;
                        accepted = true;
                        break;
                    }
                    t *= 0.5;
                }
            }
        }
        if !accepted {
            let w = r.map(|v| {
                if v.abs() <= lambda {
                    1.0
                } else {
                    lambda / v.abs()
                }
            });
            let aw = DMatrix::from_fn(ap.nrows(), p, |i, j| ap[(i, j)] * w[i]);
            let step = solve_psd(ap.transpose() * aw, &descent, &mut regularized);
            let candidate = &beta + step;
            let v = objective(&candidate);
            if v <= value {
                beta = candidate;
                value = v;
            } else {
                // roundoff-level stall: nothing left to gain
                return Ok(HuberSolution {
                    beta: beta.iter().copied().collect(),
                    objective: value,
                    iterations: iteration + 1,
                    regularized,
                });
            }
        }
    }
    Err(PlmError::NotConverged {
        iterations: MAX_ITERATIONS,
        gradient,
        beta: beta.iter().copied().collect(),
    })
}

/// Fits the partially linear model.
///
/// Columns of `X` without detail content (such as an intercept) are not
/// identified separately from `f`; their coefficients are set to zero and
/// reported as warnings. Under [`PlmSigma::Qr`] those columns are also left
/// out of the QR step.
pub fn fit_plm(
    data: &PlmData,
    basis: &FilterPair,
    coarse_level: usize,
    sigma: PlmSigma,
    lambda: PlmLambda,
) -> Result<PlmFit, PlmError> {
    let model = WaveletModel::new(data, basis, coarse_level)?;
    let (n, p) = model.a.shape();
    let i0 = model.i0();

    let zero = zero_columns(&model.a, i0);
    let keep: Vec<usize> = (0..p).filter(|j| !zero.contains(j)).collect();
    let mut warnings: Vec<PlmWarning> = zero.iter().map(|&j| PlmWarning::ZeroColumn(j)).collect();

    let sigma_hat = match sigma {
        PlmSigma::Known(s) if s.is_finite() && s >= 0.0 => s,
        PlmSigma::Known(s) => {
            return Err(PlmError::Config(format!(
                "sigma must be nonnegative, got {s}"
            )))
        }
        PlmSigma::Qr => {
            let finest = n / 2..n;
            let a_j = select_columns(&model.a, &keep, finest.clone());
            estimate_sigma_qr(&a_j, &model.z[finest]).map_err(|e| match e {
                PlmError::RankDeficient { column } => PlmError::RankDeficient {
                    column: keep[column],
                },
                other => other,
            })?
        }
    };
    let lambda = match lambda {
        PlmLambda::Universal => universal_threshold(n, sigma_hat),
        PlmLambda::Fixed(v) if v.is_finite() && v >= 0.0 => v,
        PlmLambda::Fixed(v) => {
            return Err(PlmError::Config(format!(
                "lambda must be nonnegative, got {v}"
            )))
        }
    };

    let a_keep = select_columns(&model.a, &keep, 0..n);
    let (beta_keep, objective, iterations) = if lambda == 0.0 {
        // no penalty: θ absorbs every residual, any β is optimal; take least squares
        let mut reg = false;
        let zp = DVector::from_column_slice(&model.z[i0..]);
        let ap = select_columns(&a_keep, &(0..keep.len()).collect::<Vec<_>>(), i0..n);
        let b = if keep.is_empty() {
            DVector::zeros(0)
        } else {
            solve_psd(ap.transpose() * &ap, &(ap.transpose() * zp), &mut reg)
        };
        if reg {
            warnings.push(PlmWarning::Regularized);
        }
        (b.iter().copied().collect::<Vec<_>>(), 0.0, 0)
    } else {
        let sol = minimize_huber(&model.z, &a_keep, lambda, i0)?;
        if sol.regularized {
            warnings.push(PlmWarning::Regularized);
        }
        (sol.beta, sol.objective, sol.iterations)
    };
    let mut beta_hat = vec![0.0; p];
    for (k, &j) in keep.iter().enumerate() {
        beta_hat[j] = beta_keep[k];
    }

    let theta_hat = theta_given_beta(&model.z, &model.a, &beta_hat, lambda, i0);
    let decomp = WaveletDecomposition::from_flat(&theta_hat, coarse_level)?;
    let f_hat = idwt(&decomp, basis);
    Ok(PlmFit {
        beta_hat,
        theta_hat,
        f_hat,
        sigma_hat,
        lambda,
        coarse_level,
        objective,
        iterations,
        warnings,
    })
}

/// The M-estimation loss `ρ(u) = ∫₀^|u| (v − δ(v)) dv` matching a
/// thresholding rule.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleLoss {
    rule: ShrinkageRule,
    breakpoints: Vec<f64>,
}

/// Absolute tolerance of [`RuleLoss::evaluate`].
pub const LOSS_TOLERANCE: f64 = 1e-11;

pub fn rho_from_rule(rule: &ShrinkageRule) -> RuleLoss {
    let mut breakpoints = rule.kinks();
    breakpoints.sort_by(f64::total_cmp);
    RuleLoss {
        rule: *rule,
        breakpoints,
    }
}

impl RuleLoss {
    pub fn rule(&self) -> &ShrinkageRule {
        &self.rule
    }

    pub fn evaluate(&self, u: f64) -> f64 {
        let f = |v: f64| v - self.rule.apply(v);
        integrate_piecewise(&f, 0.0, u.abs(), &self.breakpoints, LOSS_TOLERANCE)
    }
}
