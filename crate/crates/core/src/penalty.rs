//! Penalties whose penalized least-squares solution is a given shrinkage
//! rule.
//!
//! For an increasing antisymmetric rule with `0 ≤ δ(x) ≤ x` on `x ≥ 0`, the
//! penalty
//!
//! ```text
//! p(θ) = ∫₀^θ (r(u) − u) du,     r(x) = sup{z : δ(z) ≤ x},
//! ```
//!
//! makes `δ(z)` the minimizer of `(z − θ)² + 2p(|θ|)` wherever `δ` is
//! continuous at `z`. With this convention the objective's derivative on
//! `θ > 0` is `2(r(θ) − z)`, so the objective is convex.

use thiserror::Error;

use crate::quadrature::{integrate_piecewise, simpson_with_ends};
use crate::shrink::{RuleKind, ShrinkageRule};

/// Absolute tolerance of the generalized inverse, relative to `max(1, |z|)`.
pub const INVERSE_TOLERANCE: f64 = 1e-12;

/// Absolute tolerance of a penalty evaluation.
pub const PENALTY_TOLERANCE: f64 = 1e-11;

/// Points of the brute-force grid used by [`penalized_ls_minimizer`].
pub const MINIMIZER_GRID_POINTS: usize = 100_001;

const MAX_BRACKET_DOUBLINGS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PenaltyError {
    #[error("generalized inverse is defined on x >= 0, got {0}")]
    Domain(f64),
    #[error("could not bracket the generalized inverse at x = {0}")]
    Bracket(f64),
}

/// `r(x) = sup{z : δ(z) ≤ x}` for `x ≥ 0`.
///
/// Soft, hard, linear, firm and SCAD are piecewise linear and inverted in
/// closed form. The remaining rules are inverted numerically on the bracket
/// `[x, x + C]`: `δ(x) ≤ x` holds at the left end, and `C` is widened by
/// doubling until `δ` exceeds `x` at the right end.
pub fn generalized_inverse(rule: &ShrinkageRule, x: f64) -> Result<f64, PenaltyError> {
    if !(x >= 0.0) {
        return Err(PenaltyError::Domain(x));
    }
    let lam = rule.lambda();
    let r = match rule.kind() {
        RuleKind::Soft => x + lam,
        RuleKind::Hard => x.max(lam),
        RuleKind::Linear => (1.0 + lam) * x,
        RuleKind::Firm => {
            let lam2 = rule.lambda2().unwrap_or(2.0 * lam);
            if x < lam2 {
                lam + x * (lam2 - lam) / lam2
            } else {
                x
            }
        }
        RuleKind::Scad => {
            let a = rule.scad_a().unwrap_or(crate::shrink::SCAD_DEFAULT_A);
            if x < lam {
                x + lam
            } else if x < a * lam {
                ((a - 2.0) * x + a * lam) / (a - 1.0)
            } else {
                x
            }
        }
        RuleKind::Garrote
        | RuleKind::Charbonnier
        | RuleKind::PeronaMalik
        | RuleKind::Weickert
        | RuleKind::Tukey => bracketed_sup(|z| rule.apply(z), x, x, x + 2.0 * lam)?,
    };
    Ok(r)
}

/// Largest `z` with `delta(z) ≤ x`, for nondecreasing `delta`, searched
/// upwards from `lo` (which must satisfy `delta(lo) ≤ x`, else `x` is used)
/// with `hi` as the first guess for the upper end.
///
/// Steps are false-position (Illinois variant) with a bisection step
/// whenever an interpolation step fails to halve the bracket, so
/// convergence is superlinear on smooth pieces and never slower than
/// bisection on flat ones.
fn bracketed_sup(
    delta: impl Fn(f64) -> f64,
    x: f64,
    lo: f64,
    hi: f64,
) -> Result<f64, PenaltyError> {
    let (mut lo, mut f_lo) = {
        let f = delta(lo) - x;
        if lo >= x && f <= 0.0 {
            (lo, f)
        } else {
            (x, delta(x) - x)
        }
    };
    let mut width = (hi - lo).max(f64::EPSILON * lo.max(1.0));
    let mut hi = lo + width;
    let mut f_hi = delta(hi) - x;
    let mut doublings = 0;
    while !(f_hi > 0.0) {
        if doublings == MAX_BRACKET_DOUBLINGS || !hi.is_finite() {
            return Err(PenaltyError::Bracket(x));
        }
        lo = hi;
        f_lo = f_hi;
        width *= 2.0;
        hi = lo + width;
        f_hi = delta(hi) - x;
        doublings += 1;
    }

    let tol = INVERSE_TOLERANCE * x.max(1.0);
    // which end was kept on the previous step: -1 lo, 1 hi, 0 neither
    let mut side = 0i8;
    let mut bisect_next = false;
    while hi - lo > tol {
        let before = hi - lo;
        let mid = if bisect_next || f_lo >= 0.0 {
            0.5 * (lo + hi)
        } else {
            let t = lo - f_lo * (hi - lo) / (f_hi - f_lo);
            if t > lo && t < hi {
                t
            } else {
                0.5 * (lo + hi)
            }
        };
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = delta(mid) - x;
        if f_mid <= 0.0 {
            if x > 0.0 && f_mid == 0.0 {
                // δ is strictly increasing above its kill region
                return Ok(mid);
            }
            lo = mid;
            f_lo = f_mid;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            f_hi = f_mid;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
        bisect_next = hi - lo > 0.5 * before;
    }
    Ok(0.5 * (lo + hi))
}

/// The penalty induced by a shrinkage rule.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyFunction {
    rule: ShrinkageRule,
    /// Points on `u ≥ 0` where `r(u) − u` may be non-smooth, ascending.
    breakpoints: Vec<f64>,
}

pub fn penalty_from_rule(rule: &ShrinkageRule) -> PenaltyFunction {
    let mut breakpoints: Vec<f64> = rule
        .kinks()
        .into_iter()
        .flat_map(|k| [k, rule.apply(k)])
        .filter(|&u| u > 0.0)
        .collect();
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    PenaltyFunction {
        rule: *rule,
        breakpoints,
    }
}

impl PenaltyFunction {
    pub fn rule(&self) -> &ShrinkageRule {
        &self.rule
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// `r(u) − u`, nonnegative for `u ≥ 0`.
    pub fn integrand(&self, u: f64) -> f64 {
        generalized_inverse(&self.rule, u).expect("catalog rules are unbounded above") - u
    }

    /// `p(|θ|)`.
    pub fn evaluate(&self, theta: f64) -> f64 {
        self.increment(0.0, theta.abs())
    }

    /// `p(b) − p(a)` for `0 ≤ a ≤ b`, integrated directly over `[a, b]`.
    pub fn increment(&self, a: f64, b: f64) -> f64 {
        integrate_piecewise(
            &|u| self.integrand(u),
            a,
            b,
            &self.breakpoints,
            PENALTY_TOLERANCE,
        )
    }

    /// `r(u)` searched inside `[lo, hi]`, a bracket known from the
    /// monotonicity of `r`; falls back to the unhinted search when the
    /// bracket turns out wrong.
    fn inverse_between(&self, u: f64, lo: f64, hi: f64) -> f64 {
        match self.rule.kind() {
            RuleKind::Garrote
            | RuleKind::Charbonnier
            | RuleKind::PeronaMalik
            | RuleKind::Weickert
            | RuleKind::Tukey => bracketed_sup(|z| self.rule.apply(z), u, lo, hi),
            _ => generalized_inverse(&self.rule, u),
        }
        .expect("catalog rules are unbounded above")
    }

    /// `p` at every node of an ascending grid starting at 0, accumulated
    /// segment by segment to [`PENALTY_TOLERANCE`] per unit length. Each
    /// segment reuses `r` at its left end to bracket the inner evaluations.
    pub fn cumulative(&self, nodes: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(nodes.len());
        let Some(&first) = nodes.first() else {
            return out;
        };
        let mut acc = self.evaluate(first);
        out.push(acc);
        let mut bp = self.breakpoints.iter().copied().peekable();
        let mut r_prev = self.integrand(first) + first;
        for w in nodes.windows(2) {
            let (a, b) = (w[0], w[1]);
            while bp.peek().is_some_and(|&k| k <= a) {
                bp.next();
            }
            let piece = |lo: f64, hi: f64, r_lo: f64| -> (f64, f64) {
                let guess = r_lo + 4.0 * (hi - lo) + f64::EPSILON * r_lo.max(1.0);
                let r_hi = self.inverse_between(hi, r_lo, guess);
                let f = |u: f64| self.inverse_between(u, r_lo, r_hi) - u;
                // per unit length, so the target shrinks with the noise of `f`
                let tol = PENALTY_TOLERANCE * (hi - lo);
                let integral = simpson_with_ends(&f, lo, hi, r_lo - lo, r_hi - hi, tol);
                (integral, r_hi)
            };
            let (integral, r_b) = match bp.peek() {
                Some(&k) if k < b => {
                    let (left, r_k) = piece(a, k, r_prev);
                    let (right, r_b) = piece(k, b, r_k);
                    (left + right, r_b)
                }
                _ => piece(a, b, r_prev),
            };
            acc += integral;
            out.push(acc);
            r_prev = r_b;
        }
        out
    }
}

/// Brute-force global minimizer of `k(θ) = (z − θ)² + 2p(|θ|)`.
///
/// `k` is evaluated on [`MINIMIZER_GRID_POINTS`] equispaced points of
/// `[−|z| − 1, |z| + 1]`, then the best grid cell pair is refined by
/// golden-section search.
pub fn penalized_ls_minimizer(z: f64, p: &PenaltyFunction) -> f64 {
    let half = MINIMIZER_GRID_POINTS / 2;
    let radius = z.abs() + 1.0;
    let h = radius / half as f64;
    let nodes: Vec<f64> = (0..=half).map(|i| i as f64 * h).collect();
    let pen = p.cumulative(&nodes);

    let objective_at = |i: isize| -> f64 {
        let idx = i.unsigned_abs();
        let theta = i as f64 * h;
        (z - theta).powi(2) + 2.0 * pen[idx]
    };
    let (mut best, mut best_val) = (0isize, objective_at(0));
    for i in -(half as isize)..=(half as isize) {
        let v = objective_at(i);
        if v < best_val {
            best = i;
            best_val = v;
        }
    }

    let penalty_at = |theta: f64| -> f64 {
        let t = theta.abs();
        let j = ((t / h).floor() as usize).min(half);
        pen[j] + p.increment(nodes[j], t)
    };
    let objective = |theta: f64| (z - theta).powi(2) + 2.0 * penalty_at(theta);
    let lo = ((best - 1) as f64 * h).max(-radius);
    let hi = ((best + 1) as f64 * h).min(radius);
    let (theta, val) = golden_section(objective, lo, hi, 1e-12);
    if val <= best_val {
        theta
    } else {
        best as f64 * h
    }
}

/// Minimizes a unimodal function on `[a, b]`; returns the point and value.
fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let candidates = [(a, f(a)), (b, f(b)), (c, fc), (d, fd)];
    candidates
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("nonempty")
}
