//! Correspondence between shrinkage rules and explicit nonlinear diffusion.
//!
//! One step of shift-invariant single-level Haar shrinkage equals one
//! explicit Euler step of 1-D Perona–Malik diffusion with `Δt = 1/4` when the
//! diffusivity and the shrinker are linked by
//!
//! ```text
//! g(|x|) = 1 − (√2/|x|)·δ(|x|/√2),      δ(|x|) = |x|·(1 − g(√2|x|)).
//! ```

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;
use std::sync::Arc;

use crate::shrink::{RuleError, ShrinkageRule, WEICKERT_DIFFUSIVITY_CONSTANT};

/// Relative offset at which a rule-derived diffusivity is evaluated in place
/// of `x = 0`, where the correspondence formula is `0/0`.
pub const ZERO_GRADIENT_OFFSET: f64 = 1e-12;

type GradientFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
enum Kind {
    Rule(ShrinkageRule),
    Charbonnier,
    PeronaMalik,
    Weickert,
    Tukey,
    Constant(f64),
    Custom(Arc<GradientFn>),
}

/// A diffusivity `g`, evaluated on gradient magnitudes `|x| ≥ 0`.
#[derive(Clone)]
pub struct Diffusivity {
    name: String,
    lambda: f64,
    kind: Kind,
}

impl fmt::Debug for Diffusivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Diffusivity")
            .field("name", &self.name)
            .field("lambda", &self.lambda)
            .finish()
    }
}

fn check_lambda(lambda: f64) -> Result<f64, RuleError> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(lambda)
    } else {
        Err(RuleError::Threshold(lambda))
    }
}

impl Diffusivity {
    /// Diffusivity induced by a shrinkage rule.
    pub fn from_rule(rule: ShrinkageRule) -> Self {
        Self {
            name: rule.kind().name().to_string(),
            lambda: rule.lambda(),
            kind: Kind::Rule(rule),
        }
    }

    /// `(1 + x²/λ²)^(-1/2)`.
    pub fn charbonnier(lambda: f64) -> Result<Self, RuleError> {
        Ok(Self::named(
            "charbonnier",
            check_lambda(lambda)?,
            Kind::Charbonnier,
        ))
    }

    /// `(1 + x²/λ²)^(-1)`.
    pub fn perona_malik(lambda: f64) -> Result<Self, RuleError> {
        Ok(Self::named(
            "perona_malik",
            check_lambda(lambda)?,
            Kind::PeronaMalik,
        ))
    }

    /// `1 − exp(−3.31488/(x/λ)^8)` for `x > 0`. At `x = 0` the limit 1 is
    /// returned; the value there never affects a diffusion step because the
    /// flux carries a factor `x`.
    pub fn weickert(lambda: f64) -> Result<Self, RuleError> {
        Ok(Self::named(
            "weickert",
            check_lambda(lambda)?,
            Kind::Weickert,
        ))
    }

    /// `(1 − (x/λ)²)²` for `x ≤ λ`, zero beyond.
    pub fn tukey(lambda: f64) -> Result<Self, RuleError> {
        Ok(Self::named("tukey", check_lambda(lambda)?, Kind::Tukey))
    }

    /// `g ≡ c`; linear diffusion (the discrete heat equation).
    pub fn constant(c: f64) -> Self {
        Self::named("constant", c, Kind::Constant(c))
    }

    /// Arbitrary diffusivity given as a function of `|x|`.
    pub fn custom(
        name: impl Into<String>,
        lambda: f64,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            lambda,
            kind: Kind::Custom(Arc::new(g)),
        }
    }

    fn named(name: &str, lambda: f64, kind: Kind) -> Self {
        Self {
            name: name.to_string(),
            lambda,
            kind,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The source rule for rule-derived diffusivities.
    pub fn rule(&self) -> Option<&ShrinkageRule> {
        match &self.kind {
            Kind::Rule(r) => Some(r),
            _ => None,
        }
    }

    /// Evaluates `g(|x|)`.
    pub fn evaluate(&self, x: f64) -> f64 {
        let x = x.abs();
        let lam = self.lambda;
        match &self.kind {
            Kind::Rule(rule) => {
                let x = if x == 0.0 {
                    ZERO_GRADIENT_OFFSET * lam
                } else {
                    x
                };
                1.0 - SQRT_2 / x * rule.apply(x / SQRT_2)
            }
            Kind::Charbonnier => 1.0 / (1.0 + (x / lam).powi(2)).sqrt(),
            Kind::PeronaMalik => 1.0 / (1.0 + (x / lam).powi(2)),
            Kind::Weickert => {
                if x == 0.0 {
                    1.0
                } else {
                    1.0 - (-WEICKERT_DIFFUSIVITY_CONSTANT / (x / lam).powi(8)).exp()
                }
            }
            Kind::Tukey => {
                if x <= lam {
                    (1.0 - (x / lam).powi(2)).powi(2)
                } else {
                    0.0
                }
            }
            Kind::Constant(c) => *c,
            Kind::Custom(g) => g(x),
        }
    }
}

/// The diffusivity corresponding to `rule` at `Δt = 1/4`.
pub fn shrink_to_diffusivity(rule: &ShrinkageRule) -> Diffusivity {
    Diffusivity::from_rule(*rule)
}

/// Shrinkage function induced by a diffusivity, `δ(x) = x·(1 − g(√2|x|))`.
#[derive(Debug, Clone)]
pub struct InducedShrinkage {
    diffusivity: Diffusivity,
}

impl InducedShrinkage {
    pub fn diffusivity(&self) -> &Diffusivity {
        &self.diffusivity
    }

    pub fn apply(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        x * (1.0 - self.diffusivity.evaluate(SQRT_2 * x.abs()))
    }
}

pub fn diffusivity_to_shrink(g: &Diffusivity) -> InducedShrinkage {
    InducedShrinkage {
        diffusivity: g.clone(),
    }
}

/// One explicit Euler step of `u_t = (g(|u_x|) u_x)_x` on a grid of unit
/// spacing:
///
/// ```text
/// u_k = f_k + Δt·[(f_{k+1} − f_k)·g(|f_{k+1} − f_k|) − (f_k − f_{k−1})·g(|f_k − f_{k−1}|)]
/// ```
///
/// with reflecting boundaries `f_{−1} = f_0`, `f_n = f_{n−1}`, so the
/// boundary fluxes vanish and the sum of the signal is conserved.
pub fn diffusion_step(signal: &[f64], g: &Diffusivity, dt: f64) -> Vec<f64> {
    let n = signal.len();
    // flux[k] sits between samples k and k + 1
    let flux: Vec<f64> = signal
        .windows(2)
        .map(|w| {
            let diff = w[1] - w[0];
            if diff == 0.0 {
                0.0
            } else {
                diff * g.evaluate(diff)
            }
        })
        .collect();
    (0..n)
        .map(|k| {
            let right = if k + 1 < n { flux[k] } else { 0.0 };
            let left = if k > 0 { flux[k - 1] } else { 0.0 };
            signal[k] + dt * (right - left)
        })
        .collect()
}

/// One step of shift-invariant single-level Haar shrinkage written in the
/// signal domain:
///
/// ```text
/// u_k = ¼(f_{k−1} + 2f_k + f_{k+1})
///       + (1/(2√2))·(−δ((f_{k+1} − f_k)/√2) + δ((f_k − f_{k−1})/√2))
/// ```
///
/// with the same reflecting boundaries as [`diffusion_step`].
pub fn haar_shift_shrink_step(signal: &[f64], delta: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = signal.len();
    let c = 0.5 * FRAC_1_SQRT_2;
    (0..n)
        .map(|k| {
            let f = signal[k];
            let prev = if k > 0 { signal[k - 1] } else { f };
            let next = if k + 1 < n { signal[k + 1] } else { f };
            0.25 * (prev + 2.0 * f + next)
                + c * (-delta((next - f) / SQRT_2) + delta((f - prev) / SQRT_2))
        })
        .collect()
}
