//! Scalar shrinkage and thresholding rules.
//!
//! Every rule is an odd function `δ_λ` that preserves the sign of its
//! argument and never increases its magnitude. Rules are evaluated on `|x|`
//! and the sign is reattached afterwards, so `apply(-x) == -apply(x)` holds
//! bit for bit.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Weickert diffusivity constant.
pub const WEICKERT_DIFFUSIVITY_CONSTANT: f64 = 3.31488;

/// Exponent constant of the Weickert shrinker: the diffusivity constant
/// rescaled by `(√2)^8 = 16`.
pub const WEICKERT_SHRINK_CONSTANT: f64 = WEICKERT_DIFFUSIVITY_CONSTANT / 16.0;

/// Default SCAD shape parameter.
pub const SCAD_DEFAULT_A: f64 = 3.7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleError {
    #[error("threshold must be positive and finite, got {0}")]
    Threshold(f64),
    #[error("firm thresholding needs lambda1 < lambda2, got {lambda1} and {lambda2}")]
    FirmOrder { lambda1: f64, lambda2: f64 },
    #[error("SCAD shape parameter must exceed 2, got {0}")]
    ScadShape(f64),
    #[error("unknown shrinkage rule `{0}`")]
    UnknownKind(String),
    #[error("malformed rule spec `{spec}`: {reason}")]
    Spec { spec: String, reason: String },
}

/// The rule families of the catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    Hard,
    Soft,
    Firm,
    Garrote,
    Scad,
    Linear,
    Charbonnier,
    PeronaMalik,
    Weickert,
    Tukey,
}

impl RuleKind {
    pub const ALL: [RuleKind; 10] = [
        RuleKind::Hard,
        RuleKind::Soft,
        RuleKind::Firm,
        RuleKind::Garrote,
        RuleKind::Scad,
        RuleKind::Linear,
        RuleKind::Charbonnier,
        RuleKind::PeronaMalik,
        RuleKind::Weickert,
        RuleKind::Tukey,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleKind::Hard => "hard",
            RuleKind::Soft => "soft",
            RuleKind::Firm => "firm",
            RuleKind::Garrote => "garrote",
            RuleKind::Scad => "scad",
            RuleKind::Linear => "linear",
            RuleKind::Charbonnier => "charbonnier",
            RuleKind::PeronaMalik => "perona_malik",
            RuleKind::Weickert => "weickert",
            RuleKind::Tukey => "tukey",
        }
    }

    /// Rules that map a whole interval around zero to exactly zero.
    pub fn has_kill_region(self) -> bool {
        matches!(
            self,
            RuleKind::Hard | RuleKind::Soft | RuleKind::Firm | RuleKind::Garrote | RuleKind::Scad
        )
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleKind {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let kind = match s.trim().to_ascii_lowercase().as_str() {
            "hard" => RuleKind::Hard,
            "soft" => RuleKind::Soft,
            "firm" => RuleKind::Firm,
            "garrote" => RuleKind::Garrote,
            "scad" => RuleKind::Scad,
            "linear" | "lin" => RuleKind::Linear,
            "charbonnier" | "char" => RuleKind::Charbonnier,
            "perona_malik" | "perona-malik" | "perona" => RuleKind::PeronaMalik,
            "weickert" | "weick" => RuleKind::Weickert,
            "tukey" => RuleKind::Tukey,
            other => return Err(RuleError::UnknownKind(other.to_string())),
        };
        Ok(kind)
    }
}

/// A validated shrinkage rule together with its threshold parameters.
///
/// `lambda` is the threshold (the lower threshold `λ1` for firm). The
/// second firm threshold and the SCAD shape parameter are only meaningful
/// for those kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShrinkageRule {
    kind: RuleKind,
    lambda: f64,
    lambda2: f64,
    a: f64,
}

fn check_threshold(lambda: f64) -> Result<f64, RuleError> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(lambda)
    } else {
        Err(RuleError::Threshold(lambda))
    }
}

impl ShrinkageRule {
    /// Builds a rule of the given kind with its default shape parameters:
    /// `λ2 = 2λ` for firm and `a = 3.7` for SCAD.
    pub fn new(kind: RuleKind, lambda: f64) -> Result<Self, RuleError> {
        match kind {
            RuleKind::Firm => Self::firm(lambda, 2.0 * lambda),
            RuleKind::Scad => Self::scad(lambda, SCAD_DEFAULT_A),
            _ => Ok(Self {
                kind,
                lambda: check_threshold(lambda)?,
                lambda2: 0.0,
                a: 0.0,
            }),
        }
    }

    pub fn hard(lambda: f64) -> Result<Self, RuleError> {
        Self::new(RuleKind::Hard, lambda)
    }

    pub fn soft(lambda: f64) -> Result<Self, RuleError> {
        Self::new(RuleKind::Soft, lambda)
    }

    pub fn garrote(lambda: f64) -> Result<Self, RuleError> {
        Self::new(RuleKind::Garrote, lambda)
    }

    pub fn linear(lambda: f64) -> Result<Self, RuleError> {
        Self::new(RuleKind::Linear, lambda)
    }

    pub fn firm(lambda1: f64, lambda2: f64) -> Result<Self, RuleError> {
        let lambda1 = check_threshold(lambda1)?;
        if !(lambda2 > lambda1) {
            return Err(RuleError::FirmOrder { lambda1, lambda2 });
        }
        Ok(Self {
            kind: RuleKind::Firm,
            lambda: lambda1,
            lambda2,
            a: 0.0,
        })
    }

    pub fn scad(lambda: f64, a: f64) -> Result<Self, RuleError> {
        let lambda = check_threshold(lambda)?;
        if !(a > 2.0) || !a.is_finite() {
            return Err(RuleError::ScadShape(a));
        }
        Ok(Self {
            kind: RuleKind::Scad,
            lambda,
            lambda2: 0.0,
            a,
        })
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Upper firm threshold, `None` for other kinds.
    pub fn lambda2(&self) -> Option<f64> {
        (self.kind == RuleKind::Firm).then_some(self.lambda2)
    }

    /// SCAD shape parameter, `None` for other kinds.
    pub fn scad_a(&self) -> Option<f64> {
        (self.kind == RuleKind::Scad).then_some(self.a)
    }

    /// Same rule family with its threshold moved to `threshold`. Firm keeps
    /// its `λ2/λ1` ratio and SCAD its shape parameter.
    pub fn with_threshold(&self, threshold: f64) -> Result<Self, RuleError> {
        match self.kind {
            RuleKind::Firm => {
                let ratio = self.lambda2 / self.lambda;
                Self::firm(threshold, ratio * threshold)
            }
            RuleKind::Scad => Self::scad(threshold, self.a),
            kind => Self::new(kind, threshold),
        }
    }

    /// Evaluates `δ_λ(x)`.
    pub fn apply(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let m = self.magnitude(x.abs());
        if x < 0.0 {
            -m
        } else {
            m
        }
    }

    /// The rule on the nonnegative half-line.
    fn magnitude(&self, x: f64) -> f64 {
        let lam = self.lambda;
        match self.kind {
            RuleKind::Hard => {
                if x <= lam {
                    0.0
                } else {
                    x
                }
            }
            RuleKind::Soft => {
                if x <= lam {
                    0.0
                } else {
                    x - lam
                }
            }
            RuleKind::Firm => {
                let lam2 = self.lambda2;
                if x <= lam {
                    0.0
                } else if x <= lam2 {
                    lam2 * (x - lam) / (lam2 - lam)
                } else {
                    x
                }
            }
            RuleKind::Garrote => {
                if x <= lam {
                    0.0
                } else {
                    x - lam * lam / x
                }
            }
            RuleKind::Scad => {
                let a = self.a;
                if x <= 2.0 * lam {
                    (x - lam).max(0.0)
                } else if x <= a * lam {
                    ((a - 1.0) * x - a * lam) / (a - 2.0)
                } else {
                    x
                }
            }
            RuleKind::Linear => x / (1.0 + lam),
            RuleKind::Charbonnier => x * (1.0 - (lam * lam / (lam * lam + 2.0 * x * x)).sqrt()),
            RuleKind::PeronaMalik => 2.0 * x * x * x / (2.0 * x * x + lam * lam),
            RuleKind::Weickert => {
                // (λ/x)^8 overflows to +inf for tiny x, which drives exp to 0.
                let ratio = (lam / x).powi(8);
                x * (-WEICKERT_SHRINK_CONSTANT * ratio).exp()
            }
            RuleKind::Tukey => {
                if x <= lam * FRAC_1_SQRT_2 {
                    let x2 = x * x;
                    let l2 = lam * lam;
                    4.0 * x * x2 / l2 - 4.0 * x * x2 * x2 / (l2 * l2)
                } else {
                    x
                }
            }
        }
    }

    /// Points on the positive half-line where the rule is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        let lam = self.lambda;
        match self.kind {
            RuleKind::Hard | RuleKind::Soft | RuleKind::Garrote => vec![lam],
            RuleKind::Firm => vec![lam, self.lambda2],
            RuleKind::Scad => vec![lam, 2.0 * lam, self.a * lam],
            RuleKind::Tukey => vec![lam / SQRT_2],
            RuleKind::Linear
            | RuleKind::Charbonnier
            | RuleKind::PeronaMalik
            | RuleKind::Weickert => Vec::new(),
        }
    }

    /// Whether `δ` jumps at the given point (only hard thresholding does).
    pub fn is_discontinuous_at(&self, x: f64) -> bool {
        self.kind == RuleKind::Hard && x.abs() == self.lambda
    }
}

impl fmt::Display for ShrinkageRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RuleKind::Firm => write!(f, "firm:{},{}", self.lambda, self.lambda2),
            RuleKind::Scad => write!(f, "scad:{},{}", self.lambda, self.a),
            kind => write!(f, "{}:{}", kind, self.lambda),
        }
    }
}

/// Parses `kind:param[,param]`, e.g. `soft:1.0`, `firm:1.0,2.0`,
/// `scad:1.0,3.7`. A bare `kind` gets threshold 1 and default shape
/// parameters, which is useful when the threshold is resolved later.
impl FromStr for ShrinkageRule {
    type Err = RuleError;

    fn from_str(spec: &str) -> Result<Self, Self::Err> {
        let spec_err = |reason: &str| RuleError::Spec {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let (kind_str, params_str) = match spec.split_once(':') {
            Some((k, p)) => (k, Some(p)),
            None => (spec, None),
        };
        let kind: RuleKind = kind_str.parse()?;
        let params: Vec<f64> = match params_str {
            None => Vec::new(),
            Some(p) => p
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| spec_err("parameters must be numbers"))?,
        };
        let max_params = match kind {
            RuleKind::Firm | RuleKind::Scad => 2,
            _ => 1,
        };
        if params.len() > max_params {
            return Err(spec_err("too many parameters"));
        }
        let lambda = params.first().copied().unwrap_or(1.0);
        match (kind, params.get(1)) {
            (RuleKind::Firm, Some(&l2)) => Self::firm(lambda, l2),
            (RuleKind::Scad, Some(&a)) => Self::scad(lambda, a),
            _ => Self::new(kind, lambda),
        }
    }
}

/// Outcome of checking that firm thresholding tends to hard and soft
/// thresholding in its two limits.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitingCasesReport {
    pub lambda: f64,
    /// Upper threshold used for the hard limit (`λ + ε`).
    pub hard_lambda2: f64,
    /// Upper threshold used for the soft limit (large).
    pub soft_lambda2: f64,
    pub hard_max_deviation: f64,
    pub hard_tolerance: f64,
    pub soft_max_deviation: f64,
    pub soft_tolerance: f64,
    pub grid_points: usize,
}

impl LimitingCasesReport {
    pub fn hard_limit_holds(&self) -> bool {
        self.hard_max_deviation <= self.hard_tolerance
    }

    pub fn soft_limit_holds(&self) -> bool {
        self.soft_max_deviation <= self.soft_tolerance
    }

    pub fn passed(&self) -> bool {
        self.hard_limit_holds() && self.soft_limit_holds()
    }
}

/// Sweeps `x` over 4001 points of `[-10λ, 10λ]` comparing firm thresholding
/// with `λ2 = λ(1 + 1e-9)` against hard thresholding (away from the
/// transition band `λ < |x| ≤ λ2`) and with `λ2 = 1e9·λ` against soft
/// thresholding.
///
/// Away from the band, firm and hard agree exactly. For the soft limit the
/// gap is `(|x| − λ)·λ/(λ2 − λ)`, so the tolerance is that bound at the
/// edge of the grid.
pub fn limiting_cases_check(lambda: f64) -> Result<LimitingCasesReport, RuleError> {
    const POINTS: usize = 4001;
    let hard_lambda2 = lambda * (1.0 + 1e-9);
    let soft_lambda2 = lambda * 1e9;
    let hard = ShrinkageRule::hard(lambda)?;
    let soft = ShrinkageRule::soft(lambda)?;
    let firm_hard = ShrinkageRule::firm(lambda, hard_lambda2)?;
    let firm_soft = ShrinkageRule::firm(lambda, soft_lambda2)?;

    let half_width = 10.0 * lambda;
    let mut hard_dev = 0.0f64;
    let mut soft_dev = 0.0f64;
    for i in 0..POINTS {
        let x = -half_width + 2.0 * half_width * i as f64 / (POINTS - 1) as f64;
        let ax = x.abs();
        if !(ax > lambda && ax <= hard_lambda2) {
            hard_dev = hard_dev.max((firm_hard.apply(x) - hard.apply(x)).abs());
        }
        soft_dev = soft_dev.max((firm_soft.apply(x) - soft.apply(x)).abs());
    }
    let soft_tolerance =
        (half_width - lambda) * lambda / (soft_lambda2 - lambda) * (1.0 + 1e-6) + 1e-12;
    Ok(LimitingCasesReport {
        lambda,
        hard_lambda2,
        soft_lambda2,
        hard_max_deviation: hard_dev,
        hard_tolerance: 1e-12 * half_width,
        soft_max_deviation: soft_dev,
        soft_tolerance,
        grid_points: POINTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule(kind: RuleKind) -> ShrinkageRule {
        ShrinkageRule::new(kind, 1.0).unwrap()
    }

    fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
        (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
    }

    #[test]
    fn worked_examples() {
        assert_eq!(rule(RuleKind::Soft).apply(2.0), 1.0);
        let scad = ShrinkageRule::scad(1.0, 3.7).unwrap();
        assert!((scad.apply(3.0) - 4.4 / 1.7).abs() < 1e-14);
        assert!((scad.apply(3.0) - 2.5882).abs() < 1e-4);
        assert_eq!(rule(RuleKind::Garrote).apply(2.0), 1.5);
        let firm = ShrinkageRule::firm(1.0, 2.0).unwrap();
        assert_eq!(firm.apply(1.5), 1.0);
        let weick = rule(RuleKind::Weickert);
        assert_eq!(weick.apply(0.0), 0.0);
        assert!((weick.apply(1e6) / 1e6 - 1.0).abs() < 1e-12);
        assert_eq!(rule(RuleKind::Linear).apply(3.0), 1.5);
        let pm = rule(RuleKind::PeronaMalik);
        assert!((pm.apply(1.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn hard_assigns_zero_at_threshold() {
        let hard = rule(RuleKind::Hard);
        assert_eq!(hard.apply(1.0), 0.0);
        assert_eq!(hard.apply(-1.0), 0.0);
        assert_eq!(hard.apply(1.0 + 1e-12), 1.0 + 1e-12);
    }

    #[test]
    fn weickert_constants_agree() {
        assert_eq!(WEICKERT_SHRINK_CONSTANT, 0.20718);
    }

    #[test]
    fn tukey_transition_is_continuous() {
        let t = rule(RuleKind::Tukey);
        let x0 = FRAC_1_SQRT_2;
        let below = t.apply(x0 * (1.0 - 1e-12));
        assert!((below - x0).abs() < 1e-10);
        assert_eq!(t.apply(x0 * (1.0 + 1e-12)), x0 * (1.0 + 1e-12));
    }

    #[test]
    fn constructors_reject_bad_parameters() {
        assert!(matches!(
            ShrinkageRule::soft(0.0),
            Err(RuleError::Threshold(_))
        ));
        assert!(matches!(
            ShrinkageRule::soft(f64::NAN),
            Err(RuleError::Threshold(_))
        ));
        assert!(matches!(
            ShrinkageRule::firm(2.0, 1.0),
            Err(RuleError::FirmOrder { .. })
        ));
        assert!(matches!(
            ShrinkageRule::firm(1.0, 1.0),
            Err(RuleError::FirmOrder { .. })
        ));
        assert!(matches!(
            ShrinkageRule::scad(1.0, 2.0),
            Err(RuleError::ScadShape(_))
        ));
        let scad = ShrinkageRule::new(RuleKind::Scad, 1.0).unwrap();
        assert_eq!(scad.scad_a(), Some(3.7));
    }

    #[test]
    fn spec_strings_round_trip() {
        for spec in [
            "soft:1",
            "firm:1,2",
            "scad:1,3.7",
            "perona_malik:0.5",
            "tukey:2",
        ] {
            let rule: ShrinkageRule = spec.parse().unwrap();
            let again: ShrinkageRule = rule.to_string().parse().unwrap();
            assert_eq!(rule, again);
        }
        let firm: ShrinkageRule = "firm:1.0,2.0".parse().unwrap();
        assert_eq!(firm.lambda2(), Some(2.0));
        assert!("bogus:1".parse::<ShrinkageRule>().is_err());
        assert!("soft:1,2".parse::<ShrinkageRule>().is_err());
        assert!("soft:x".parse::<ShrinkageRule>().is_err());
        let bare: ShrinkageRule = "garrote".parse().unwrap();
        assert_eq!(bare.lambda(), 1.0);
    }

    #[test]
    fn with_threshold_keeps_shape() {
        let firm = ShrinkageRule::firm(1.0, 3.0)
            .unwrap()
            .with_threshold(2.0)
            .unwrap();
        assert_eq!(firm.lambda2(), Some(6.0));
        let scad = ShrinkageRule::scad(1.0, 4.0)
            .unwrap()
            .with_threshold(0.5)
            .unwrap();
        assert_eq!(scad.scad_a(), Some(4.0));
        assert_eq!(scad.lambda(), 0.5);
    }

    #[test]
    fn sign_magnitude_and_antisymmetry() {
        for kind in RuleKind::ALL {
            let r = rule(kind);
            for x in grid(-50.0, 50.0, 10_001) {
                let y = r.apply(x);
                assert!(y == 0.0 || y.signum() == x.signum(), "{kind} sign at {x}");
                assert!(y.abs() <= x.abs(), "{kind} magnitude at {x}");
                assert_eq!(r.apply(-x), -y, "{kind} antisymmetry at {x}");
            }
        }
    }

    #[test]
    fn monotone_on_dense_grid() {
        for kind in RuleKind::ALL {
            let r = rule(kind);
            let mut prev = f64::NEG_INFINITY;
            for x in grid(-50.0, 50.0, 10_000) {
                let y = r.apply(x);
                assert!(y >= prev, "{kind} not monotone at {x}");
                prev = y;
            }
        }
    }

    fn max_jump(r: &ShrinkageRule, n: usize) -> (f64, usize) {
        let mut jump = 0.0f64;
        let mut big = 0;
        let pts: Vec<f64> = grid(-5.0, 5.0, n).collect();
        for w in pts.windows(2) {
            let d = (r.apply(w[1]) - r.apply(w[0])).abs();
            if d > 0.5 {
                big += 1;
            }
            jump = jump.max(d);
        }
        (jump, big)
    }

    #[test]
    fn continuity_and_hard_jump() {
        for kind in RuleKind::ALL {
            let r = rule(kind);
            let (coarse, _) = max_jump(&r, 1_001);
            let (fine, big) = max_jump(&r, 100_001);
            if kind == RuleKind::Hard {
                // one jump of size λ on each side of zero
                assert_eq!(big, 2);
                assert!((fine - 1.0).abs() < 1e-3);
            } else {
                assert_eq!(big, 0, "{kind}");
                assert!(fine < coarse / 10.0, "{kind}: {fine} vs {coarse}");
            }
        }
    }

    #[test]
    fn kill_regions() {
        for kind in [
            RuleKind::Hard,
            RuleKind::Soft,
            RuleKind::Garrote,
            RuleKind::Firm,
            RuleKind::Scad,
        ] {
            let r = rule(kind);
            for x in grid(-1.0, 1.0, 2001) {
                assert_eq!(r.apply(x), 0.0, "{kind} at {x}");
            }
            assert!(r.apply(1.0 + 1e-9) != 0.0, "{kind}");
        }
        // Weickert is positive for every x > 0 analytically; below about 0.36λ
        // the value is smaller than the least subnormal double and rounds to 0.
        let w = rule(RuleKind::Weickert);
        assert_eq!(w.apply(0.0), 0.0);
        for x in grid(0.4, 50.0, 1000) {
            assert!(w.apply(x) > 0.0 && w.apply(-x) < 0.0, "weickert at {x}");
        }
        let t = rule(RuleKind::Tukey);
        let knee = FRAC_1_SQRT_2;
        assert_eq!(t.apply(knee * 1.01), knee * 1.01);
        assert!(t.apply(knee * 0.99) < knee * 0.99);
    }

    #[test]
    fn firm_limits() {
        let near_hard = ShrinkageRule::firm(1.0, 1.0 + 1e-9).unwrap();
        assert!((near_hard.apply(1.5) - 1.5).abs() < 1e-6);
        let near_soft = ShrinkageRule::firm(1.0, 1e9).unwrap();
        assert!((near_soft.apply(5.0) - 4.0).abs() < 1e-6);
        let report = limiting_cases_check(1.0).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.grid_points, 4001);
        let report = limiting_cases_check(0.3).unwrap();
        assert!(report.passed(), "{report:?}");
    }
}
