//! Orthonormal quadrature-mirror filter pairs.
//!
//! The wavelet (high-pass) filter is derived from the scaling filter by the
//! alternating flip `g[k] = (-1)^(k+1) h[L-1-k]`. For Haar this gives
//! `g = (-1, 1)/√2`, so a rising step produces a positive detail
//! coefficient.

#![allow(clippy::excessive_precision)]

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use super::DwtError;

const HAAR: [f64; 2] = [FRAC_1_SQRT_2, FRAC_1_SQRT_2];

// Daubechies extremal-phase scaling filters, computed by spectral
// factorization at 60 significant digits.
const DB2: [f64; 4] = [
    0.48296291314453414337,
    0.83651630373780790558,
    0.22414386804201338103,
    -0.12940952255126038117,
];
const DB3: [f64; 6] = [
    0.332670552950082616,
    0.80689150931109257649,
    0.4598775021184915701,
    -0.1350110200102545887,
    -0.085441273882026661693,
    0.035226291885709536603,
];
const DB4: [f64; 8] = [
    0.23037781330889650086,
    0.71484657055291564709,
    0.63088076792985890788,
    -0.027983769416859854211,
    -0.18703481171909308408,
    0.030841381835560763627,
    0.032883011666885199735,
    -0.010597401785069032105,
];
const DB5: [f64; 10] = [
    0.16010239797419291448,
    0.60382926979718967054,
    0.72430852843777292773,
    0.13842814590132073151,
    -0.24229488706638203186,
    -0.032244869584638374648,
    0.077571493840045713523,
    -0.0062414902127982742742,
    -0.012580751999081999469,
    0.003335725285473771278,
];
const DB6: [f64; 12] = [
    0.11154074335010946362,
    0.49462389039845308568,
    0.75113390802109535068,
    0.31525035170919762909,
    -0.22626469396543982008,
    -0.12976686756726193556,
    0.097501605587323049102,
    0.027522865530305728626,
    -0.031582039317486029565,
    0.00055384220116149613925,
    0.0047772575109455106396,
    -0.0010773010853084795649,
];
const DB7: [f64; 14] = [
    0.07785205408500917902,
    0.39653931948191730654,
    0.72913209084623511992,
    0.46978228740519312247,
    -0.14390600392856497541,
    -0.22403618499387498264,
    0.071309219266830264751,
    0.080612609151083071913,
    -0.03802993693501441358,
    -0.016574541630666880654,
    0.012550998556099840613,
    0.00042957797292136652113,
    -0.0018016407040474909153,
    0.00035371379997452024845,
];
const DB8: [f64; 16] = [
    0.054415842243104009955,
    0.31287159091429997066,
    0.67563073629728980681,
    0.58535468365420671277,
    -0.015829105256349305667,
    -0.28401554296154692652,
    0.00047248457391328277036,
    0.12874742662047845886,
    -0.01736930100180754617,
    -0.044088253930794751507,
    0.013981027917398281649,
    0.0087460940474057767164,
    -0.0048703529934515743104,
    -0.0003917403733769470463,
    0.00067544940645056936637,
    -0.00011747678412476953373,
];
const DB9: [f64; 18] = [
    0.038077947363878346589,
    0.24383467461259035373,
    0.6048231236901111119,
    0.65728807805130053808,
    0.13319738582500757619,
    -0.29327378327917490881,
    -0.096840783222976460514,
    0.14854074933810638014,
    0.030725681479333379212,
    -0.067632829061329973676,
    0.00025094711483145195759,
    0.022361662123679097205,
    -0.0047232047577513972779,
    -0.0042815036824634298345,
    0.0018476468830562264766,
    0.00023038576352319596721,
    -0.00025196318894271013697,
    0.000039347320316271599481,
];
const DB10: [f64; 20] = [
    0.026670057900555553587,
    0.18817680007769148902,
    0.52720118893172558648,
    0.68845903945360356574,
    0.28117234366057746075,
    -0.24984642432731537942,
    -0.1959462743773770435,
    0.12736934033579326008,
    0.09305736460357235116,
    -0.071394147166397087145,
    -0.029457536821875812858,
    0.03321267405934100174,
    0.0036065535669561696554,
    -0.010733175483330575044,
    0.0013953517470529011658,
    0.0019924052951850561172,
    -0.00068585669495971162656,
    -0.00011646685512928545095,
    0.000093588670320069591334,
    -0.000013264202894521244812,
];

/// Tolerance on the orthonormality and normalization identities.
pub const FILTER_TOLERANCE: f64 = 1e-12;

/// A scaling/wavelet filter pair defining an orthonormal wavelet basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterPair {
    name: String,
    low_pass: Vec<f64>,
    high_pass: Vec<f64>,
    vanishing_moments: usize,
}

impl FilterPair {
    pub fn haar() -> Self {
        Self::from_low_pass("haar", HAAR.to_vec(), 1).expect("built-in Haar filter is valid")
    }

    /// Daubechies extremal-phase filter with `moments` vanishing moments
    /// (`2·moments` taps). `moments = 1` is Haar.
    pub fn daubechies(moments: usize) -> Result<Self, DwtError> {
        let taps: &[f64] = match moments {
            1 => return Ok(Self::haar()),
            2 => &DB2,
            3 => &DB3,
            4 => &DB4,
            5 => &DB5,
            6 => &DB6,
            7 => &DB7,
            8 => &DB8,
            9 => &DB9,
            10 => &DB10,
            _ => return Err(DwtError::UnknownWavelet(format!("db{moments}"))),
        };
        Self::from_low_pass(format!("db{moments}"), taps.to_vec(), moments)
    }

    /// Looks a filter up by name: `haar`, `dbN` (N vanishing moments, 1..=10)
    /// or `dN`/`daubN` (N taps, even).
    pub fn by_name(name: &str) -> Result<Self, DwtError> {
        let lower = name.trim().to_ascii_lowercase();
        let unknown = || DwtError::UnknownWavelet(name.to_string());
        if lower == "haar" {
            return Ok(Self::haar());
        }
        if let Some(rest) = lower.strip_prefix("db") {
            let m: usize = rest.parse().map_err(|_| unknown())?;
            return Self::daubechies(m).map_err(|_| unknown());
        }
        let taps = lower
            .strip_prefix("daub")
            .or_else(|| lower.strip_prefix('d'))
            .and_then(|rest| rest.parse::<usize>().ok())
            .ok_or_else(unknown)?;
        if taps % 2 != 0 {
            return Err(unknown());
        }
        Self::daubechies(taps / 2).map_err(|_| unknown())
    }

    /// Builds a pair from a scaling filter, deriving the wavelet filter by
    /// the alternating flip, and checks normalization and orthonormality.
    pub fn from_low_pass(
        name: impl Into<String>,
        low_pass: Vec<f64>,
        vanishing_moments: usize,
    ) -> Result<Self, DwtError> {
        let len = low_pass.len();
        if len < 2 || len % 2 != 0 {
            return Err(DwtError::InvalidFilter(format!(
                "scaling filter must have even length >= 2, got {len}"
            )));
        }
        if vanishing_moments == 0 {
            return Err(DwtError::InvalidFilter(
                "at least one vanishing moment is required".into(),
            ));
        }
        let high_pass: Vec<f64> = (0..len)
            .map(|k| {
                let v = low_pass[len - 1 - k];
                if k % 2 == 0 {
                    -v
                } else {
                    v
                }
            })
            .collect();
        let pair = Self {
            name: name.into(),
            low_pass,
            high_pass,
            vanishing_moments,
        };
        pair.validate()?;
        Ok(pair)
    }

    fn validate(&self) -> Result<(), DwtError> {
        let sum_low: f64 = self.low_pass.iter().sum();
        if (sum_low - std::f64::consts::SQRT_2).abs() > FILTER_TOLERANCE {
            return Err(DwtError::InvalidFilter(format!(
                "scaling filter sums to {sum_low}, expected sqrt(2)"
            )));
        }
        let sum_high: f64 = self.high_pass.iter().sum();
        if sum_high.abs() > FILTER_TOLERANCE {
            return Err(DwtError::InvalidFilter(format!(
                "wavelet filter sums to {sum_high}"
            )));
        }
        let len = self.low_pass.len();
        for shift in (0..len).step_by(2) {
            let dot: f64 = (0..len - shift)
                .map(|k| self.low_pass[k] * self.low_pass[k + shift])
                .sum();
            let expected = if shift == 0 { 1.0 } else { 0.0 };
            if (dot - expected).abs() > FILTER_TOLERANCE {
                return Err(DwtError::InvalidFilter(format!(
                    "scaling filter is not orthonormal at shift {shift}: {dot}"
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn low_pass(&self) -> &[f64] {
        &self.low_pass
    }

    pub fn high_pass(&self) -> &[f64] {
        &self.high_pass
    }

    pub fn vanishing_moments(&self) -> usize {
        self.vanishing_moments
    }

    pub fn len(&self) -> usize {
        self.low_pass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.low_pass.is_empty()
    }
}

impl fmt::Display for FilterPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shipped() -> Vec<FilterPair> {
        (1..=10)
            .map(|m| FilterPair::daubechies(m).unwrap())
            .collect()
    }

    #[test]
    fn haar_orientation() {
        let haar = FilterPair::haar();
        assert_eq!(haar.high_pass(), &[-FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
    }

    #[test]
    fn normalization_and_orthonormality() {
        for f in shipped() {
            let s: f64 = f.low_pass().iter().sum();
            assert!((s - std::f64::consts::SQRT_2).abs() <= 1e-12, "{f}");
            let g: f64 = f.high_pass().iter().sum();
            assert!(g.abs() <= 1e-12, "{f}");
            let len = f.len();
            for shift in (0..len).step_by(2) {
                let hh: f64 = (0..len - shift)
                    .map(|k| f.low_pass()[k] * f.low_pass()[k + shift])
                    .sum();
                let gg: f64 = (0..len - shift)
                    .map(|k| f.high_pass()[k] * f.high_pass()[k + shift])
                    .sum();
                let expected = if shift == 0 { 1.0 } else { 0.0 };
                assert!((hh - expected).abs() <= 1e-12, "{f} shift {shift}");
                assert!((gg - expected).abs() <= 1e-12, "{f} shift {shift}");
            }
            // cross orthogonality at every even offset, both directions
            for shift in (0..len).step_by(2) {
                let hg: f64 = (0..len - shift)
                    .map(|k| f.low_pass()[k] * f.high_pass()[k + shift])
                    .sum();
                let gh: f64 = (0..len - shift)
                    .map(|k| f.high_pass()[k] * f.low_pass()[k + shift])
                    .sum();
                assert!(hg.abs() <= 1e-12 && gh.abs() <= 1e-12, "{f} shift {shift}");
            }
        }
    }

    #[test]
    fn vanishing_moments() {
        for f in shipped() {
            let center = (f.len() as f64 - 1.0) / 2.0;
            for p in 0..f.vanishing_moments() {
                let moment: f64 = f
                    .high_pass()
                    .iter()
                    .enumerate()
                    .map(|(k, g)| g * ((k as f64 - center) / center.max(1.0)).powi(p as i32))
                    .sum();
                assert!(moment.abs() < 1e-9, "{f} moment {p}: {moment}");
            }
        }
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(FilterPair::by_name("haar").unwrap(), FilterPair::haar());
        assert_eq!(FilterPair::by_name("db1").unwrap(), FilterPair::haar());
        assert_eq!(FilterPair::by_name("D4").unwrap().name(), "db2");
        assert_eq!(FilterPair::by_name("daub8").unwrap().name(), "db4");
        assert_eq!(FilterPair::by_name("db4").unwrap().len(), 8);
        assert!(FilterPair::by_name("d5").is_err());
        assert!(FilterPair::by_name("db11").is_err());
        assert!(FilterPair::by_name("sym4").is_err());
    }

    #[test]
    fn rejects_invalid_filters() {
        assert!(FilterPair::from_low_pass("bad", vec![1.0, 1.0], 1).is_err());
        assert!(FilterPair::from_low_pass("odd", vec![1.0], 1).is_err());
        assert!(FilterPair::from_low_pass("skew", vec![1.0, 0.4142135623730951], 1).is_err());
    }
}
