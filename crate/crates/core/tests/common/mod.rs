#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use shrinkwave::{FilterPair, RuleKind, ShrinkageRule};

/// Every catalog rule at threshold `lambda` (firm `λ2 = 2λ`, scad `a = 3.7`).
pub fn catalog(lambda: f64) -> Vec<ShrinkageRule> {
    RuleKind::ALL
        .iter()
        .map(|&k| ShrinkageRule::new(k, lambda).unwrap())
        .collect()
}

pub fn shipped_filters() -> Vec<FilterPair> {
    (1..=10)
        .map(|m| FilterPair::daubechies(m).unwrap())
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

pub fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}
