//! Translation-invariant denoising by cycle spinning.

use rayon::prelude::*;

use super::{dwt, idwt, DwtError, FilterPair, WaveletDecomposition};
use crate::shrink::ShrinkageRule;

/// Shifts processed by one worker before its partial sum is handed back.
/// Fixed, so the summation order never depends on the thread count.
const SHIFTS_PER_CHUNK: usize = 16;

/// Circular shift to the right by `shift`: `out[(i + shift) % n] = x[i]`.
pub fn rotate(x: &[f64], shift: usize) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let s = shift % n;
    let mut out = vec![0.0; n];
    for (i, &v) in x.iter().enumerate() {
        out[(i + s) % n] = v;
    }
    out
}

/// Averages `shift → dwt → modify → idwt → unshift` over all `n` circular
/// shifts of `signal`.
pub fn cycle_spin<F, E>(
    signal: &[f64],
    basis: &FilterPair,
    coarse_level: usize,
    modify: F,
) -> Result<Vec<f64>, E>
where
    F: Fn(&mut WaveletDecomposition) -> Result<(), E> + Sync,
    E: From<DwtError> + Send,
{
    let n = signal.len();
    super::dyadic_depth(n)?;
    let chunks: Vec<usize> = (0..n).step_by(SHIFTS_PER_CHUNK).collect();
    let partials: Vec<Vec<f64>> = chunks
        .par_iter()
        .map(|&start| {
            let mut acc = vec![0.0; n];
            for shift in start..(start + SHIFTS_PER_CHUNK).min(n) {
                let shifted = rotate(signal, shift);
                let mut decomp = dwt(&shifted, basis, coarse_level)?;
                modify(&mut decomp)?;
                let estimate = idwt(&decomp, basis);
                // undo the shift: estimate[(i + shift) % n] belongs to i
                for (i, a) in acc.iter_mut().enumerate() {
                    *a += estimate[(i + shift) % n];
                }
            }
            Ok(acc)
        })
        .collect::<Result<_, E>>()?;

    let mut out = vec![0.0; n];
    for part in &partials {
        for (o, p) in out.iter_mut().zip(part) {
            *o += p;
        }
    }
    let scale = 1.0 / n as f64;
    out.iter_mut().for_each(|v| *v *= scale);
    Ok(out)
}

/// Shift-invariant term-by-term denoising: every detail coefficient of every
/// shifted transform goes through `rule` with its threshold set to
/// `threshold`; scaling coefficients are kept. A zero threshold is the
/// identity.
pub fn cycle_spin_denoise(
    signal: &[f64],
    basis: &FilterPair,
    rule: &ShrinkageRule,
    threshold: f64,
    coarse_level: usize,
) -> Result<Vec<f64>, DwtError> {
    if threshold == 0.0 {
        let depth = super::dyadic_depth(signal.len())?;
        if coarse_level >= depth {
            return Err(DwtError::CoarseLevel {
                coarse_level,
                depth,
            });
        }
        return Ok(signal.to_vec());
    }
    let rule = rule.with_threshold(threshold)?;
    cycle_spin(
        signal,
        basis,
        coarse_level,
        |d: &mut WaveletDecomposition| {
            d.map_details(|x| rule.apply(x));
            Ok::<(), DwtError>(())
        },
    )
}
