//! Adaptive Simpson quadrature.

/// Recursion limit; 2^-50 of the starting interval is far below any
/// tolerance we ask for.
const MAX_DEPTH: u32 = 50;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The integrand should be smooth on `(a, b)`; callers split the range at
/// known kinks so that each piece converges quickly.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    simpson_with_ends(f, a, b, f(a), f(b), tol)
}

/// Same as [`adaptive_simpson`] with the endpoint values already known, so
/// chained integrations over consecutive intervals can share them.
pub fn simpson_with_ends(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    tol: f64,
) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    refine(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn refine(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol || m <= a || m >= b {
        return left + right + diff / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integrates over `[a, b]` splitting at every breakpoint inside the range.
/// `breakpoints` must be sorted ascending.
pub fn integrate_piecewise(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: f64,
) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate_piecewise(f, b, a, breakpoints, tol);
    }
    let inner: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&k| k > a && k < b)
        .collect();
    let pieces = inner.len() + 1;
    let piece_tol = tol / pieces as f64;
    let mut total = 0.0;
    let mut lo = a;
    for hi in inner.into_iter().chain(std::iter::once(b)) {
        total += adaptive_simpson(f, lo, hi, piece_tol);
        lo = hi;
    }
    total
}
