//! Composite quadrature rules used by the drag functional.

/// Composite Simpson rule on `[lo, hi]` with panel width at most `step`.
///
/// The panel count is rounded up to the next even number.
pub fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, step: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let mut n = ((hi - lo) / step).ceil().max(2.0) as usize;
    if n % 2 == 1 {
        n += 1;
    }
    let h = (hi - lo) / n as f64;
    let interior: f64 = (1..n)
        .map(|i| {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            w * f(lo + i as f64 * h)
        })
        .sum();
    (f(lo) + interior + f(hi)) * h / 3.0
}

/// Trapezoid rule over arbitrary (possibly non-uniform) nodes.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}
