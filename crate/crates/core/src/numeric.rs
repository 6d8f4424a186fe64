//! Small numeric helpers shared by the indicator pipeline and the oracle.

/// Relative residual of an identity `Σ terms = 0`, scaled by the largest
/// absolute term. Returns 0 when every term is zero.
pub fn identity_residual(lhs: f64, rhs: f64, terms: &[f64]) -> f64 {
    let scale = terms
        .iter()
        .chain([lhs, rhs].iter())
        .fold(0.0f64, |m, t| m.max(t.abs()));
    let diff = (lhs - rhs).abs();
    if diff == 0.0 {
        0.0
    } else if scale == 0.0 || !diff.is_finite() {
        f64::INFINITY
    } else {
        diff / scale
    }
}

/// `|a - b| / max(|a|, |b|)`, zero when both are zero.
pub fn relative_difference(a: f64, b: f64) -> f64 {
    identity_residual(a, b, &[])
}

/// Arithmetic mean computed as `x0 + Σ(xi - x0) / n`.
///
/// A series of identical values averages to exactly that value, which
/// keeps threshold comparisons on constant series exact.
pub fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut iter = values.into_iter();
    let first = iter.next()?;
    let mut n = 1usize;
    let mut deviations = 0.0;
    for v in iter {
        deviations += v - first;
        n += 1;
    }
    Some(first + deviations / n as f64)
}
