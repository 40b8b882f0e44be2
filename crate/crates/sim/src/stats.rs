//! Binomial confidence intervals.

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959963984540054;

/// Wilson score interval for `errors` successes out of `total` trials.
pub fn wilson_interval(errors: u64, total: u64, z: f64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let n = total as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // Clamp so the interval always contains the point estimate despite rounding.
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}
