/// Two-sided 99% normal quantile, `Φ^{-1}(0.995)`.
pub const Z_99: f64 = 2.575_829_303_548_900_4;

/// Wilson score interval for `hits` successes in `trials`, clamped so that
/// `low <= hits/trials <= high`.
pub fn wilson_interval(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0 && hits <= trials);
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = if hits == 0 { 0.0 } else { (centre - half).clamp(0.0, p) };
    let high = if hits == trials { 1.0 } else { (centre + half).clamp(p, 1.0) };
    (low, high)
}
