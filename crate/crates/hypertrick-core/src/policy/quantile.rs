//! Linear-interpolation sample quantile.

use alloc::vec::Vec;

/// The `q`-quantile of `values` under linear interpolation of the order
/// statistics: with the sample sorted ascending and `h = q * (n - 1)`, the
/// result is `v[floor(h)] + (h - floor(h)) * (v[floor(h) + 1] - v[floor(h)])`.
///
/// `values` must be non-empty and free of NaNs, and `q` must lie in `[0, 1]`.
/// `quantile(v, 0)` is the minimum and `quantile(v, 1)` the maximum; the
/// result always lies within `[min, max]` and is permutation-invariant.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty sample");
    assert!((0.0..=1.0).contains(&q), "quantile level must be in [0, 1]");
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    quantile_sorted(&sorted, q)
}

/// Same as [`quantile`], but `sorted` must already be ascending.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let i = h as usize;
    let frac = h - i as f64;
    if frac == 0.0 || i + 1 >= sorted.len() {
        sorted[i]
    } else {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    }
}
