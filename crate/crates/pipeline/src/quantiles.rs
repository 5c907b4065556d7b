//! Empirical quantiles across trajectories.

use crate::error::{PipelineError, Result};

/// Quantile `p` of sorted values, interpolating linearly between order
/// statistics at position `p (n - 1)`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    let (a, b) = (sorted[lo], sorted[hi]);
    // stays inside [a, b] under rounding
    (a + frac * (b - a)).clamp(a, b)
}

/// Quantiles of `values` at each level in `levels`.
pub fn summarize_quantiles(values: &[f64], levels: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(PipelineError::Config("cannot summarize an empty trajectory set".into()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(PipelineError::Config("cannot summarize NaN values".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(levels.iter().map(|&p| quantile_sorted(&sorted, p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn quantiles_are_ordered_and_bounded(
            values in prop::collection::vec(-1e6f64..1e6, 1..200),
            mut levels in prop::collection::vec(0.0f64..=1.0, 1..10),
        ) {
            levels.sort_by(f64::total_cmp);
            let q = summarize_quantiles(&values, &levels).unwrap();
            let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(q.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(q.iter().all(|v| (lo..=hi).contains(v)));
        }
    }

    #[test]
    fn identical_values() {
        let q = summarize_quantiles(&[3.25; 40], &[0.025, 0.5, 0.975]).unwrap();
        assert_eq!(q, vec![3.25; 3]);
    }

    #[test]
    fn median_of_one_to_thousand() {
        let v: Vec<f64> = (1..=1000).rev().map(f64::from).collect();
        assert_eq!(summarize_quantiles(&v, &[0.5]).unwrap(), vec![500.5]);
    }

    #[test]
    fn interpolation_and_extremes() {
        let v = [10.0, 20.0, 30.0, 40.0, 50.0];
        let q = summarize_quantiles(&v, &[0.1, 0.25, 0.9]).unwrap();
        assert!((q[0] - 14.0).abs() < 1e-12);
        assert_eq!(q[1], 20.0);
        assert!((q[2] - 46.0).abs() < 1e-12);
        assert_eq!(summarize_quantiles(&[7.0], &[0.1, 0.9]).unwrap(), vec![7.0, 7.0]);
    }

    #[test]
    fn empty_set_is_an_error() {
        assert!(summarize_quantiles(&[], &[0.5]).is_err());
    }
}
