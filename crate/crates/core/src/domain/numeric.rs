use crate::error::{Error, Result};

/// Proportions are clamped into `[LOGIT_EPS, 1 - LOGIT_EPS]` before taking logits.
pub const LOGIT_EPS: f64 = 1e-6;

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn inverse_logit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn logit_clamped(p: f64) -> f64 {
    logit(p.clamp(LOGIT_EPS, 1.0 - LOGIT_EPS))
}

/// Two passes of a centered (0.25, 0.5, 0.25) moving average. Endpoints pass
/// through each pass; with `preserve_first` the first input value is restored.
pub fn smooth_over_age(values: &[f64], preserve_first: bool) -> Result<Vec<f64>> {
    if values.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "smoothing needs at least 3 age groups, got {}",
            values.len()
        )));
    }
    let mut current = values.to_vec();
    for _ in 0..2 {
        let prev = current.clone();
        for i in 1..prev.len() - 1 {
            current[i] = 0.25 * prev[i - 1] + 0.5 * prev[i] + 0.25 * prev[i + 1];
        }
    }
    if preserve_first {
        current[0] = values[0];
    }
    Ok(current)
}

/// Empirical median; averages the two middle order statistics for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logit_examples() {
        assert_eq!(logit_clamped(0.5), 0.0);
        let expected = (1e-6f64 / (1.0 - 1e-6)).ln();
        assert_eq!(logit_clamped(0.0), expected);
        assert!((logit_clamped(0.0) + 13.8155).abs() < 1e-4);
        assert!((inverse_logit(logit_clamped(0.2)) - 0.2).abs() < 1e-15);
        assert!((inverse_logit(logit_clamped(1.0)) - (1.0 - 1e-6)).abs() < 1e-15);
    }

    #[test]
    fn smoothing_kernel_by_hand() {
        assert_eq!(smooth_over_age(&[0.0, 4.0, 0.0], false).unwrap(), vec![0.0, 1.0, 0.0]);
        let c = vec![-3.25; 9];
        assert_eq!(smooth_over_age(&c, false).unwrap(), c);
        // pass 1 by hand, then pass 2 from it
        let v = [1.0, 2.0, 5.0, 6.0, 9.0];
        let p1 = [1.0, 2.5, 4.5, 6.5, 9.0];
        let p2 = [
            1.0,
            0.25 * p1[0] + 0.5 * p1[1] + 0.25 * p1[2],
            0.25 * p1[1] + 0.5 * p1[2] + 0.25 * p1[3],
            0.25 * p1[2] + 0.5 * p1[3] + 0.25 * p1[4],
            9.0,
        ];
        assert_eq!(smooth_over_age(&v, false).unwrap(), p2.to_vec());
    }

    #[test]
    fn smoothing_preserves_first_and_length() {
        let v = [7.0, 1.0, 1.0, 1.0];
        let s = smooth_over_age(&v, true).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s[0], 7.0);
        assert!(smooth_over_age(&[1.0, 2.0], false).is_err());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
