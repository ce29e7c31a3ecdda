//! Error metrics and the paired t-test.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("all paired differences are equal; the t statistic is undefined")]
    DegenerateDifferences,
}

/// `√(Σ (y_i − f_i)² / n)` over all points.
pub fn rmse(f: &[f64], y_true: &[f64]) -> Result<f64, StatsError> {
    if f.len() != y_true.len() {
        return Err(StatsError::LengthMismatch(f.len(), y_true.len()));
    }
    if f.is_empty() {
        return Err(StatsError::TooFewSamples { needed: 1, got: 0 });
    }
    let sum: f64 = f.iter().zip(y_true).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((sum / f.len() as f64).sqrt())
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub df: f64,
    pub mean_difference: f64,
}

/// Two-sided paired t-test of `mean(a − b) = 0`.
///
/// `p = I_{ν/(ν+t²)}(ν/2, 1/2)`, the regularized incomplete beta form of
/// `2 (1 − F_ν(|t|))`, which stays accurate for very small p-values.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples { needed: 2, got: n });
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let m = mean(&d);
    let var = d.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    if var == 0.0 || !var.is_finite() {
        return Err(StatsError::DegenerateDifferences);
    }
    let t = m / (var / n as f64).sqrt();
    let df = (n - 1) as f64;
    let p = beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0);
    Ok(TTest {
        t,
        p,
        df,
        mean_difference: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_cases() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(rmse(&[2.0, 3.0, 4.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert!((rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - (12.5f64).sqrt()).abs() < 1e-15);
        assert!(rmse(&[], &[]).is_err());
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn zero_mean_difference_gives_p_one() {
        let r = paired_t_test(&[1.0, -1.0, 1.0, -1.0], &[0.0; 4]).unwrap();
        assert_eq!(r.t, 0.0);
        assert!((r.p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_and_shifted() {
        let a: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        assert_eq!(paired_t_test(&a, &a).unwrap_err(), StatsError::DegenerateDifferences);
        // A constant shift makes every difference equal, which is degenerate too;
        // add a little jitter so the variance is positive.
        let b: Vec<f64> = a
            .iter()
            .enumerate()
            .map(|(i, v)| v + 0.5 + 1e-3 * (i as f64).cos())
            .collect();
        let r = paired_t_test(&a, &b).unwrap();
        assert!(r.p < 1e-6);
        assert!(r.t < 0.0);
    }
}
