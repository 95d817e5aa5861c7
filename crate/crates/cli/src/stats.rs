//! Evaluation statistics: Mann-Whitney U (two-sided, normal approximation
//! with tie and continuity correction) and the Vargha-Delaney effect size.

use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
}

/// U statistic for sample `a`: pairs won plus half the ties.
pub fn u_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for &x in a {
        for &y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

/// Two-sided Mann-Whitney U p-value via the normal approximation with
/// average ranks for ties, tie-corrected variance, and a 0.5 continuity
/// correction. Identical samples give 1.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let n = a.len() as f64;
    let m = b.len() as f64;
    let total = n + m;
    let u = u_statistic(a, b);
    let mu = n * m / 2.0;

    // Tie-corrected variance over the combined sample.
    let mut combined: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    combined.sort_by(|x, y| x.partial_cmp(y).expect("samples must not contain NaN"));
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < combined.len() {
        let mut j = i + 1;
        while j < combined.len() && combined[j] == combined[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = n * m / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
    if var <= 0.0 {
        // Every observation identical: no evidence of difference.
        return Ok(1.0);
    }
    let z = ((u - mu).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let p = 2.0 * (1.0 - normal.cdf(z));
    Ok(p.clamp(f64::MIN_POSITIVE, 1.0))
}

/// Probability that a value drawn from `a` exceeds one from `b`, counting
/// ties as half: `(#{a_i > b_j} + 0.5 #{a_i = b_j}) / (|a| |b|)`.
pub fn vargha_delaney_a12(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    Ok(u_statistic(a, b) / (a.len() as f64 * b.len() as f64))
}

/// Median of a non-empty sample.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|x, y| x.partial_cmp(y).expect("no NaN"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_multisets_give_p_one() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(mann_whitney_u(&a, &a).unwrap(), 1.0);
        assert_eq!(u_statistic(&a, &a), 4.5); // n*m/2
    }

    #[test]
    fn separated_samples_match_worked_value() {
        let a = [1.0, 2.0, 3.0];
        let b = [10.0, 11.0, 12.0];
        assert_eq!(u_statistic(&a, &b), 0.0);
        let p = mann_whitney_u(&a, &b).unwrap();
        assert!((p - 0.0809).abs() < 5e-4, "got {p}");
    }

    #[test]
    fn one_vs_one() {
        let p = mann_whitney_u(&[1.0], &[2.0]).unwrap();
        assert!(p > 0.3 && p <= 1.0, "got {p}");
    }

    #[test]
    fn empty_sample_is_error() {
        assert_eq!(mann_whitney_u(&[], &[1.0]), Err(StatsError::EmptySample));
        assert_eq!(vargha_delaney_a12(&[1.0], &[]), Err(StatsError::EmptySample));
    }

    #[test]
    fn symmetry() {
        let a = [3.0, 1.0, 4.0, 1.5];
        let b = [2.0, 2.0, 5.0];
        let p1 = mann_whitney_u(&a, &b).unwrap();
        let p2 = mann_whitney_u(&b, &a).unwrap();
        assert!((p1 - p2).abs() < 1e-12);
    }

    #[test]
    fn a12_examples() {
        assert_eq!(vargha_delaney_a12(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.5);
        assert_eq!(vargha_delaney_a12(&[10.0, 11.0], &[1.0, 2.0]).unwrap(), 1.0);
        let v = vargha_delaney_a12(&[1.0, 2.0, 3.0], &[2.0]).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn a12_complement() {
        let a = [1.0, 5.0, 3.0];
        let b = [2.0, 5.0, 4.0, 0.5];
        let x = vargha_delaney_a12(&a, &b).unwrap();
        let y = vargha_delaney_a12(&b, &a).unwrap();
        assert!((x + y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn median_and_mean() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
    }
}
