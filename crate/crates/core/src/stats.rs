//! Sample summaries: moments, Kolmogorov–Smirnov distance to `N(0,1)` and
//! Clopper–Pearson bounds.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF, Normal};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    /// Unbiased (`n - 1`) variance.
    pub variance: f64,
    /// `m3 / m2^{3/2}` with central sample moments.
    pub skewness: f64,
    /// `m4 / m2^2 - 3`.
    pub excess_kurtosis: f64,
}

impl Moments {
    pub fn of(xs: &[f64]) -> Self {
        let count = xs.len();
        if count == 0 {
            return Self {
                count,
                mean: f64::NAN,
                variance: f64::NAN,
                skewness: f64::NAN,
                excess_kurtosis: f64::NAN,
            };
        }
        let n = count as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &x in xs {
            let d = x - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        let variance = if count > 1 { m2 / (n - 1.0) } else { 0.0 };
        let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
        let (skewness, excess_kurtosis) = if m2 > 0.0 {
            (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
        } else {
            (f64::NAN, f64::NAN)
        };
        Self {
            count,
            mean,
            variance,
            skewness,
            excess_kurtosis,
        }
    }

    pub fn std_error(&self) -> f64 {
        (self.variance / self.count as f64).sqrt()
    }
}

/// `sup_x |F_n(x) - Phi(x)|` with both one-sided limits checked at every
/// jump, so repeated values are handled exactly.
pub fn ks_distance_standard_normal(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let normal = Normal::standard();
    let mut sorted: Vec<f64> = xs.iter().copied().filter(|x| !x.is_nan()).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let phi = normal.cdf(x);
        d = d.max((phi - i as f64 / n).abs()).max((j as f64 / n - phi).abs());
        i = j;
    }
    d
}

/// Two-sided Clopper–Pearson interval for `k` successes in `n` trials at
/// confidence `level`.
pub fn clopper_pearson(k: u64, n: u64, level: f64) -> (f64, f64) {
    let a = (1.0 - level) / 2.0;
    let lower = if k == 0 {
        0.0
    } else {
        Beta::new(k as f64, (n - k + 1) as f64).map_or(0.0, |b| b.inverse_cdf(a))
    };
    let upper = if k == n {
        1.0
    } else {
        Beta::new((k + 1) as f64, (n - k) as f64).map_or(1.0, |b| b.inverse_cdf(1.0 - a))
    };
    (lower, upper)
}

/// `(x - center) / scale` for every sample.
pub fn standardize(xs: &[f64], center: f64, scale: f64) -> Vec<f64> {
    xs.iter().map(|x| (x - center) / scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn moments_of_small_sample() {
        let m = Moments::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert_relative_eq!(m.variance, 5.0 / 3.0);
        assert_relative_eq!(m.skewness, 0.0);
        assert_relative_eq!(m.excess_kurtosis, 1.64 - 3.0, epsilon = 1e-12);
    }

    #[test]
    fn ks_handles_ties() {
        // all mass at 0: F jumps from 0 to 1 where Phi = 1/2
        assert_relative_eq!(ks_distance_standard_normal(&[0.0; 10]), 0.5);
        let grid: Vec<f64> = (1..1000).map(|i| {
            let u = i as f64 / 1000.0;
            Normal::standard().inverse_cdf(u)
        }).collect();
        assert!(ks_distance_standard_normal(&grid) < 2e-3);
    }

    #[test]
    fn clopper_pearson_edges() {
        assert_eq!(clopper_pearson(0, 10, 0.99).0, 0.0);
        assert_eq!(clopper_pearson(10, 10, 0.99).1, 1.0);
        let (lo, hi) = clopper_pearson(50, 100, 0.95);
        assert!((lo - 0.3983).abs() < 1e-3 && (hi - 0.6017).abs() < 1e-3);
    }
}
