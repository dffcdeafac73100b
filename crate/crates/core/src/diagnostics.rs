//! Distributional checks on posterior draws.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::sampling::sort_floats;

/// Kolmogorov-Smirnov distance between the empirical law of `draws`,
/// standardized by their own mean and sd, and the standard normal.
pub fn ks_standard_normal(draws: &[f64]) -> f64 {
    let n = draws.len();
    if n < 2 {
        return 1.0;
    }
    let mean = draws.iter().sum::<f64>() / n as f64;
    let sd = (draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    if sd == 0.0 {
        return 1.0;
    }
    let mut z: Vec<f64> = draws.iter().map(|d| (d - mean) / sd).collect();
    sort_floats(&mut z);
    let phi = Normal::new(0.0, 1.0).expect("standard normal");
    let nf = n as f64;
    z.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = phi.cdf(v);
            (f - i as f64 / nf).abs().max((f - (i + 1) as f64 / nf).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample KS distance between already sorted samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{standard_normal, RngStream};

    #[test]
    fn normal_draws_are_close() {
        let mut rng = RngStream::new(1, 0);
        let z: Vec<f64> = (0..10_000).map(|_| 3.0 + 2.0 * standard_normal(&mut rng)).collect();
        assert!(ks_standard_normal(&z) < 0.015);
    }

    #[test]
    fn uniform_draws_are_far() {
        let u: Vec<f64> = (0..10_000).map(|i| i as f64 / 10_000.0).collect();
        assert!(ks_standard_normal(&u) > 0.04);
    }

    #[test]
    fn two_sample_cases() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        assert!((ks_two_sample(&[1.0, 3.0], &[2.0, 4.0]) - 0.5).abs() < 1e-12);
    }
}
