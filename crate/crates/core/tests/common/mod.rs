//! Helpers shared by the integration test binaries.
#![allow(dead_code)]

use clrt::numerics::{sample_standard_normal, std_normal_cdf, RandomStream};
use clrt::spectral::ObservationMatrix;
use nalgebra::DMatrix;

pub fn gaussian_matrix(n: usize, p: usize, seed: u64, stream: u64) -> DMatrix<f64> {
    DMatrix::from_vec(n, p, sample_standard_normal(RandomStream::new(seed, stream), n * p))
}

pub fn gaussian_observations(n: usize, p: usize, seed: u64, stream: u64) -> ObservationMatrix {
    ObservationMatrix::new(gaussian_matrix(n, p, seed, stream)).unwrap()
}

/// Haar-ish orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn random_orthogonal(p: usize, seed: u64) -> DMatrix<f64> {
    gaussian_matrix(p, p, seed, 99).qr().q()
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic Kolmogorov survival function `P(√n·D > t)` with the
/// small-sample correction `t = D(√n + 0.12 + 0.11/√n)`.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let t = d * (sn + 0.12 + 0.11 / sn);
    if t < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * t * t).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

pub fn normal_ks(sample: &[f64]) -> (f64, f64) {
    let d = ks_statistic(sample, std_normal_cdf);
    (d, ks_p_value(d, sample.len()))
}

/// Ratio grid {0.05, 0.1625, …, 0.5} with five points.
pub fn five_point_grid() -> Vec<f64> {
    (0..5).map(|i| 0.05 + 0.1125 * i as f64).collect()
}
