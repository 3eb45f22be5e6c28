//! Corrected (CLRT) and classical (LRT) likelihood-ratio tests.

use serde::{Deserialize, Serialize};

use crate::corrections::{
    one_sample_constants, two_sample_constants, CorrectionConstants, FourthMomentInfo,
    PopulationCase,
};
use crate::error::{Error, Result};
use crate::numerics::{chisq_sf, std_normal_cdf, std_normal_sf};
use crate::spectral::{
    one_sample_lr_core, sample_covariance, two_sample_lr_core, ObservationMatrix,
};

/// Rejection region of a corrected test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// Reject when `|z| > z_{1−α/2}`.
    #[default]
    TwoSided,
    /// Reject when `z > z_{1−α}`.
    Upper,
}

impl Tail {
    pub fn p_value(self, z: f64) -> f64 {
        match self {
            Tail::TwoSided => (2.0 * std_normal_cdf(-z.abs())).min(1.0),
            Tail::Upper => std_normal_sf(z),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClrtOne,
    LrtOne,
    ClrtTwo,
    LrtTwo,
}

/// Dimension and sample sizes of a test, with the ratios `p/n_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionRatios {
    pub p: usize,
    pub n1: usize,
    pub n2: Option<usize>,
    pub y_n1: f64,
    pub y_n2: Option<f64>,
}

impl DimensionRatios {
    pub fn one_sample(p: usize, n: usize) -> Result<Self> {
        if p < 2 || p >= n {
            return Err(Error::domain(format!(
                "one-sample test needs 2 <= p <= n - 1, got p = {p}, n = {n}"
            )));
        }
        Ok(DimensionRatios {
            p,
            n1: n,
            n2: None,
            y_n1: p as f64 / n as f64,
            y_n2: None,
        })
    }

    pub fn two_sample(p: usize, n1: usize, n2: usize) -> Result<Self> {
        if p < 1 || p >= n1.min(n2) {
            return Err(Error::domain(format!(
                "two-sample test needs p <= min(n1, n2) - 1, got p = {p}, n1 = {n1}, n2 = {n2}"
            )));
        }
        Ok(DimensionRatios {
            p,
            n1,
            n2: Some(n2),
            y_n1: p as f64 / n1 as f64,
            y_n2: Some(p as f64 / n2 as f64),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: Method,
    /// `L*` (one-sample) or `−2 log L1 / N` (two-sample).
    pub raw_statistic: f64,
    /// z-score for the corrected tests, χ² value for the classical ones.
    pub standardized: f64,
    pub p_value: f64,
    pub reject_at: Option<f64>,
    pub rejected: Option<bool>,
    pub tail: Option<Tail>,
    /// Excess kurtosis used by the two-sample corrected test.
    pub beta: Option<f64>,
    pub ratios: DimensionRatios,
    pub constants: Option<CorrectionConstants>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("significance level must lie in (0, 1), got {alpha}")))
    }
}

fn decide(p_value: f64, alpha: f64) -> (Option<f64>, Option<bool>) {
    (Some(alpha), Some(p_value < alpha))
}

/// Corrected one-sample statistic from a precomputed `L*`.
pub fn clrt_one_sample_from_core(
    lr_core: f64,
    ratios: DimensionRatios,
    alpha: f64,
    tail: Tail,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    let constants = one_sample_constants(ratios.p, ratios.n1, PopulationCase::Real)?;
    let z = (lr_core - constants.centering - constants.mean) / constants.variance.sqrt();
    let p_value = tail.p_value(z);
    let (reject_at, rejected) = decide(p_value, alpha);
    Ok(TestResult {
        method: Method::ClrtOne,
        raw_statistic: lr_core,
        standardized: z,
        p_value,
        reject_at,
        rejected,
        tail: Some(tail),
        beta: None,
        ratios,
        constants: Some(constants),
    })
}

/// Classical one-sample test `n·L* ~ χ²_{p(p+1)/2}` from a precomputed `L*`.
pub fn lrt_one_sample_from_core(lr_core: f64, ratios: DimensionRatios, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let p = ratios.p as u64;
    let statistic = ratios.n1 as f64 * lr_core;
    let p_value = chisq_sf(statistic.max(0.0), p * (p + 1) / 2)?;
    let (reject_at, rejected) = decide(p_value, alpha);
    Ok(TestResult {
        method: Method::LrtOne,
        raw_statistic: lr_core,
        standardized: statistic,
        p_value,
        reject_at,
        rejected,
        tail: None,
        beta: None,
        ratios,
        constants: None,
    })
}

fn one_sample_core(x: &ObservationMatrix) -> Result<(f64, DimensionRatios)> {
    let ratios = DimensionRatios::one_sample(x.p(), x.n())?;
    let core = one_sample_lr_core(&sample_covariance(x))?;
    Ok((core, ratios))
}

/// Corrected test of `H0: Σ = I`.
pub fn clrt_one_sample(x: &ObservationMatrix, alpha: f64, tail: Tail) -> Result<TestResult> {
    check_alpha(alpha)?;
    let (core, ratios) = one_sample_core(x)?;
    clrt_one_sample_from_core(core, ratios, alpha, tail)
}

/// Classical test of `H0: Σ = I`.
pub fn lrt_one_sample(x: &ObservationMatrix, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let (core, ratios) = one_sample_core(x)?;
    lrt_one_sample_from_core(core, ratios, alpha)
}

pub fn clrt_two_sample_from_core(
    lr_core: f64,
    ratios: DimensionRatios,
    alpha: f64,
    beta: f64,
    tail: Tail,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    let n2 = ratios
        .n2
        .ok_or_else(|| Error::domain("two-sample ratios need n2"))?;
    let fm = FourthMomentInfo::new(beta, PopulationCase::Real)?;
    let constants = two_sample_constants(ratios.p, ratios.n1, n2, PopulationCase::Real, fm)?;
    let z = (lr_core - constants.centering - constants.mean) / constants.variance.sqrt();
    let p_value = tail.p_value(z);
    let (reject_at, rejected) = decide(p_value, alpha);
    Ok(TestResult {
        method: Method::ClrtTwo,
        raw_statistic: lr_core,
        standardized: z,
        p_value,
        reject_at,
        rejected,
        tail: Some(tail),
        beta: Some(beta),
        ratios,
        constants: Some(constants),
    })
}

pub fn lrt_two_sample_from_core(lr_core: f64, ratios: DimensionRatios, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let n2 = ratios
        .n2
        .ok_or_else(|| Error::domain("two-sample ratios need n2"))?;
    let p = ratios.p as u64;
    let statistic = (ratios.n1 + n2) as f64 * lr_core;
    let p_value = chisq_sf(statistic.max(0.0), p * (p + 1) / 2)?;
    let (reject_at, rejected) = decide(p_value, alpha);
    Ok(TestResult {
        method: Method::LrtTwo,
        raw_statistic: lr_core,
        standardized: statistic,
        p_value,
        reject_at,
        rejected,
        tail: None,
        beta: None,
        ratios,
        constants: None,
    })
}

fn two_sample_core(x: &ObservationMatrix, y: &ObservationMatrix) -> Result<(f64, DimensionRatios)> {
    if x.p() != y.p() {
        return Err(Error::DimensionMismatch {
            expected: x.p(),
            found: y.p(),
        });
    }
    let ratios = DimensionRatios::two_sample(x.p(), x.n(), y.n())?;
    let a = sample_covariance(x);
    let b = sample_covariance(y);
    let core = two_sample_lr_core(&a, &b, x.n(), y.n())?;
    Ok((core, ratios))
}

/// Corrected (pseudo-)likelihood-ratio test of `H0: Σ1 = Σ2`; `beta` is the
/// common excess kurtosis `E x⁴ − 3` of the standardized entries.
pub fn clrt_two_sample(
    x: &ObservationMatrix,
    y: &ObservationMatrix,
    alpha: f64,
    beta: f64,
    tail: Tail,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    FourthMomentInfo::new(beta, PopulationCase::Real)?;
    let (core, ratios) = two_sample_core(x, y)?;
    clrt_two_sample_from_core(core, ratios, alpha, beta, tail)
}

/// Classical test `−2 log L1 ~ χ²_{p(p+1)/2}`.
pub fn lrt_two_sample(x: &ObservationMatrix, y: &ObservationMatrix, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let (core, ratios) = two_sample_core(x, y)?;
    lrt_two_sample_from_core(core, ratios, alpha)
}

/// Plug-in excess kurtosis: the pooled fourth moment of the column-wise
/// standardized entries of every sample, minus 3.
pub fn estimate_beta(samples: &[&ObservationMatrix]) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for x in samples {
        let n = x.n() as f64;
        for col in x.values().column_iter() {
            let mean = col.mean();
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            if !(var > 0.0) {
                return Err(Error::InvalidData(
                    "cannot estimate kurtosis from a constant column".into(),
                ));
            }
            sum += col.iter().map(|v| ((v - mean) / var.sqrt()).powi(4)).sum::<f64>();
            count += col.len();
        }
    }
    if count == 0 {
        return Err(Error::InvalidData("no data to estimate kurtosis".into()));
    }
    Ok(sum / count as f64 - 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{sample_scaled_t5, sample_standard_normal, RandomStream};
    use nalgebra::DMatrix;

    fn gaussian(n: usize, p: usize, seed: u64) -> ObservationMatrix {
        ObservationMatrix::new(DMatrix::from_vec(
            n,
            p,
            sample_standard_normal(RandomStream::new(seed, 0), n * p),
        ))
        .unwrap()
    }

    /// Rows ±√n·e_j and their negatives: mean 0, covariance exactly I.
    fn identity_covariance_data(p: usize) -> ObservationMatrix {
        let n = 2 * p;
        let scale = (n as f64 / 2.0).sqrt();
        ObservationMatrix::new(DMatrix::from_fn(n, p, |i, j| {
            if i % p == j {
                if i < p {
                    scale
                } else {
                    -scale
                }
            } else {
                0.0
            }
        }))
        .unwrap()
    }

    #[test]
    fn identity_covariance_gives_zero_statistic() {
        let x = identity_covariance_data(5);
        let r = clrt_one_sample(&x, 0.05, Tail::TwoSided).unwrap();
        assert!(r.raw_statistic.abs() < 1e-12);
        let c = r.constants.unwrap();
        let expected = -(c.centering + c.mean) / c.variance.sqrt();
        assert!((r.standardized - expected).abs() < 1e-9);
    }

    #[test]
    fn lrt_is_n_times_raw() {
        let x = gaussian(200, 10, 1);
        let c = clrt_one_sample(&x, 0.05, Tail::Upper).unwrap();
        let l = lrt_one_sample(&x, 0.05).unwrap();
        assert_eq!(l.standardized, 200.0 * c.raw_statistic);
        assert_eq!(l.raw_statistic, c.raw_statistic);
    }

    #[test]
    fn dimension_preconditions() {
        let x = gaussian(10, 1, 2);
        assert!(matches!(clrt_one_sample(&x, 0.05, Tail::TwoSided), Err(Error::Domain(_))));
        let x = gaussian(10, 10, 3);
        assert!(matches!(lrt_one_sample(&x, 0.05), Err(Error::Domain(_))));
        let (x, y) = (gaussian(50, 4, 4), gaussian(40, 5, 5));
        assert!(matches!(
            clrt_two_sample(&x, &y, 0.05, 0.0, Tail::TwoSided),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(clrt_one_sample(&gaussian(50, 4, 6), 1.5, Tail::TwoSided).is_err());
        assert!(clrt_two_sample(&x, &gaussian(40, 4, 7), 0.05, -3.0, Tail::TwoSided).is_err());
    }

    #[test]
    fn identical_samples() {
        let x = gaussian(100, 5, 8);
        let r = clrt_two_sample(&x, &x, 0.05, 0.0, Tail::TwoSided).unwrap();
        assert!(r.raw_statistic.abs() < 1e-12);
        // permuting rows leaves the covariance unchanged
        let perm = DMatrix::from_fn(100, 5, |i, j| x.values()[((i + 37) % 100, j)]);
        let y = ObservationMatrix::new(perm).unwrap();
        let r = clrt_two_sample(&x, &y, 0.05, 0.0, Tail::TwoSided).unwrap();
        assert!(r.raw_statistic.abs() < 1e-10);
        let other = gaussian(100, 5, 9);
        let r = lrt_two_sample(&x, &other, 0.05).unwrap();
        assert!(r.raw_statistic > 1e-4);
        assert_eq!(r.standardized, 200.0 * r.raw_statistic);
    }

    #[test]
    fn p_values_by_tail() {
        assert!((Tail::TwoSided.p_value(1.959963985) - 0.05).abs() < 1e-9);
        assert!((Tail::Upper.p_value(1.644853627) - 0.05).abs() < 1e-9);
        assert!((Tail::TwoSided.p_value(-1.959963985) - 0.05).abs() < 1e-9);
        assert!(Tail::Upper.p_value(-3.0) > 0.99);
        assert_eq!(Tail::TwoSided.p_value(0.0), 1.0);
    }

    #[test]
    fn beta_estimate() {
        let g = gaussian(20_000, 5, 10);
        assert!(estimate_beta(&[&g]).unwrap().abs() < 0.2);
        let t = ObservationMatrix::new(DMatrix::from_vec(
            50_000,
            4,
            sample_scaled_t5(RandomStream::new(3, 1), 200_000),
        ))
        .unwrap();
        // the t5 sample kurtosis converges slowly: its eighth moment is infinite
        let b = estimate_beta(&[&t]).unwrap();
        assert!(b > 3.0 && b < 9.0, "{b}");
    }

    #[test]
    fn json_round_trip() {
        let x = gaussian(300, 20, 11);
        let r = clrt_one_sample(&x, 0.05, Tail::TwoSided).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        let back: TestResult = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
