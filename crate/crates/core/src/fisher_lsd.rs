//! Limiting spectral distribution of the F-matrix `S1 S2⁻¹`, the centering
//! term of the two-sample statistic, and closed-form means and covariances
//! for log-affine test functions.
//!
//! On the unit circle the support is parameterised as
//! `z(ξ) = (1−y2)⁻² (1 + h² + 2h·Re ξ)`, and a test function
//! `log(α + βx)` becomes `log(|c + dξ|² / (1−y2)²)` for a unique pair
//! `0 < d < c`. Means and covariances of the limiting Gaussian process then
//! reduce to residues in `(c, d)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The F-matrix limiting law for ratios `y1 = p/n1`, `y2 = p/n2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherLsd {
    pub y1: f64,
    pub y2: f64,
    /// `√(y1 + y2 − y1·y2)`
    pub h: f64,
    pub a: f64,
    pub b: f64,
}

impl FisherLsd {
    pub fn new(y1: f64, y2: f64) -> Result<Self> {
        let (a, b, h) = fisher_support(y1, y2)?;
        Ok(FisherLsd { y1, y2, h, a, b })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b {
            return 0.0;
        }
        (1.0 - self.y2) * ((self.b - x) * (x - self.a)).sqrt()
            / (2.0 * PI * x * (self.y1 + self.y2 * x))
    }
}

fn check_ratio(name: &str, y: f64) -> Result<()> {
    if y > 0.0 && y < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must lie in (0, 1), got {y}")))
    }
}

/// Support `(a, b)` and scale `h` of the F-matrix law.
pub fn fisher_support(y1: f64, y2: f64) -> Result<(f64, f64, f64)> {
    check_ratio("y1", y1)?;
    check_ratio("y2", y2)?;
    let h = (y1 + y2 - y1 * y2).sqrt();
    let scale = (1.0 - y2).powi(-2);
    Ok((scale * (1.0 - h).powi(2), scale * (1.0 + h).powi(2), h))
}

pub fn fisher_pdf(lsd: &FisherLsd, x: f64) -> f64 {
    lsd.pdf(x)
}

/// The two-sample test function
/// `f(x) = log(y1 + y2 x) − (y2/(y1+y2)) log x − log(y1 + y2)`.
pub fn two_sample_test_function(y1: f64, y2: f64, x: f64) -> f64 {
    (y1 + y2 * x).ln() - y2 / (y1 + y2) * x.ln() - (y1 + y2).ln()
}

/// `∫ f dF_{y1,y2}` for the two-sample test function, in closed form.
pub fn two_sample_centering(y1: f64, y2: f64) -> Result<f64> {
    check_ratio("y_n1", y1)?;
    check_ratio("y_n2", y2)?;
    let h2 = y1 + y2 - y1 * y2;
    let s = y1 + y2;
    // −(h²/(y1 y2)) log h² + (h²/(y1 y2)) log(y1+y2), with h²/(y1+y2) = 1 − y1y2/(y1+y2)
    let lead = -h2 / (y1 * y2) * (-(y1 * y2) / s).ln_1p();
    let t3 = y1 * (1.0 - y2) / (y2 * s) * (-y2).ln_1p();
    let t4 = y2 * (1.0 - y1) / (y1 * s) * (-y1).ln_1p();
    Ok(lead + t3 + t4)
}

/// The function `x ↦ log(alpha + beta_coef·x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogAffineSpec {
    pub alpha: f64,
    pub beta_coef: f64,
}

impl LogAffineSpec {
    pub fn new(alpha: f64, beta_coef: f64) -> Result<Self> {
        // alpha = 0 is admitted: log x maps to the pair (1, h).
        if !(alpha >= 0.0) || !(beta_coef > 0.0) || !alpha.is_finite() || !beta_coef.is_finite() {
            return Err(Error::domain(format!(
                "log-affine spec needs alpha >= 0 and beta_coef > 0, got ({alpha}, {beta_coef})"
            )));
        }
        Ok(LogAffineSpec { alpha, beta_coef })
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.alpha + self.beta_coef * x).ln()
    }
}

/// Solution `(c, d)` of `c² + d² = α(1−y2)² + β(1+h²)`, `cd = βh`, `0 < d < c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdPair {
    pub c: f64,
    pub d: f64,
}

pub fn lemma1_solve(spec: &LogAffineSpec, lsd: &FisherLsd) -> Result<CdPair> {
    if !(spec.alpha + spec.beta_coef * lsd.a > 0.0) {
        return Err(Error::domain("log-affine function is not defined on the support"));
    }
    let sum = spec.alpha * (1.0 - lsd.y2).powi(2) + spec.beta_coef * (1.0 + lsd.h * lsd.h);
    let prod = spec.beta_coef * lsd.h;
    // c² and d² are the roots of t² − sum·t + prod²
    let disc = sum * sum - 4.0 * prod * prod;
    if disc < -1e-12 * sum * sum {
        return Err(Error::NoRealSolution(format!(
            "discriminant {disc:e} is negative"
        )));
    }
    let big = 0.5 * (sum + disc.max(0.0).sqrt());
    let small = prod * prod / big;
    let (c, d) = (big.sqrt(), small.sqrt());
    if !(d > 0.0 && d < c) {
        return Err(Error::NoRealSolution(format!(
            "roots ({c}, {d}) violate 0 < d < c"
        )));
    }
    Ok(CdPair { c, d })
}

/// Limiting mean `½ log((c²−d²)h² / (ch − y2 d)²)`.
pub fn lemma1_mean(pair: &CdPair, lsd: &FisherLsd) -> Result<f64> {
    let CdPair { c, d } = *pair;
    let denom = c * lsd.h - lsd.y2 * d;
    if denom.abs() <= 1e-14 * c * lsd.h {
        return Err(Error::Singularity("c·h − y2·d vanishes".into()));
    }
    let diff = (c - d) * (c + d);
    if !(diff > 0.0) {
        return Err(Error::Singularity("c² − d² must be positive".into()));
    }
    Ok(0.5 * (diff * lsd.h * lsd.h / (denom * denom)).ln())
}

/// Limiting covariance `2 b h /(d c) · log(cγ / (cγ − dη))` between
/// `log(a + bx)` with pair `(c, d)` and `log(α + βx)` with pair `(γ, η)`.
pub fn lemma1_cov(pair_f: &CdPair, pair_g: &CdPair, beta_coef_f: f64, lsd: &FisherLsd) -> Result<f64> {
    let CdPair { c, d } = *pair_f;
    let CdPair { c: gamma, d: eta } = *pair_g;
    let cg = c * gamma;
    let gap = cg - d * eta;
    if !(gap > 0.0) {
        return Err(Error::Singularity("c·γ − d·η must be positive".into()));
    }
    Ok(2.0 * beta_coef_f * lsd.h / (d * c) * -(-(d * eta) / cg).ln_1p())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate_semicircle, QuadratureSpec};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn support_values() {
        let (a, b, h) = fisher_support(0.05, 0.05).unwrap();
        assert!(close(h, 0.0975f64.sqrt(), 1e-15));
        assert!(close(h, 0.3122499, 1e-7));
        assert!(close(a, 0.5241, 1e-4), "{a}");
        assert!(close(b, 1.9080, 1e-4), "{b}");
        // independent route: a = ((1 − h)/(1 − y2))²
        assert!(close(a, ((1.0 - h) / 0.95).powi(2), 1e-15));
        let (_, _, h) = fisher_support(0.05, 0.1).unwrap();
        assert!(close(h, 0.145f64.sqrt(), 1e-15));
        let (a, b, _) = fisher_support(1e-17, 1e-17).unwrap();
        assert!(close(a, 1.0, 1e-8) && close(b, 1.0, 1e-8));
        assert!(fisher_support(0.0, 0.5).is_err());
        assert!(fisher_support(0.5, 1.0).is_err());
    }

    #[test]
    fn density_normalized() {
        let spec = QuadratureSpec::default();
        for &(y1, y2) in &[(0.05, 0.05), (0.05, 0.1), (0.3, 0.6)] {
            let lsd = FisherLsd::new(y1, y2).unwrap();
            assert_eq!(lsd.pdf(lsd.a * 0.99), 0.0);
            let mass = integrate_semicircle(
                |x, r| (1.0 - y2) * r / (2.0 * PI * x * (y1 + y2 * x)),
                lsd.a,
                lsd.b,
                &spec,
            )
            .unwrap();
            assert!(close(mass, 1.0, 1e-9), "{y1} {y2}: {mass}");
        }
    }

    #[test]
    fn centering_vanishes_at_small_ratios() {
        let v = two_sample_centering(1e-6, 1e-6).unwrap();
        assert!(v.abs() <= 1e-5, "{v}");
        assert!(two_sample_centering(0.0, 0.1).is_err());
    }

    #[test]
    fn solve_known_pairs() {
        let lsd = FisherLsd::new(0.1, 0.05).unwrap();
        let p = lemma1_solve(&LogAffineSpec::new(0.1, 0.05).unwrap(), &lsd).unwrap();
        assert!(close(p.c, lsd.h, 1e-14) && close(p.d, 0.05, 1e-14));
        let p = lemma1_solve(&LogAffineSpec::new(0.0, 1.0).unwrap(), &lsd).unwrap();
        assert!(close(p.c, 1.0, 1e-14) && close(p.d, lsd.h, 1e-14));
        assert!(LogAffineSpec::new(-1.0, 1.0).is_err());
        assert!(LogAffineSpec::new(1.0, 0.0).is_err());
    }

    #[test]
    fn mean_of_known_pairs() {
        let lsd = FisherLsd::new(0.1, 0.05).unwrap();
        let (h, y2) = (lsd.h, lsd.y2);
        let m = lemma1_mean(&CdPair { c: h, d: y2 }, &lsd).unwrap();
        assert!(close(m, 0.5 * (h * h / (h * h - y2 * y2)).ln(), 1e-14));
        let m = lemma1_mean(&CdPair { c: 1.0, d: h }, &lsd).unwrap();
        let expected = 0.5 * ((1.0 - h * h) * h * h / (h - y2 * h).powi(2)).ln();
        assert!(close(m, expected, 1e-14));
        assert!(lemma1_mean(&CdPair { c: y2, d: h }, &lsd).is_err());
    }

    #[test]
    fn cov_of_known_pairs() {
        let lsd = FisherLsd::new(0.1, 0.05).unwrap();
        let (h, y2) = (lsd.h, lsd.y2);
        let p1 = CdPair { c: h, d: y2 };
        let p2 = CdPair { c: 1.0, d: h };
        let v11 = lemma1_cov(&p1, &p1, y2, &lsd).unwrap();
        assert!(close(v11, 2.0 * (h * h / (h * h - y2 * y2)).ln(), 1e-14));
        let v22 = lemma1_cov(&p2, &p2, 1.0, &lsd).unwrap();
        assert!(close(v22, 2.0 * (1.0 / (1.0 - h * h)).ln(), 1e-14));
        let v12 = lemma1_cov(&p1, &p2, y2, &lsd).unwrap();
        assert!(close(v12, 2.0 * (1.0 / (1.0 - y2)).ln(), 1e-14));
        let v21 = lemma1_cov(&p2, &p1, 1.0, &lsd).unwrap();
        assert!(close(v12, v21, 1e-14));
        assert!(lemma1_cov(&CdPair { c: 1.0, d: 1.0 }, &CdPair { c: 1.0, d: 1.0 }, 1.0, &lsd).is_err());
    }
}
