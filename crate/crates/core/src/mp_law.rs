//! Marčenko–Pastur law and the centering term of the one-sample statistic.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Marčenko–Pastur distribution of index `y ∈ (0, 1]` on `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpLaw {
    pub y: f64,
    pub a: f64,
    pub b: f64,
}

impl MpLaw {
    pub fn new(y: f64) -> Result<Self> {
        let (a, b) = mp_support(y)?;
        Ok(MpLaw { y, a, b })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b {
            return 0.0;
        }
        ((self.b - x) * (x - self.a)).sqrt() / (2.0 * PI * self.y * x)
    }
}

/// Support edges `((1−√y)², (1+√y)²)`.
pub fn mp_support(y: f64) -> Result<(f64, f64)> {
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::domain(format!("MP index must lie in (0, 1], got {y}")));
    }
    let r = y.sqrt();
    Ok(((1.0 - r).powi(2), (1.0 + r).powi(2)))
}

pub fn mp_pdf(y: f64, x: f64) -> Result<f64> {
    Ok(MpLaw::new(y)?.pdf(x))
}

/// `∫ (x − log x − 1) dF^y(x) = 1 − ((y−1)/y)·log(1−y)`, the per-dimension
/// centering of `L*`.
pub fn one_sample_centering(y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::domain(format!("ratio must lie in (0, 1), got {y}")));
    }
    Ok(1.0 - (y - 1.0) / y * (-y).ln_1p())
}
