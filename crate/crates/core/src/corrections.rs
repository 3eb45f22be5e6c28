//! Asymptotic means and variances that turn the raw likelihood-ratio
//! statistics into standard normal scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher_lsd::two_sample_centering;
use crate::mp_law::one_sample_centering;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopulationCase {
    #[default]
    Real,
    Complex,
}

/// `β = E|ξ|⁴ − 3` for real data, `E|ξ|⁴ − 2` for complex data.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FourthMomentInfo {
    pub beta: f64,
}

impl FourthMomentInfo {
    pub fn new(beta: f64, case: PopulationCase) -> Result<Self> {
        let floor = match case {
            PopulationCase::Real => -2.0,
            PopulationCase::Complex => -1.0,
        };
        if !beta.is_finite() || beta < floor {
            return Err(Error::domain(format!(
                "fourth-moment parameter {beta} is infeasible (must be >= {floor})"
            )));
        }
        Ok(FourthMomentInfo { beta })
    }

    pub fn gaussian() -> Self {
        FourthMomentInfo { beta: 0.0 }
    }
}

/// Centering, mean and variance of one corrected statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionConstants {
    /// `p` times the limiting-law functional of the test function.
    pub centering: f64,
    pub mean: f64,
    pub variance: f64,
}

fn check_ratio(y: f64) -> Result<()> {
    if y > 0.0 && y < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("ratio must lie in (0, 1), got {y}")))
    }
}

/// `m(g) = −log(1−y)/2` (real), `0` (complex).
pub fn one_sample_mean(y: f64, case: PopulationCase) -> Result<f64> {
    check_ratio(y)?;
    Ok(match case {
        PopulationCase::Real => -0.5 * (-y).ln_1p(),
        PopulationCase::Complex => 0.0,
    })
}

/// `υ(g) = −2 log(1−y) − 2y` (real), half of it (complex).
pub fn one_sample_var(y: f64, case: PopulationCase) -> Result<f64> {
    check_ratio(y)?;
    // −2 log(1−y) − 2y summed as a series near 0 to keep relative accuracy
    let v = if y < 1e-3 {
        let mut term = y * y;
        let mut sum = 0.0;
        for k in 2..12 {
            sum += term / k as f64;
            term *= y;
        }
        2.0 * sum
    } else {
        -2.0 * (-y).ln_1p() - 2.0 * y
    };
    Ok(match case {
        PopulationCase::Real => v,
        PopulationCase::Complex => 0.5 * v,
    })
}

/// Shift of the two-sample mean due to non-zero `β`:
/// `(β/2)·(y1²y2 + y1y2²)/(y1+y2)²`.
pub fn two_sample_beta_shift(y1: f64, y2: f64, fm: FourthMomentInfo) -> f64 {
    0.5 * fm.beta * (y1 * y1 * y2 + y1 * y2 * y2) / ((y1 + y2) * (y1 + y2))
}

/// Limiting mean of the two-sample statistic.
pub fn two_sample_mean(y1: f64, y2: f64, case: PopulationCase, fm: FourthMomentInfo) -> Result<f64> {
    check_ratio(y1)?;
    check_ratio(y2)?;
    let shift = two_sample_beta_shift(y1, y2, fm);
    Ok(match case {
        PopulationCase::Real => {
            let s = y1 + y2;
            let gaussian = 0.5
                * ((-(y1 * y2) / s).ln_1p() - y1 / s * (-y2).ln_1p() - y2 / s * (-y1).ln_1p());
            gaussian + shift
        }
        PopulationCase::Complex => shift,
    })
}

/// Limiting variance of the two-sample statistic; the fourth moment does
/// not enter.
pub fn two_sample_var(y1: f64, y2: f64, case: PopulationCase, _fm: FourthMomentInfo) -> Result<f64> {
    check_ratio(y1)?;
    check_ratio(y2)?;
    let s = y1 + y2;
    let v = -2.0 * y2 * y2 / (s * s) * (-y1).ln_1p() - 2.0 * y1 * y1 / (s * s) * (-y2).ln_1p()
        + 2.0 * (-(y1 * y2) / s).ln_1p();
    Ok(match case {
        PopulationCase::Real => v,
        PopulationCase::Complex => 0.5 * v,
    })
}

/// All constants of the one-sample test at dimension `p`, sample size `n`.
pub fn one_sample_constants(p: usize, n: usize, case: PopulationCase) -> Result<CorrectionConstants> {
    let y = p as f64 / n as f64;
    Ok(CorrectionConstants {
        centering: p as f64 * one_sample_centering(y)?,
        mean: one_sample_mean(y, case)?,
        variance: one_sample_var(y, case)?,
    })
}

/// All constants of the two-sample test for `p`, `n1`, `n2`.
pub fn two_sample_constants(
    p: usize,
    n1: usize,
    n2: usize,
    case: PopulationCase,
    fm: FourthMomentInfo,
) -> Result<CorrectionConstants> {
    let y1 = p as f64 / n1 as f64;
    let y2 = p as f64 / n2 as f64;
    Ok(CorrectionConstants {
        centering: p as f64 * two_sample_centering(y1, y2)?,
        mean: two_sample_mean(y1, y2, case, fm)?,
        variance: two_sample_var(y1, y2, case, fm)?,
    })
}
