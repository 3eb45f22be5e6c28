use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GAUSS_ORDER: usize = 20;

/// Tolerance and refinement budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tolerance: f64,
    /// Maximum bisection depth of any subinterval.
    pub max_refinements: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tolerance: 1e-10,
            max_refinements: 30,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tolerance: f64, max_refinements: u32) -> Result<Self> {
        let spec = QuadratureSpec {
            abs_tolerance,
            max_refinements,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tolerance > 0.0) || !self.abs_tolerance.is_finite() {
            return Err(Error::domain(format!(
                "abs_tolerance must be positive, got {}",
                self.abs_tolerance
            )));
        }
        if self.max_refinements < 1 {
            return Err(Error::domain("max_refinements must be at least 1"));
        }
        Ok(())
    }
}

/// Nodes and weights of the Gauss–Legendre rule on [-1, 1], found by Newton
/// iteration on the Legendre recurrence.
fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GAUSS_ORDER;
        let mut rule = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            rule.push((x, w));
        }
        rule
    })
}

fn gauss_panel<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    for &(x, w) in gauss_legendre() {
        let v = w * f(mid + half * x);
        sum += v;
        abs_sum += v.abs();
    }
    (sum * half, abs_sum * half)
}

/// Adaptive Gauss–Legendre quadrature of `f` over `[lo, hi]`.
///
/// Each panel is compared against the sum of its two halves and bisected
/// until the difference falls under its share of `abs_tolerance`. Integrands
/// with square-root behaviour at the endpoints should go through
/// [`integrate_semicircle`] instead.
pub fn integrate<F>(f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain(format!(
            "integration bounds must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    let width = hi - lo;
    let (whole, whole_abs) = gauss_panel(&f, lo, hi);
    let mut stack = vec![(lo, hi, whole, whole_abs, 0u32)];
    let mut total = 0.0;
    while let Some((a, b, estimate, estimate_abs, depth)) = stack.pop() {
        let m = 0.5 * (a + b);
        let (left, left_abs) = gauss_panel(&f, a, m);
        let (right, right_abs) = gauss_panel(&f, m, b);
        let refined = left + right;
        if !refined.is_finite() {
            return Err(Error::NonConvergence {
                lo: a,
                hi: b,
                estimate: f64::NAN,
            });
        }
        let err = (refined - estimate).abs();
        // Rounding floor: no rule can resolve below a few ulps of the panel mass.
        let allowed = (spec.abs_tolerance * (b - a) / width)
            .max(64.0 * f64::EPSILON * estimate_abs.max(left_abs + right_abs));
        if err <= allowed {
            total += refined;
        } else if depth + 1 >= spec.max_refinements {
            return Err(Error::NonConvergence {
                lo: a,
                hi: b,
                estimate: err,
            });
        } else {
            stack.push((a, m, left, left_abs, depth + 1));
            stack.push((m, b, right, right_abs, depth + 1));
        }
    }
    Ok(total)
}

/// Integrates `f(x, √((b−x)(x−a)))` over `[a, b]` after the substitution
/// `x = (a+b)/2 − ((b−a)/2)·cos θ`, θ ∈ [0, π].
///
/// The closure receives the radical computed as `((b−a)/2)·sin θ`, so
/// integrands carrying `√((b−x)(x−a))` or its reciprocal become smooth in θ
/// and lose no precision near the edges.
pub fn integrate_semicircle<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    if !(a < b) {
        return Err(Error::domain(format!(
            "support must satisfy a < b, got [{a}, {b}]"
        )));
    }
    let centre = 0.5 * (a + b);
    let radius = 0.5 * (b - a);
    integrate(
        |theta| {
            let (s, c) = theta.sin_cos();
            let root = radius * s;
            f(centre - radius * c, root) * root
        },
        0.0,
        PI,
        spec,
    )
}
