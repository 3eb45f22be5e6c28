//! Direct numerical evaluations of the limiting means and LSD functionals.
//!
//! Everything here integrates the defining integrals numerically (real
//! quadrature over the support, or quadrature around the unit circle) and
//! never touches the closed forms in [`crate::corrections`],
//! [`crate::mp_law`] or [`crate::fisher_lsd`]. The test suites use these
//! values to check the closed forms.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate, integrate_semicircle, QuadratureSpec};

/// Discretization of the `|ζ| = 1` contour integrals.
///
/// The kernels have poles at distance `1 − 1/r ≈ radius_offset` from the
/// circle, so the circle is cut into `nodes` equal arcs (two of them ending
/// exactly at the near-pole angles 0 and π) and each arc is integrated by
/// adaptive Gauss–Legendre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub radius_offset: f64,
    pub nodes: usize,
}

impl Default for ContourSpec {
    fn default() -> Self {
        ContourSpec {
            radius_offset: 1e-6,
            nodes: 4096,
        }
    }
}

impl ContourSpec {
    pub fn new(radius_offset: f64, nodes: usize) -> Result<Self> {
        if !(radius_offset > 0.0) || nodes < 256 || !nodes.is_multiple_of(2) {
            return Err(Error::domain(format!(
                "contour spec needs radius_offset > 0 and an even node count >= 256, \
                 got ({radius_offset}, {nodes})"
            )));
        }
        Ok(ContourSpec {
            radius_offset,
            nodes,
        })
    }
}

fn check_ratio(y: f64) -> Result<()> {
    if y > 0.0 && y < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("ratio must lie in (0, 1), got {y}")))
    }
}

fn fine_spec() -> QuadratureSpec {
    QuadratureSpec {
        abs_tolerance: 1e-12,
        max_refinements: 40,
    }
}

fn g_one_sample(x: f64) -> f64 {
    x - x.ln() - 1.0
}

/// `m(g) = (g(a)+g(b))/4 − (1/2π) ∫_a^b g(x)/√(4y − (x−1−y)²) dx` for
/// `g(x) = x − log x − 1`.
pub fn mean_oracle_one_sample(y: f64) -> Result<f64> {
    check_ratio(y)?;
    let a = (1.0 - y.sqrt()).powi(2);
    let b = (1.0 + y.sqrt()).powi(2);
    let integral = integrate_semicircle(|x, root| g_one_sample(x) / root, a, b, &fine_spec())?;
    Ok(0.25 * (g_one_sample(a) + g_one_sample(b)) - integral / (2.0 * PI))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CenteringTarget {
    /// `∫ (x − log x − 1) dF^y`.
    MarchenkoPastur(f64),
    /// `∫ f dF_{y1,y2}` for the two-sample test function.
    Fisher(f64, f64),
}

/// Quadrature of the test function against the limiting density.
pub fn centering_oracle(target: CenteringTarget) -> Result<f64> {
    let spec = fine_spec();
    match target {
        CenteringTarget::MarchenkoPastur(y) => {
            check_ratio(y)?;
            let a = (1.0 - y.sqrt()).powi(2);
            let b = (1.0 + y.sqrt()).powi(2);
            integrate_semicircle(
                |x, root| g_one_sample(x) * root / (2.0 * PI * y * x),
                a,
                b,
                &spec,
            )
        }
        CenteringTarget::Fisher(y1, y2) => {
            check_ratio(y1)?;
            check_ratio(y2)?;
            let h = (y1 + y2 - y1 * y2).sqrt();
            let a = ((1.0 - h) / (1.0 - y2)).powi(2);
            let b = ((1.0 + h) / (1.0 - y2)).powi(2);
            let s = y1 + y2;
            integrate_semicircle(
                |x, root| {
                    let f = (y1 + y2 * x).ln() - y2 / s * x.ln() - s.ln();
                    f * (1.0 - y2) * root / (2.0 * PI * x * (y1 + y2 * x))
                },
                a,
                b,
                &spec,
            )
        }
    }
}

/// `Re (1/2πi) ∮_{|ζ|=1} F(ζ) dζ = (1/2π) ∫_{−π}^{π} Re[F(e^{iθ}) e^{iθ}] dθ`
/// for integrands `θ ↦ Re[F(e^{iθ}) e^{iθ}]` that are even in θ, which holds
/// whenever `F(ζ̄) = conj F(ζ)`. Only `[0, π]` is integrated, in `nodes/2`
/// panels, so any near-pole peak must sit at θ = 0 where floating-point
/// angles are dense.
fn circle_integral<F>(integrand: F, spec: &ContourSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let panels = spec.nodes / 2;
    let panel = PI / panels as f64;
    let quad = QuadratureSpec {
        abs_tolerance: 1e-12 / panels as f64,
        max_refinements: 45,
    };
    let mut total = 0.0;
    for k in 0..panels {
        let lo = k as f64 * panel;
        let hi = if k + 1 == panels { PI } else { (k + 1) as f64 * panel };
        total += integrate(&integrand, lo, hi, &quad)?;
    }
    Ok(total / PI)
}

/// `Re[ζ/(ζ − ρ)]` at `ζ = e^{iθ}` for `0 < ρ < 1` close to 1, written so
/// that no difference of nearly equal numbers is formed.
fn near_pole_kernel(theta: f64, rho: f64) -> f64 {
    // ζ/(ζ − ρ) = 1/(1 − ρ e^{−iθ}) and |1 − ρ e^{−iθ}|² = (1−ρ)² + 4ρ sin²(θ/2)
    let q = (0.5 * theta).sin().powi(2);
    let gap = 1.0 - rho;
    (gap + 2.0 * rho * q) / (gap * gap + 4.0 * rho * q)
}

/// Limiting mean of `Σ f(λ_i) − p ∫ f dF_{y1,y2}` for a real test function
/// `f` analytic around the F-matrix support.
///
/// The contour terms carry an `O(r − 1)` bias at finite radius, so the
/// result is the Richardson extrapolation `2·m(ε/2) − m(ε)` of two
/// evaluations by [`contour_mean_at_radius`], with `ε = radius_offset`.
pub fn contour_mean<F>(f: F, y1: f64, y2: f64, beta: f64, spec: &ContourSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let coarse = contour_mean_at_radius(&f, y1, y2, beta, spec)?;
    let fine_spec = ContourSpec {
        radius_offset: 0.5 * spec.radius_offset,
        ..*spec
    };
    let fine = contour_mean_at_radius(&f, y1, y2, beta, &fine_spec)?;
    Ok(2.0 * fine - coarse)
}

/// The three contour terms evaluated on `|ζ| = 1` with the kernel poles at
/// radius `1/r`, `r = 1 + radius_offset`, without extrapolation.
pub fn contour_mean_at_radius<F>(f: F, y1: f64, y2: f64, beta: f64, spec: &ContourSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    check_ratio(y1)?;
    check_ratio(y2)?;
    ContourSpec::new(spec.radius_offset, spec.nodes)?;
    let h = (y1 + y2 - y1 * y2).sqrt();
    let r = 1.0 + spec.radius_offset;
    let rho = 1.0 / r;
    // f(z(ζ)) as a function of cos θ; it is real on the circle.
    let fz = |cos: f64| f((1.0 + h * h + 2.0 * h * cos) / (1.0 - y2).powi(2));
    let shifted = Complex64::new(y2 / (h * r), 0.0);

    // Kernel 1/(ζ − 1/r) + 1/(ζ + 1/r) − 2/(ζ + y2/(hr)). The pole at −1/r is
    // moved to θ = 0 by ζ → −ζ, which maps cos θ to −cos θ.
    let near_plus = circle_integral(|t| near_pole_kernel(t, rho) * fz(t.cos()), spec)?;
    let near_minus = circle_integral(|t| near_pole_kernel(t, rho) * fz(-t.cos()), spec)?;
    let far = circle_integral(
        |t| {
            let zeta = Complex64::from_polar(1.0, t);
            (zeta / (zeta + shifted)).re * fz(t.cos())
        },
        spec,
    )?;
    let mut mean = 0.5 * (near_plus + near_minus - 2.0 * far);

    if beta != 0.0 {
        let lead = Complex64::new(1.0 / (h * r), 0.0);
        let bx = circle_integral(
            |t| {
                let zeta = Complex64::from_polar(1.0, t);
                fz(t.cos()) * (zeta / (zeta + shifted).powi(3)).re
            },
            spec,
        )?;
        let by = circle_integral(
            |t| {
                let zeta = Complex64::from_polar(1.0, t);
                fz(t.cos()) * (zeta * (zeta + lead) / (zeta + shifted).powi(3)).re
            },
            spec,
        )?;
        mean += beta * y1 * (1.0 - y2).powi(2) / (h * h) * bx;
        mean += beta * y2 * (1.0 - y2) / h * by;
    }
    Ok(mean)
}

/// Contour evaluation of the two-sample mean for the test function
/// `log(y1 + y2 x) − (y2/(y1+y2)) log x − log(y1+y2)`.
pub fn mean_oracle_two_sample(y1: f64, y2: f64, beta: f64, spec: &ContourSpec) -> Result<f64> {
    let s = y1 + y2;
    contour_mean(
        |x| (y1 + y2 * x).ln() - y2 / s * x.ln() - s.ln(),
        y1,
        y2,
        beta,
        spec,
    )
}
