//! Numerical building blocks: quadrature, special functions and seeded
//! random streams.

mod quadrature;
mod random;
mod special;

pub use quadrature::{integrate, integrate_semicircle, QuadratureSpec};
pub use random::{sample_scaled_t5, sample_standard_normal, RandomStream, Variate};
pub use special::{chisq_sf, std_normal_cdf, std_normal_sf};
