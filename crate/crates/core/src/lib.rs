//! Likelihood-ratio tests for large covariance matrices, corrected with
//! random matrix theory.
//!
//! Two problems are covered:
//!
//! * the one-sample test `H0: Σ = I` built on `L* = tr S − log|S| − p`,
//! * the two-sample test `H0: Σ1 = Σ2` built on `−2 log L1 / N`, which also
//!   serves as a pseudo-likelihood test for non-Gaussian data with a known
//!   fourth moment.
//!
//! The classical χ² calibration of both statistics breaks down once `p` is a
//! sizeable fraction of the sample size. The corrected statistics subtract
//! `p` times the Marčenko–Pastur (resp. Fisher) functional of the test
//! function, remove the asymptotic mean, and rescale by the asymptotic
//! variance to get a standard normal limit.
//!
//! ```
//! use clrt::corrections::{one_sample_mean, one_sample_var, PopulationCase};
//! use clrt::mp_law::one_sample_centering;
//!
//! let y = 0.1;
//! assert!((one_sample_centering(y).unwrap() - 0.0517553).abs() < 1e-6);
//! assert!((one_sample_mean(y, PopulationCase::Real).unwrap() - 0.0526803).abs() < 1e-6);
//! assert!((one_sample_var(y, PopulationCase::Real).unwrap() - 0.0107210).abs() < 1e-6);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod corrections;
pub mod error;
pub mod fisher_lsd;
pub mod hypothesis;
pub mod mp_law;
pub mod numerics;
pub mod oracles;
pub mod sim;
pub mod spectral;

pub use error::{Error, Result};
