//! Data matrices, sample covariances, symmetric spectra and the raw
//! likelihood-ratio statistics.

use nalgebra::linalg::{SymmetricEigen, SymmetricTridiagonal};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative threshold below which an eigenvalue counts as zero.
pub const SINGULARITY_TOLERANCE: f64 = 1e-10;

const QL_MAX_ITERATIONS: usize = 60;

/// `n` observations (rows) of a `p`-dimensional variable (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMatrix {
    values: DMatrix<f64>,
}

impl ObservationMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(Error::InvalidData(format!(
                "need at least 2 observations, got {}",
                values.nrows()
            )));
        }
        if values.ncols() < 1 {
            return Err(Error::InvalidData("need at least one variable".into()));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            // column-major storage
            let (r, c) = (pos % values.nrows(), pos / values.nrows());
            return Err(Error::InvalidData(format!(
                "non-finite entry at observation {r}, variable {c}"
            )));
        }
        Ok(ObservationMatrix { values })
    }

    /// Builds the matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
            return Err(Error::InvalidData(format!(
                "row {i} has {} values, expected {p}",
                r.len()
            )));
        }
        Self::new(DMatrix::from_fn(n, p, |i, j| rows[i][j]))
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.values
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Dimension.
    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn transposed(&self) -> Result<Self> {
        Self::new(self.values.transpose())
    }
}

/// Symmetric positive semi-definite `p × p` matrix together with the divisor
/// that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    values: DMatrix<f64>,
    divisor_n: usize,
}

impl CovarianceMatrix {
    /// Wraps a square matrix, rejecting asymmetry beyond 1e-12 relative.
    pub fn new(values: DMatrix<f64>, divisor_n: usize) -> Result<Self> {
        if !values.is_square() || values.nrows() == 0 {
            return Err(Error::InvalidData(format!(
                "covariance must be square and non-empty, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("covariance has non-finite entries".into()));
        }
        let scale = values.amax().max(f64::MIN_POSITIVE);
        let asym = (&values - values.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(Error::InvalidData(format!(
                "covariance is not symmetric (max asymmetry {asym:e})"
            )));
        }
        let values = (&values + values.transpose()) * 0.5;
        Ok(CovarianceMatrix { values, divisor_n })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn divisor_n(&self) -> usize {
        self.divisor_n
    }

    pub fn p(&self) -> usize {
        self.values.nrows()
    }
}

/// Eigenvalues of a symmetric matrix in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Fails with `DegenerateCovariance` if the smallest eigenvalue is at or
    /// below `SINGULARITY_TOLERANCE · max(1, λ_max)`.
    pub fn ensure_positive_definite(&self) -> Result<()> {
        let threshold = SINGULARITY_TOLERANCE * self.max().max(1.0);
        if self.min() <= threshold {
            return Err(Error::DegenerateCovariance {
                min_eigenvalue: self.min(),
                threshold,
            });
        }
        Ok(())
    }

    /// `Σ log λ_i`, after checking positive definiteness.
    pub fn log_det(&self) -> Result<f64> {
        self.ensure_positive_definite()?;
        Ok(self.eigenvalues.iter().map(|l| l.ln()).sum())
    }
}

/// `S = (1/n) Σ (x_i − x̄)(x_i − x̄)ᵀ`, divisor `n`.
pub fn sample_covariance(x: &ObservationMatrix) -> CovarianceMatrix {
    let n = x.n();
    let mut centered = x.values.clone();
    for mut col in centered.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let mut s = centered.tr_mul(&centered);
    s /= n as f64;
    let s = (&s + s.transpose()) * 0.5;
    CovarianceMatrix {
        values: s,
        divisor_n: n,
    }
}

/// Eigenvalues of a symmetric matrix, ascending.
///
/// Householder reduction to tridiagonal form followed by implicit-shift QL
/// iterations; fails with `ConvergenceFailure` if an eigenvalue needs more
/// than 60 sweeps.
pub fn eigenvalues_sym(s: &CovarianceMatrix) -> Result<Spectrum> {
    symmetric_eigenvalues(&s.values)
}

pub(crate) fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Spectrum> {
    let dim = m.nrows();
    let mut eigenvalues = if dim == 1 {
        vec![m[(0, 0)]]
    } else {
        let (diag, off) = SymmetricTridiagonal::new(m.clone()).unpack_tridiagonal();
        let mut d: Vec<f64> = diag.iter().copied().collect();
        let mut e: Vec<f64> = off.iter().copied().collect();
        e.push(0.0);
        tridiagonal_ql(&mut d, &mut e).ok_or(Error::ConvergenceFailure { dim })?;
        d
    };
    if eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::ConvergenceFailure { dim });
    }
    eigenvalues.sort_by(f64::total_cmp);
    Ok(Spectrum { eigenvalues })
}

/// Implicit QL on the symmetric tridiagonal matrix with diagonal `d` and
/// sub-diagonal `e` (`e[n-1]` unused). On return `d` holds the eigenvalues.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Option<()> {
    let n = d.len();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > QL_MAX_ITERATIONS {
                return None;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Some(())
}

/// Full eigendecomposition `S = Q Λ Qᵀ` with eigenvalues ascending.
pub fn eigen_decomposition_sym(m: &DMatrix<f64>) -> Result<(Spectrum, DMatrix<f64>)> {
    let dim = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 100 * dim.max(1))
        .ok_or(Error::ConvergenceFailure { dim })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((Spectrum { eigenvalues }, vectors))
}

/// `A^{-1/2}` of a symmetric positive definite matrix.
pub fn inverse_sqrt_spd(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let cov = CovarianceMatrix::new(a.clone(), 0)?;
    let (spectrum, q) = eigen_decomposition_sym(&cov.values)?;
    spectrum.ensure_positive_definite()?;
    let scale = DVector::from_iterator(
        spectrum.len(),
        spectrum.eigenvalues().iter().map(|l| 1.0 / l.sqrt()),
    );
    let scaled = &q * DMatrix::from_diagonal(&scale);
    let root = scaled * q.transpose();
    Ok((&root + root.transpose()) * 0.5)
}

/// Maps observations `x_i` to `A^{-1/2} x_i`, reducing `H0: Σ = A` to
/// `H0: Σ = I`.
pub fn whiten(x: &ObservationMatrix, reference: &DMatrix<f64>) -> Result<ObservationMatrix> {
    if reference.nrows() != x.p() || reference.ncols() != x.p() {
        return Err(Error::DimensionMismatch {
            expected: x.p(),
            found: reference.nrows(),
        });
    }
    let root = inverse_sqrt_spd(reference)?;
    ObservationMatrix::new(&x.values * root)
}

/// `L* = tr S − log|S| − p = Σ (λ_i − log λ_i − 1)`.
pub fn one_sample_lr_core(s: &CovarianceMatrix) -> Result<f64> {
    let spectrum = eigenvalues_sym(s)?;
    spectrum.ensure_positive_definite()?;
    Ok(spectrum
        .eigenvalues()
        .iter()
        .map(|&l| (l - 1.0) - (l - 1.0).ln_1p())
        .sum())
}

/// `−(2/N) log L1 = log|c1 A + c2 B| − c1 log|A| − c2 log|B|` with
/// `c_k = n_k / N`.
pub fn two_sample_lr_core(
    a: &CovarianceMatrix,
    b: &CovarianceMatrix,
    n1: usize,
    n2: usize,
) -> Result<f64> {
    if a.p() != b.p() {
        return Err(Error::DimensionMismatch {
            expected: a.p(),
            found: b.p(),
        });
    }
    if n1 == 0 || n2 == 0 {
        return Err(Error::domain("sample sizes must be positive"));
    }
    let total = (n1 + n2) as f64;
    let c1 = n1 as f64 / total;
    let c2 = n2 as f64 / total;
    let pooled = &a.values * c1 + &b.values * c2;
    let pooled = (&pooled + pooled.transpose()) * 0.5;
    let log_pooled = symmetric_eigenvalues(&pooled)?.log_det()?;
    let log_a = eigenvalues_sym(a)?.log_det()?;
    let log_b = eigenvalues_sym(b)?.log_det()?;
    Ok(log_pooled - c1 * log_a - c2 * log_b)
}
