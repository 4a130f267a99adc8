//! Dense matrix helpers used by the filter and the bound certifier.
//!
//! Every routine is a pure function over `nalgebra` dynamic matrices. Spectral
//! routines on nominally symmetric inputs first replace the input by its
//! symmetric part `(m + mᵀ)/2`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative tolerance for eigenvalue and singular value decisions.
pub const SPECTRAL_TOL: f64 = 1e-10;

/// Relative threshold below which a singular value counts as zero in rank tests.
pub const RANK_TOL: f64 = 1e-8;

fn ensure_finite(m: &Matrix, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} has non-finite entries")))
    }
}

fn ensure_square(m: &Matrix, what: &str) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

/// Largest singular value `σ̄(m)`.
pub fn largest_singular_value(m: &Matrix) -> Result<f64> {
    ensure_finite(m, "matrix")?;
    if m.is_empty() {
        return Ok(0.0);
    }
    Ok(m.singular_values().max())
}

/// Maximum eigenvalue modulus.
pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    ensure_square(m, "matrix")?;
    ensure_finite(m, "matrix")?;
    if m.is_empty() {
        return Ok(0.0);
    }
    Ok(eigenvalues(m).iter().map(|l| l.norm()).fold(0.0, f64::max))
}

/// Eigenvalues of a real square matrix, possibly complex.
pub(crate) fn eigenvalues(m: &Matrix) -> Vec<Complex64> {
    m.complex_eigenvalues().iter().copied().collect()
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Largest `|m_ij - m_ji|` relative to `max(1, max |m_ij|)`.
pub fn asymmetry(m: &Matrix) -> f64 {
    let scale = m.amax().max(1.0);
    (m - m.transpose()).amax() / scale
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_symmetric_eigenvalue(m: &Matrix) -> f64 {
    symmetrize(m).symmetric_eigenvalues().min()
}

/// True iff `m` is symmetric within `tol` and its symmetric part has every
/// eigenvalue above `tol`.
pub fn is_positive_definite(m: &Matrix, tol: f64) -> Result<bool> {
    ensure_square(m, "matrix")?;
    if m.is_empty() || !m.iter().all(|v| v.is_finite()) {
        return Ok(false);
    }
    if asymmetry(m) > tol.max(SPECTRAL_TOL) {
        return Ok(false);
    }
    Ok(min_symmetric_eigenvalue(m) > tol)
}

/// Quadratic form `xᵀ m x`, clamped at zero against roundoff.
pub fn weighted_norm_sq(x: &Vector, m: &Matrix) -> Result<f64> {
    if !m.is_square() || m.nrows() != x.len() {
        return Err(Error::Dimension(format!(
            "vector of length {} against {}x{} weight",
            x.len(),
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(x.dot(&(m * x)).max(0.0))
}

/// Positive semidefinite order `m1 ⪯ m2`, i.e. `λ_min(m2 - m1) ≥ -tol`.
pub fn psd_leq(m1: &Matrix, m2: &Matrix, tol: f64) -> Result<bool> {
    if m1.shape() != m2.shape() || !m1.is_square() {
        return Err(Error::Dimension(format!(
            "psd order needs equal square shapes, got {:?} and {:?}",
            m1.shape(),
            m2.shape()
        )));
    }
    for (m, name) in [(m1, "left operand"), (m2, "right operand")] {
        ensure_finite(m, name)?;
        if asymmetry(m) > tol.max(SPECTRAL_TOL) {
            return Err(Error::Domain(format!("{name} is not symmetric")));
        }
    }
    if m1.is_empty() {
        return Ok(true);
    }
    Ok(min_symmetric_eigenvalue(&(m2 - m1)) >= -tol)
}

/// Symmetric principal square root of a positive semidefinite matrix.
pub fn sym_sqrt(m: &Matrix) -> Result<Matrix> {
    let eig = SymmetricEigen::new(symmetrize(m));
    let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    if eig.eigenvalues.min() < -SPECTRAL_TOL * scale {
        return Err(Error::Domain("square root of an indefinite matrix".into()));
    }
    Ok(eig_map(&eig, |l| l.max(0.0).sqrt()))
}

/// Symmetric principal inverse square root of a positive definite matrix.
pub fn sym_inv_sqrt(m: &Matrix) -> Result<Matrix> {
    let eig = SymmetricEigen::new(symmetrize(m));
    if eig.eigenvalues.min() <= 0.0 {
        return Err(Error::Domain("inverse square root of a singular or indefinite matrix".into()));
    }
    Ok(eig_map(&eig, |l| 1.0 / l.sqrt()))
}

fn eig_map(eig: &SymmetricEigen<f64, nalgebra::Dyn>, f: impl Fn(f64) -> f64) -> Matrix {
    let u = &eig.eigenvectors;
    let d = Matrix::from_diagonal(&eig.eigenvalues.map(f));
    symmetrize(&(u * d * u.transpose()))
}

/// Numerical rank of a complex matrix: singular values below
/// `RANK_TOL * σ̄` count as zero.
pub(crate) fn complex_rank(m: &DMatrix<Complex64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * top).count()
}
