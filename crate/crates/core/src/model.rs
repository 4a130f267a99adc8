//! The game 4-tuple `(A, C, V, Q)` and its structural checks.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linops::{self, Matrix};

/// Tolerance on `|det(A)|` for the nonsingularity flag.
pub const DET_TOL: f64 = 1e-12;

/// Tolerance used when checking that `Q` and `V` are positive definite.
pub const PD_TOL: f64 = 1e-12;

/// State-space description of the prediction game.
///
/// `a` is `n×n`, `c` is `p×n`, `q` is `n×n` and `v` is `p×p`. Construction
/// only checks shapes and finiteness; [`SystemModel::validate`] checks the
/// definiteness of the weights and the structural hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    a: Matrix,
    c: Matrix,
    q: Matrix,
    v: Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureReport {
    pub detectable: bool,
    pub stabilizable: bool,
    pub a_nonsingular: bool,
    pub controllable_aq: bool,
}

impl SystemModel {
    pub fn new(a: Matrix, c: Matrix, q: Matrix, v: Matrix) -> Result<Self> {
        let n = a.nrows();
        let p = c.nrows();
        if n == 0 || p == 0 {
            return Err(Error::Dimension("state and output dimensions must be positive".into()));
        }
        if a.ncols() != n {
            return Err(Error::Dimension(format!("A must be square, got {}x{}", n, a.ncols())));
        }
        if c.ncols() != n {
            return Err(Error::Dimension(format!("C must be {p}x{n}, got {p}x{}", c.ncols())));
        }
        if q.shape() != (n, n) {
            return Err(Error::Dimension(format!("Q must be {n}x{n}, got {:?}", q.shape())));
        }
        if v.shape() != (p, p) {
            return Err(Error::Dimension(format!("V must be {p}x{p}, got {:?}", v.shape())));
        }
        for (m, name) in [(&a, "A"), (&c, "C"), (&q, "Q"), (&v, "V")] {
            if !m.iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidModel(format!("{name} has non-finite entries")));
            }
        }
        Ok(Self { a, c, q, v })
    }

    /// Builds a model from row-major entry slices.
    pub fn from_rows(n: usize, p: usize, a: &[f64], c: &[f64], q: &[f64], v: &[f64]) -> Result<Self> {
        let check = |name: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(Error::Dimension(format!("{name} needs {want} entries, got {got}")))
            }
        };
        check("A", a.len(), n * n)?;
        check("C", c.len(), p * n)?;
        check("Q", q.len(), n * n)?;
        check("V", v.len(), p * p)?;
        Self::new(
            Matrix::from_row_slice(n, n, a),
            Matrix::from_row_slice(p, n, c),
            Matrix::from_row_slice(n, n, q),
            Matrix::from_row_slice(p, p, v),
        )
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn v(&self) -> &Matrix {
        &self.v
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Output dimension.
    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    /// Checks that `Q` and `V` are positive definite and runs the PBH tests.
    pub fn validate(&self) -> Result<StructureReport> {
        if !linops::is_positive_definite(&self.q, PD_TOL)? {
            return Err(Error::InvalidModel("Q is not symmetric positive definite".into()));
        }
        if !linops::is_positive_definite(&self.v, PD_TOL)? {
            return Err(Error::InvalidModel("V is not symmetric positive definite".into()));
        }
        let q_half = linops::sym_sqrt(&self.q)?;
        let report = StructureReport {
            detectable: is_detectable(&self.a, &self.c)?,
            stabilizable: is_stabilizable(&self.a, &q_half)?,
            a_nonsingular: self.a.determinant().abs() > DET_TOL,
            controllable_aq: is_controllable(&self.a, &q_half)?,
        };
        Ok(report)
    }

    /// Plain-text `[system]` section with every matrix written row-major at
    /// 17 significant digits.
    pub fn to_config_text(&self) -> String {
        let mut out = String::from("[system]\n");
        let _ = writeln!(out, "n = {}", self.n());
        let _ = writeln!(out, "p = {}", self.p());
        for (name, m) in [("a", &self.a), ("c", &self.c), ("q", &self.q), ("v", &self.v)] {
            let _ = writeln!(out, "{name} = [{}]", format_row_major(m));
        }
        out
    }
}

fn format_row_major(m: &Matrix) -> String {
    let mut parts = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            parts.push(format!("{:.16e}", m[(i, j)]));
        }
    }
    parts.join(", ")
}

fn to_complex(m: &Matrix) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// PBH rank test. `stacked` selects `[λI − A; C]` (observability side) versus
/// `[λI − A, B]` (controllability side). Only eigenvalues accepted by `filter`
/// are tested.
fn pbh(a: &Matrix, other: &Matrix, stacked: bool, filter: impl Fn(Complex64) -> bool) -> Result<bool> {
    if !a.is_square() {
        return Err(Error::Dimension("A must be square".into()));
    }
    let n = a.nrows();
    let ac = to_complex(a);
    let oc = to_complex(other);
    for lambda in linops::eigenvalues(a) {
        if !filter(lambda) {
            continue;
        }
        let shifted = DMatrix::<Complex64>::identity(n, n) * lambda - &ac;
        let block = if stacked {
            let mut b = DMatrix::<Complex64>::zeros(n + oc.nrows(), n);
            b.view_mut((0, 0), (n, n)).copy_from(&shifted);
            b.view_mut((n, 0), (oc.nrows(), n)).copy_from(&oc);
            b
        } else {
            let mut b = DMatrix::<Complex64>::zeros(n, n + oc.ncols());
            b.view_mut((0, 0), (n, n)).copy_from(&shifted);
            b.view_mut((0, n), (n, oc.ncols())).copy_from(&oc);
            b
        };
        if linops::complex_rank(&block) < n {
            return Ok(false);
        }
    }
    Ok(true)
}

// eigenvalues this close to the unit circle are treated as marginal
const UNIT_CIRCLE_SLACK: f64 = 1e-10;

/// `(C, A)` detectable: every eigenvalue of `A` on or outside the unit circle is observable.
pub fn is_detectable(a: &Matrix, c: &Matrix) -> Result<bool> {
    if c.ncols() != a.nrows() {
        return Err(Error::Dimension("C must have as many columns as A".into()));
    }
    pbh(a, c, true, |l| l.norm() >= 1.0 - UNIT_CIRCLE_SLACK)
}

/// `(A, B)` stabilizable: every eigenvalue on or outside the unit circle is excited by `B`.
pub fn is_stabilizable(a: &Matrix, b: &Matrix) -> Result<bool> {
    if b.nrows() != a.nrows() {
        return Err(Error::Dimension("B must have as many rows as A".into()));
    }
    pbh(a, b, false, |l| l.norm() >= 1.0 - UNIT_CIRCLE_SLACK)
}

/// `(A, B)` controllable.
pub fn is_controllable(a: &Matrix, b: &Matrix) -> Result<bool> {
    if b.nrows() != a.nrows() {
        return Err(Error::Dimension("B must have as many rows as A".into()));
    }
    pbh(a, b, false, |_| true)
}

/// Random stable system with standard-normal `C`, `Q = 0.5·I` and `V = I`.
///
/// `A` is a standard-normal matrix rescaled so that its spectral radius is a
/// uniform draw from `[0.3, 0.9]`. Draws are repeated until the PBH tests
/// pass, so the returned model is always detectable and stabilizable.
pub fn random_stable_system(n: usize, p: usize, seed: u64) -> Result<SystemModel> {
    if n == 0 || p == 0 {
        return Err(Error::Dimension("n and p must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let raw = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let target: f64 = rng.random_range(0.3..=0.9);
        let c = Matrix::from_fn(p, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let rho = linops::spectral_radius(&raw)?;
        if rho < 1e-8 {
            continue;
        }
        let a = raw * (target / rho);
        let model = SystemModel::new(a, c, Matrix::identity(n, n) * 0.5, Matrix::identity(p, p))?;
        let report = model.validate()?;
        if report.detectable && report.stabilizable && linops::spectral_radius(model.a())? < 1.0 {
            return Ok(model);
        }
    }
}
