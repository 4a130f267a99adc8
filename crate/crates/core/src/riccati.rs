//! Riccati recursion, its fixed point (the DARE) and the steady-state filter.

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::linops::{self, Matrix};
use crate::model::SystemModel;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// One application of the Riccati recursion
/// `Σ ↦ A(Σ⁻¹ + CᵀV⁻¹C)⁻¹Aᵀ + Q` with its by-products.
#[derive(Debug, Clone)]
pub struct RiccatiUpdate {
    /// `(Σ⁻¹ + CᵀV⁻¹C)⁻¹`
    pub posterior: Matrix,
    /// `A (Σ⁻¹ + CᵀV⁻¹C)⁻¹ CᵀV⁻¹`
    pub gain: Matrix,
    pub next: Matrix,
}

/// Precomputed model quantities for repeated Riccati updates.
///
/// The posterior `(Σ⁻¹ + CᵀV⁻¹C)⁻¹` is evaluated as
/// `Σ − ΣCᵀ(V + CΣCᵀ)⁻¹CΣ`, solving the positive definite `p×p` system
/// by Cholesky. Σ itself is never inverted.
#[derive(Debug, Clone)]
pub struct RiccatiMap {
    a: Matrix,
    c: Matrix,
    q: Matrix,
    v: Matrix,
    /// `CᵀV⁻¹`
    ct_vinv: Matrix,
}

impl RiccatiMap {
    pub fn new(model: &SystemModel) -> Result<Self> {
        let v_chol = Cholesky::new(linops::symmetrize(model.v()))
            .ok_or_else(|| Error::InvalidModel("V is not positive definite".into()))?;
        // (V⁻¹C)ᵀ = CᵀV⁻¹ since V is symmetric
        let ct_vinv = v_chol.solve(model.c()).transpose();
        Ok(Self {
            a: model.a().clone(),
            c: model.c().clone(),
            q: model.q().clone(),
            v: model.v().clone(),
            ct_vinv,
        })
    }

    pub fn update(&self, sigma: &Matrix) -> Result<RiccatiUpdate> {
        let c_sigma = &self.c * sigma;
        let innovation = linops::symmetrize(&(&self.v + &c_sigma * self.c.transpose()));
        let chol = Cholesky::new(innovation)
            .ok_or_else(|| Error::Numerical("innovation matrix V + CΣCᵀ lost definiteness".into()))?;
        let correction = c_sigma.transpose() * chol.solve(&c_sigma);
        let posterior = linops::symmetrize(&(sigma - correction));
        let gain = &self.a * &posterior * &self.ct_vinv;
        let next = linops::symmetrize(&(&self.a * &posterior * self.a.transpose() + &self.q));
        if Cholesky::new(next.clone()).is_none() {
            return Err(Error::Numerical("Σ lost positive definiteness".into()));
        }
        Ok(RiccatiUpdate { posterior, gain, next })
    }

    pub fn gain(&self, sigma: &Matrix) -> Result<Matrix> {
        Ok(self.update(sigma)?.gain)
    }
}

/// Steady-state filter: DARE solution, gain, closed loop and diagnostics.
#[derive(Debug, Clone)]
pub struct SteadySummary {
    pub sigma_ss: Matrix,
    pub k_ss: Matrix,
    /// Closed loop `A − K̄C`.
    pub h: Matrix,
    pub sigma_h: f64,
    pub rho_h: f64,
    pub iterations: usize,
    pub residual: f64,
}

fn check_hypotheses(model: &SystemModel) -> Result<()> {
    let report = model.validate()?;
    if !report.detectable {
        return Err(Error::Precondition("(C, A) is not detectable".into()));
    }
    if !report.stabilizable {
        return Err(Error::Precondition("(A, Q) is not stabilizable".into()));
    }
    Ok(())
}

/// Solves the DARE by iterating the Riccati recursion from `Σ₀ = I` until
/// consecutive iterates differ by at most `tol` in spectral norm.
pub fn solve_dare(model: &SystemModel, tol: f64, max_iter: usize) -> Result<SteadySummary> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    check_hypotheses(model)?;
    let map = RiccatiMap::new(model)?;
    let mut sigma = Matrix::identity(model.n(), model.n());
    let mut gap = f64::INFINITY;
    let mut converged_at = None;
    for k in 1..=max_iter {
        let next = map.update(&sigma)?.next;
        gap = linops::largest_singular_value(&(&next - &sigma))?;
        sigma = next;
        if gap <= tol {
            converged_at = Some(k);
            break;
        }
    }
    let iterations = converged_at.ok_or(Error::Convergence {
        iterations: max_iter,
        residual: gap,
    })?;
    summarize(model, &map, sigma, iterations)
}

pub fn solve_dare_default(model: &SystemModel) -> Result<SteadySummary> {
    solve_dare(model, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

fn summarize(model: &SystemModel, map: &RiccatiMap, sigma: Matrix, iterations: usize) -> Result<SteadySummary> {
    let k_ss = map.gain(&sigma)?;
    let h = model.a() - &k_ss * model.c();
    Ok(SteadySummary {
        sigma_h: linops::largest_singular_value(&h)?,
        rho_h: linops::spectral_radius(&h)?,
        residual: residual(model, &sigma)?,
        sigma_ss: sigma,
        k_ss,
        h,
        iterations,
    })
}

/// Spectral norm of the DARE defect `Σ − A(Σ⁻¹ + CᵀV⁻¹C)⁻¹Aᵀ − Q`.
pub fn residual(model: &SystemModel, sigma: &Matrix) -> Result<f64> {
    if sigma.shape() != (model.n(), model.n()) {
        return Err(Error::Dimension("Σ must be n×n".into()));
    }
    if !linops::is_positive_definite(sigma, 0.0)? {
        return Err(Error::Domain("Σ is not positive definite".into()));
    }
    let next = RiccatiMap::new(model)?.update(sigma)?.next;
    linops::largest_singular_value(&(sigma - next))
}

/// `e_k = σ̄(Σ_k − Σ)` for `k = 0..=t_max` with `Σ₀ = I`.
pub fn convergence_trace(model: &SystemModel, t_max: usize) -> Result<Vec<f64>> {
    let steady = solve_dare_default(model)?;
    convergence_trace_from(model, &steady, &Matrix::identity(model.n(), model.n()), t_max)
}

/// Same as [`convergence_trace`] from an arbitrary positive definite start.
///
/// The deviation `Δ_k = Σ_k − Σ` is propagated through the exact error
/// recursion `Δ_{k+1} = (A − K_kC) Δ_k (A − K̄C)ᵀ`, where `K_k` is the gain
/// at `Σ_k = Σ + Δ_k`. This keeps full relative precision in `Δ_k` long after
/// the direct difference of iterates has hit the roundoff floor.
pub fn convergence_trace_from(
    model: &SystemModel,
    steady: &SteadySummary,
    start: &Matrix,
    t_max: usize,
) -> Result<Vec<f64>> {
    if start.shape() != (model.n(), model.n()) {
        return Err(Error::Dimension("start must be n×n".into()));
    }
    let map = RiccatiMap::new(model)?;
    let h_t = steady.h.transpose();
    let mut delta = linops::symmetrize(&(start - &steady.sigma_ss));
    let mut trace = Vec::with_capacity(t_max + 1);
    trace.push(linops::largest_singular_value(&delta)?);
    for _ in 0..t_max {
        let sigma_k = &steady.sigma_ss + &delta;
        let h_k = model.a() - map.gain(&sigma_k)? * model.c();
        delta = linops::symmetrize(&(h_k * &delta * &h_t));
        trace.push(linops::largest_singular_value(&delta)?);
    }
    Ok(trace)
}
