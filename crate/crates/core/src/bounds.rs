//! Worst-case cumulative loss certificates.
//!
//! Given the steady-state filter, [`constants`] derives the scalars that enter
//! every bound. A [`ComparatorTrace`] accumulates the comparator loss `V_T`
//! and total drift `W_T` of an arbitrary reference sequence `x̄_0..x̄_T`.
//! [`bound_b1`] is the drift-tracking bound built from the closed-loop error
//! dynamics and [`bound_b3`] the bound derived from the H∞ norm of the
//! filter. [`bound_b1`] needs `σ̄(H) < 1`; [`bound_b3`] only needs `r̄`.

use crate::error::{Error, Result};
use crate::linops::{self, Matrix, Vector};
use crate::model::SystemModel;
use crate::riccati::SteadySummary;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    /// `σ̄(V^{-1/2}(V + CΣCᵀ)V^{-1/2})`
    pub r_bar: f64,
    /// `σ̄(Σ⁻¹)`
    pub a: f64,
    /// `1/(1 − σ̄²(H))`, absent when `σ̄(H) ≥ 1`.
    pub b: Option<f64>,
    /// `(1 + σ̄²(H))/(1 − σ̄²(H))³`, absent when `σ̄(H) ≥ 1`.
    pub c: Option<f64>,
    /// `σ̄(K̄ᵀK̄)`
    pub sigma_kk: f64,
    /// `σ̄(Q⁻¹)`
    pub sigma_qinv: f64,
}

impl BoundConstants {
    pub fn b1_applicable(&self) -> bool {
        self.b.is_some() && self.c.is_some()
    }

    fn bc(&self) -> Result<(f64, f64)> {
        match (self.b, self.c) {
            (Some(b), Some(c)) => Ok((b, c)),
            _ => Err(Error::Inapplicable(
                "closed loop has σ̄(H) ≥ 1, so b and c are undefined".into(),
            )),
        }
    }
}

pub fn constants(model: &SystemModel, ss: &SteadySummary) -> Result<BoundConstants> {
    let n = model.n();
    if ss.sigma_ss.shape() != (n, n) {
        return Err(Error::Dimension("steady-state Σ does not match the model".into()));
    }
    let v_isqrt = linops::sym_inv_sqrt(model.v())?;
    let inner = model.v() + model.c() * &ss.sigma_ss * model.c().transpose();
    let r_bar = linops::largest_singular_value(&linops::symmetrize(&(&v_isqrt * inner * &v_isqrt)))?;

    // σ̄(Σ⁻¹) = 1/λ_min(Σ) for symmetric positive definite Σ
    let sigma_min = linops::min_symmetric_eigenvalue(&ss.sigma_ss);
    let q_min = linops::min_symmetric_eigenvalue(model.q());
    if sigma_min <= 0.0 || q_min <= 0.0 {
        return Err(Error::Domain("Σ and Q must be positive definite".into()));
    }

    let (b, c) = if ss.sigma_h < 1.0 {
        let s2 = ss.sigma_h * ss.sigma_h;
        (Some(1.0 / (1.0 - s2)), Some((1.0 + s2) / (1.0 - s2).powi(3)))
    } else {
        (None, None)
    };

    Ok(BoundConstants {
        r_bar,
        a: 1.0 / sigma_min,
        b,
        c,
        sigma_kk: linops::largest_singular_value(&(ss.k_ss.transpose() * &ss.k_ss))?,
        sigma_qinv: 1.0 / q_min,
    })
}

/// Scalar accumulators of a comparator against an observation stream.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ComparatorTotals {
    /// Comparator loss `V_T = Σ ‖y_t − C x̄_t‖²_{V⁻¹}`.
    pub v_t: f64,
    /// Total drift `W_T = Σ ‖x̄_{t+1} − A x̄_t‖²`.
    pub w_t: f64,
    pub xbar0_normsq: f64,
}

impl ComparatorTotals {
    pub fn new(xbar0_normsq: f64) -> Self {
        Self {
            xbar0_normsq,
            ..Self::default()
        }
    }

    pub fn push(&mut self, loss: f64, drift: f64) {
        self.v_t += loss;
        self.w_t += drift;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparatorTrace {
    pub xbar: Vec<Vector>,
    pub totals: ComparatorTotals,
}

impl ComparatorTrace {
    pub fn v_t(&self) -> f64 {
        self.totals.v_t
    }

    pub fn w_t(&self) -> f64 {
        self.totals.w_t
    }

    pub fn xbar0_normsq(&self) -> f64 {
        self.totals.xbar0_normsq
    }
}

/// Per-round comparator quantities for a model, with `V⁻¹` formed once.
#[derive(Debug, Clone)]
pub struct ComparatorScorer<'m> {
    model: &'m SystemModel,
    v_inv: Matrix,
}

impl<'m> ComparatorScorer<'m> {
    pub fn new(model: &'m SystemModel) -> Result<Self> {
        let v_inv = linops::symmetrize(
            &model
                .v()
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::InvalidModel("V is singular".into()))?,
        );
        Ok(Self { model, v_inv })
    }

    /// `‖y − C x̄‖²_{V⁻¹}`
    pub fn loss(&self, xbar: &Vector, y: &Vector) -> Result<f64> {
        self.check(xbar)?;
        linops::weighted_norm_sq(&(y - self.model.c() * xbar), &self.v_inv)
    }

    /// `‖x̄_next − A x̄‖²`
    pub fn drift(&self, xbar: &Vector, xbar_next: &Vector) -> Result<f64> {
        self.check(xbar)?;
        self.check(xbar_next)?;
        Ok((xbar_next - self.model.a() * xbar).norm_squared())
    }

    fn check(&self, x: &Vector) -> Result<()> {
        if x.len() == self.model.n() {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "comparator state has length {}, expected {}",
                x.len(),
                self.model.n()
            )))
        }
    }
}

/// Accumulates `V_T`, `W_T` and `‖x̄_0‖²` for a comparator with `T + 1` states
/// against `T` observations.
pub fn accumulate_comparator(model: &SystemModel, xbar: &[Vector], observations: &[Vector]) -> Result<ComparatorTrace> {
    if xbar.len() != observations.len() + 1 {
        return Err(Error::Dimension(format!(
            "comparator needs {} states for {} observations, got {}",
            observations.len() + 1,
            observations.len(),
            xbar.len()
        )));
    }
    let scorer = ComparatorScorer::new(model)?;
    let mut totals = ComparatorTotals::new(xbar[0].norm_squared());
    for (t, y) in observations.iter().enumerate() {
        if y.len() != model.p() {
            return Err(Error::Dimension(format!("observation {t} has length {}", y.len())));
        }
        totals.push(scorer.loss(&xbar[t], y)?, scorer.drift(&xbar[t], &xbar[t + 1])?);
    }
    Ok(ComparatorTrace {
        xbar: xbar.to_vec(),
        totals,
    })
}

/// `X̃_T = Σ_{t<T} ‖x̄_t − x̂_t‖²` for a known comparator.
pub fn cumulative_state_error(xbar: &[Vector], xhat: &[Vector]) -> Result<f64> {
    if xbar.len() < xhat.len() {
        return Err(Error::Dimension("more estimates than comparator states".into()));
    }
    Ok(xbar.iter().zip(xhat).map(|(a, b)| (a - b).norm_squared()).sum())
}

fn positive(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("α must be a positive finite number, got {alpha}")))
    }
}

/// Parametric bound `r̄V_T + r̄‖x̄_0‖² + r̄a(X̃_T/α + αW_T)`.
pub fn parametric_bound(k: &BoundConstants, totals: &ComparatorTotals, xtilde_cum: f64, alpha: f64) -> Result<f64> {
    positive(alpha)?;
    Ok(k.r_bar * totals.v_t + k.r_bar * totals.xbar0_normsq + k.r_bar * k.a * (xtilde_cum / alpha + alpha * totals.w_t))
}

/// `2b‖x̄_0‖² + 8c(W_T + σ̄(K̄ᵀK̄)V_T)`, an upper bound on `X̃_T`.
pub fn xtilde_cum_bound(k: &BoundConstants, totals: &ComparatorTotals) -> Result<f64> {
    let (b, c) = k.bc()?;
    Ok(2.0 * b * totals.xbar0_normsq + 8.0 * c * (totals.w_t + k.sigma_kk * totals.v_t))
}

/// Drift-tracking bound and the `α` at which the parametric bound attains it.
/// With `W_T = 0` the drift term vanishes and `α* = +∞`.
pub fn bound_b1(k: &BoundConstants, totals: &ComparatorTotals) -> Result<(f64, f64)> {
    let (b, c) = k.bc()?;
    let inner = b * totals.xbar0_normsq + 4.0 * c * (totals.w_t + k.sigma_kk * totals.v_t);
    let base = k.r_bar * totals.v_t + k.r_bar * totals.xbar0_normsq;
    if totals.w_t == 0.0 {
        return Ok((base, f64::INFINITY));
    }
    let value = base + 2.0 * k.r_bar * k.a * (2.0 * totals.w_t * inner).sqrt();
    let alpha = (2.0 * inner / totals.w_t).sqrt();
    Ok((value, alpha))
}

/// Bound derived from the H∞ norm of the filter, with the `α` that attains
/// it. With `V_T = 0` the cross term vanishes and `α = 0`.
pub fn bound_b3(k: &BoundConstants, totals: &ComparatorTotals) -> (f64, f64) {
    let g = k.r_bar.sqrt() + 1.0;
    let g2 = g * g;
    let energy = totals.xbar0_normsq + totals.v_t + k.sigma_qinv * totals.w_t;
    let value = (1.0 + g2) * totals.v_t
        + g2 * totals.xbar0_normsq
        + g2 * k.sigma_qinv * totals.w_t
        + 2.0 * g * (totals.v_t * energy).sqrt();
    let alpha = if totals.v_t == 0.0 {
        0.0
    } else {
        (totals.v_t / (g2 * energy)).sqrt()
    };
    (value, alpha)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub l_t: f64,
    pub v_t: f64,
    pub w_t: f64,
    /// `NaN` when not applicable.
    pub b1: f64,
    pub b3: f64,
    pub alpha_b1: f64,
    pub alpha_b3: f64,
    pub applicable_b1: bool,
}

/// Certifies a realized cumulative loss against both bounds.
pub fn certify(k: &BoundConstants, totals: &ComparatorTotals, l_t: f64) -> BoundReport {
    let (b1, alpha_b1) = bound_b1(k, totals).unwrap_or((f64::NAN, f64::NAN));
    let (b3, alpha_b3) = bound_b3(k, totals);
    BoundReport {
        l_t,
        v_t: totals.v_t,
        w_t: totals.w_t,
        b1,
        b3,
        alpha_b1,
        alpha_b3,
        applicable_b1: k.b1_applicable(),
    }
}

/// `(1 + 1/α)aᵀMa + (1 + α)bᵀMb`, which dominates `(a + b)ᵀM(a + b)`.
pub fn split_bound(a_vec: &Vector, b_vec: &Vector, m: &Matrix, alpha: f64) -> Result<f64> {
    positive(alpha)?;
    if a_vec.len() != b_vec.len() {
        return Err(Error::Dimension("vectors differ in length".into()));
    }
    if !linops::is_positive_definite(m, 0.0)? {
        return Err(Error::Domain("weight must be symmetric positive definite".into()));
    }
    Ok((1.0 + 1.0 / alpha) * linops::weighted_norm_sq(a_vec, m)? + (1.0 + alpha) * linops::weighted_norm_sq(b_vec, m)?)
}

/// `inf_{ξ>0} a/ξ + ξb = 2√(ab)`, attained at `ξ* = √(a/b)`.
pub fn reciprocal_infimum(a: f64, b: f64) -> Result<(f64, f64)> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!("need a, b > 0, got a = {a}, b = {b}")));
    }
    Ok((2.0 * (a * b).sqrt(), (a / b).sqrt()))
}

/// Partial sum `Σ_{k<t} (k+1)² s^k` and its closed-form limit `(1+s)/(1−s)³`.
pub fn polylog_bound(s: f64, t: usize) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::Domain(format!("need 0 ≤ s < 1, got {s}")));
    }
    let mut sum = 0.0;
    let mut pow = 1.0;
    for k in 0..t {
        let w = (k + 1) as f64;
        sum += w * w * pow;
        pow *= s;
    }
    Ok((sum, (1.0 + s) / (1.0 - s).powi(3)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riccati::solve_dare_default;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // scalar A = 0.5, C = 1, Q = 0.5, V = 1 worked by hand from the DARE root
    struct ScalarOracle {
        sigma: f64,
        k: f64,
        h: f64,
    }

    fn oracle() -> ScalarOracle {
        let sigma = (-0.25 + 2.0625f64.sqrt()) / 2.0;
        let k = 0.5 * sigma / (1.0 + sigma);
        ScalarOracle { sigma, k, h: 0.5 - k }
    }

    fn scalar_model(c: f64) -> SystemModel {
        SystemModel::from_rows(1, 1, &[0.5], &[c], &[0.5], &[1.0]).unwrap()
    }

    fn scalar_constants() -> BoundConstants {
        let m = scalar_model(1.0);
        constants(&m, &solve_dare_default(&m).unwrap()).unwrap()
    }

    fn totals(v_t: f64, w_t: f64, x0: f64) -> ComparatorTotals {
        ComparatorTotals { v_t, w_t, xbar0_normsq: x0 }
    }

    #[test]
    fn scalar_constants_match_oracle() {
        let o = oracle();
        let k = scalar_constants();
        let h2 = o.h * o.h;
        assert_relative_eq!(k.r_bar, 1.0 + o.sigma, max_relative = 1e-10);
        assert_relative_eq!(k.a, 1.0 / o.sigma, max_relative = 1e-10);
        assert_relative_eq!(k.b.unwrap(), 1.0 / (1.0 - h2), max_relative = 1e-10);
        assert_relative_eq!(k.c.unwrap(), (1.0 + h2) / (1.0 - h2).powi(3), max_relative = 1e-10);
        assert_relative_eq!(k.sigma_kk, o.k * o.k, max_relative = 1e-10);
        assert_relative_eq!(k.sigma_qinv, 2.0, max_relative = 1e-12);
        // frozen from an independent scalar script
        assert_relative_eq!(k.r_bar, 1.593070330817254, epsilon = 1e-12);
        assert_relative_eq!(k.a, 1.686140661634507, epsilon = 1e-12);
        assert_relative_eq!(k.b.unwrap(), 1.109271795844943, epsilon = 1e-12);
        assert_relative_eq!(k.c.unwrap(), 1.499398291807353, epsilon = 1e-12);
    }

    #[test]
    fn unobserved_scalar_constants() {
        let m = scalar_model(0.0);
        let k = constants(&m, &solve_dare_default(&m).unwrap()).unwrap();
        assert_relative_eq!(k.r_bar, 1.0, epsilon = 1e-12);
        assert_relative_eq!(k.a, 1.5, epsilon = 1e-10);
        assert_relative_eq!(k.b.unwrap(), 4.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(k.c.unwrap(), 1.25 / 0.75f64.powi(3), epsilon = 1e-12);
        assert_relative_eq!(k.c.unwrap(), 2.962963, epsilon = 1e-6);
    }

    #[test]
    fn r_bar_ignores_scaled_v_without_observations() {
        for gamma in [0.1, 1.0, 7.5] {
            let m = SystemModel::from_rows(2, 2, &[0.5, 0.0, 0.1, 0.3], &[0.0; 4], &[0.5, 0.0, 0.0, 0.5], &[gamma, 0.0, 0.0, gamma])
                .unwrap();
            let k = constants(&m, &solve_dare_default(&m).unwrap()).unwrap();
            assert_relative_eq!(k.r_bar, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn inapplicable_when_closed_loop_norm_exceeds_one() {
        let m = scalar_model(1.0);
        let mut ss = solve_dare_default(&m).unwrap();
        ss.sigma_h = 1.2;
        let k = constants(&m, &ss).unwrap();
        assert!(!k.b1_applicable());
        assert!(matches!(bound_b1(&k, &totals(1.0, 1.0, 0.0)), Err(Error::Inapplicable(_))));
        assert!(matches!(xtilde_cum_bound(&k, &totals(1.0, 1.0, 0.0)), Err(Error::Inapplicable(_))));
        let r = certify(&k, &totals(1.0, 1.0, 0.0), 0.5);
        assert!(r.b1.is_nan() && !r.applicable_b1);
        assert!(r.b3.is_finite());
    }

    #[test]
    fn comparator_accumulation() {
        let m = scalar_model(1.0);
        let v = |x: f64| Vector::from_element(1, x);
        let tr = accumulate_comparator(&m, &[v(0.0), v(0.0), v(0.0)], &[v(0.0), v(0.0)]).unwrap();
        assert_eq!((tr.v_t(), tr.w_t()), (0.0, 0.0));

        let tr = accumulate_comparator(&m, &[v(1.0), v(1.0), v(1.0)], &[v(1.0), v(1.0)]).unwrap();
        assert_relative_eq!(tr.w_t(), 0.5);
        assert_eq!(tr.v_t(), 0.0);
        assert_eq!(tr.xbar0_normsq(), 1.0);

        let follow: Vec<_> = (0..5).map(|t| v(0.5f64.powi(t))).collect();
        let tr = accumulate_comparator(&m, &follow, &vec![v(3.0); 4]).unwrap();
        assert_eq!(tr.w_t(), 0.0);

        assert!(matches!(
            accumulate_comparator(&m, &[v(0.0)], &[v(0.0)]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn parametric_examples() {
        let k = scalar_constants();
        assert_eq!(parametric_bound(&k, &totals(0.0, 0.0, 0.0), 0.0, 1.0).unwrap(), 0.0);
        let unit = BoundConstants { r_bar: 1.5, ..k };
        for alpha in [0.1, 1.0, 10.0] {
            assert_relative_eq!(parametric_bound(&unit, &totals(1.0, 0.0, 0.0), 0.0, alpha).unwrap(), 1.5);
        }
        let got = parametric_bound(&k, &totals(1.0, 0.5, 1.0), 2.0, 2.0).unwrap();
        let expect = 2.0 * k.r_bar + k.r_bar * k.a * (2.0 / 2.0 + 2.0 * 0.5);
        assert_relative_eq!(got, expect, max_relative = 1e-14);
        assert_relative_eq!(got, 8.558421984903521, epsilon = 1e-12);
        assert!(matches!(
            parametric_bound(&k, &totals(1.0, 0.5, 1.0), 2.0, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn xtilde_bound_examples() {
        let k = scalar_constants();
        assert_eq!(xtilde_cum_bound(&k, &totals(0.0, 0.0, 0.0)).unwrap(), 0.0);
        let k43 = BoundConstants { b: Some(4.0 / 3.0), ..k };
        assert_relative_eq!(xtilde_cum_bound(&k43, &totals(0.0, 0.0, 1.0)).unwrap(), 8.0 / 3.0);
        let got = xtilde_cum_bound(&k, &totals(1.0, 0.5, 1.0)).unwrap();
        assert_relative_eq!(got, 8.631750124335298, epsilon = 1e-12);
    }

    #[test]
    fn b1_examples() {
        let k = scalar_constants();
        assert_eq!(bound_b1(&k, &totals(0.0, 0.0, 0.0)).unwrap().0, 0.0);
        let (v, alpha) = bound_b1(&k, &totals(1.0, 0.0, 0.7)).unwrap();
        assert_relative_eq!(v, k.r_bar * 1.7, max_relative = 1e-14);
        assert!(alpha.is_infinite());

        let (v, alpha) = bound_b1(&k, &totals(1.0, 0.5, 1.0)).unwrap();
        let (b, c) = (k.b.unwrap(), k.c.unwrap());
        let inner = b + 4.0 * c * (0.5 + k.sigma_kk);
        let expect = 2.0 * k.r_bar + 2.0 * k.r_bar * k.a * (2.0 * 0.5 * inner).sqrt();
        assert_relative_eq!(v, expect, max_relative = 1e-14);
        assert_relative_eq!(v, 14.346885487790336, epsilon = 1e-12);
        assert!(alpha > 0.0 && alpha.is_finite());
    }

    #[test]
    fn b1_equals_parametric_bound_at_optimal_alpha() {
        let k = scalar_constants();
        for t in [totals(1.0, 0.5, 1.0), totals(40.0, 3.0, 0.0), totals(0.0, 0.01, 2.0)] {
            let xt = xtilde_cum_bound(&k, &t).unwrap();
            let (b1, alpha) = bound_b1(&k, &t).unwrap();
            let at_opt = parametric_bound(&k, &t, xt, alpha).unwrap();
            assert_relative_eq!(b1, at_opt, max_relative = 1e-12);
            // grid never beats it
            for i in 0..=400 {
                let a = alpha * 10f64.powf(-2.0 + i as f64 / 100.0);
                assert!(parametric_bound(&k, &t, xt, a).unwrap() >= b1 * (1.0 - 1e-9));
            }
        }
    }

    #[test]
    fn b3_examples() {
        let k = scalar_constants();
        assert_eq!(bound_b3(&k, &totals(0.0, 0.0, 0.0)).0, 0.0);
        let (v, alpha) = bound_b3(&k, &totals(0.0, 0.0, 1.0));
        assert_relative_eq!(v, (k.r_bar.sqrt() + 1.0).powi(2), max_relative = 1e-14);
        assert_relative_eq!(v, 5.117408129779392, epsilon = 1e-12);
        assert_eq!(alpha, 0.0);
        let (v, alpha) = bound_b3(&k, &totals(1.0, 0.5, 1.0));
        assert_relative_eq!(v, 24.188607327744943, epsilon = 1e-12);
        // same value from the α-parametrized form
        let g2 = (k.r_bar.sqrt() + 1.0).powi(2);
        let energy = 1.0 + 1.0 + 2.0 * 0.5;
        let para = (1.0 + 1.0 / alpha) * 1.0 + (1.0 + alpha) * g2 * energy;
        assert_relative_eq!(v, para, max_relative = 1e-12);
    }

    #[test]
    fn split_examples() {
        let i2 = Matrix::identity(2, 2);
        let a = Vector::from_vec(vec![1.0, 0.0]);
        let b = Vector::from_vec(vec![0.0, 1.0]);
        assert_relative_eq!(split_bound(&a, &b, &i2, 2.0).unwrap(), 4.5);
        assert_relative_eq!(split_bound(&a, &a, &i2, 1.0).unwrap(), 4.0);
        let z = Vector::zeros(2);
        assert!(split_bound(&a, &z, &i2, 0.3).unwrap() >= 1.0);
        assert!(matches!(split_bound(&a, &b, &i2, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn reciprocal_infimum_examples() {
        assert_eq!(reciprocal_infimum(1.0, 1.0).unwrap(), (2.0, 1.0));
        assert_eq!(reciprocal_infimum(4.0, 1.0).unwrap(), (4.0, 2.0));
        assert_eq!(reciprocal_infimum(2.0, 0.5).unwrap(), (2.0, 2.0));
        assert!(reciprocal_infimum(0.0, 1.0).is_err());
        assert!(reciprocal_infimum(1.0, -1.0).is_err());
    }

    #[test]
    fn polylog_examples() {
        for t in [1, 5, 100] {
            assert_eq!(polylog_bound(0.0, t).unwrap(), (1.0, 1.0));
        }
        assert_eq!(polylog_bound(0.5, 3).unwrap(), (5.25, 12.0));
        let (sum, bound) = polylog_bound(0.9, 200).unwrap();
        let brute: f64 = (0..200).map(|k| ((k + 1) as f64).powi(2) * 0.9f64.powi(k)).sum();
        assert_relative_eq!(sum, brute, max_relative = 1e-12);
        assert_relative_eq!(bound, 1900.0, max_relative = 1e-12);
        assert!(sum <= bound);
        assert!(polylog_bound(1.0, 3).is_err());
    }

    fn spd(n: usize) -> impl Strategy<Value = Matrix> {
        prop::collection::vec(-2.0f64..2.0, n * n).prop_map(move |v| {
            let b = Matrix::from_vec(n, n, v);
            linops::symmetrize(&(b.transpose() * b)) + Matrix::identity(n, n) * 0.05
        })
    }

    fn vec3() -> impl Strategy<Value = Vector> {
        prop::collection::vec(-5.0f64..5.0, 3).prop_map(Vector::from_vec)
    }

    proptest! {
        #[test]
        fn split_dominates(a in vec3(), b in vec3(), m in spd(3), log_alpha in -4.0f64..4.0) {
            let alpha = 10f64.powf(log_alpha);
            let lhs = linops::weighted_norm_sq(&(&a + &b), &m).unwrap();
            let rhs = split_bound(&a, &b, &m, alpha).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn reciprocal_infimum_is_attained(a in 1e-3f64..1e3, b in 1e-3f64..1e3) {
            let (value, xi) = reciprocal_infimum(a, b).unwrap();
            for i in 0..=200 {
                let x = xi * 10f64.powf(-2.0 + i as f64 / 50.0);
                prop_assert!(a / x + x * b >= value - 1e-9 * value);
            }
        }

        #[test]
        fn polylog_monotone_and_bounded(s in 0.0f64..0.95, t in 1usize..300) {
            let (prev, _) = polylog_bound(s, t - 1).unwrap();
            let (sum, bound) = polylog_bound(s, t).unwrap();
            prop_assert!(sum >= prev);
            prop_assert!(sum <= bound * (1.0 + 1e-12));
        }

        #[test]
        fn bounds_monotone_in_accumulators(
            v in 0.0f64..100.0, w in 0.0f64..100.0, x0 in 0.0f64..10.0,
            dv in 0.0f64..10.0, dw in 0.0f64..10.0,
        ) {
            let k = scalar_constants();
            let lo = totals(v, w, x0);
            let hi = totals(v + dv, w + dw, x0);
            prop_assert!(bound_b1(&k, &hi).unwrap().0 >= bound_b1(&k, &lo).unwrap().0 * (1.0 - 1e-14));
            prop_assert!(bound_b3(&k, &hi).0 >= bound_b3(&k, &lo).0 * (1.0 - 1e-14));
        }
    }
}
