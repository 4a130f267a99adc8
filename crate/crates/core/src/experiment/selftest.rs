use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::Simulation;
use crate::bounds;
use crate::drift::DriftSpec;
use crate::error::Result;
use crate::filter::GameFilter;
use crate::linops::{self, Matrix, Vector};
use crate::model::{random_stable_system, SystemModel};
use crate::riccati;

#[derive(Debug, Clone, Copy, Default)]
pub struct SelftestOptions {
    /// Added to the scalar DARE solution before it is compared with the
    /// closed-form root. Nonzero values exercise the failure path.
    pub dare_perturbation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

fn check(name: &'static str, outcome: Result<(bool, String)>) -> Check {
    match outcome {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn scalar_dare(perturbation: f64) -> Result<(bool, String)> {
    let m = SystemModel::from_rows(1, 1, &[0.5], &[1.0], &[0.5], &[1.0])?;
    let s = riccati::solve_dare_default(&m)?;
    let root = (-0.25 + 2.0625f64.sqrt()) / 2.0;
    let sigma = s.sigma_ss[(0, 0)] + perturbation;
    let gain = 0.5 * root / (1.0 + root);
    let err = (sigma - root).abs().max((s.k_ss[(0, 0)] - gain).abs());
    Ok((err <= 1e-10, format!("Σ = {sigma:.12}, error {err:.1e}")))
}

fn quadratic_split(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..500 {
        let n = 3;
        let b = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let m = linops::symmetrize(&(b.transpose() * b)) + Matrix::identity(n, n) * 0.01;
        let x = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let alpha = 10f64.powf(rng.random_range(-3.0..3.0));
        let lhs = linops::weighted_norm_sq(&(&x + &y), &m)?;
        let rhs = bounds::split_bound(&x, &y, &m, alpha)?;
        worst = worst.max((lhs - rhs) / rhs.max(1e-300));
    }
    Ok((worst <= 1e-12, format!("worst relative excess {worst:.2e}")))
}

fn information_order() -> Result<(bool, String)> {
    let m = random_stable_system(4, 2, 11)?;
    let f = GameFilter::new(&m)?;
    let a_inv = m
        .a()
        .clone()
        .try_inverse()
        .ok_or_else(|| crate::Error::Numerical("A is singular".into()))?;
    let v_inv = m.v().clone().try_inverse().expect("V = I");
    let cvc = m.c().transpose() * v_inv * m.c();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut state = f.init();
    for _ in 0..30 {
        let y = Vector::from_fn(2, |_, _| rng.sample::<f64, _>(StandardNormal));
        let (next, _) = f.step(&state, &y)?;
        let lhs = linops::symmetrize(&next.sigma.clone().try_inverse().expect("Σ is positive definite"));
        let info = state.sigma.clone().try_inverse().expect("Σ is positive definite") + &cvc;
        let rhs = linops::symmetrize(&(a_inv.transpose() * info * &a_inv));
        if !linops::psd_leq(&lhs, &rhs, 1e-8 * (1.0 + rhs.amax()))? {
            return Ok((false, format!("order violated at t = {}", state.t)));
        }
        state = next;
    }
    Ok((true, "30 steps".into()))
}

fn reciprocal_infimum() -> Result<(bool, String)> {
    let (a, b) = (3.7, 0.42);
    let (value, xi) = bounds::reciprocal_infimum(a, b)?;
    let best = (0..1000)
        .map(|i| xi * 10f64.powf(-2.0 + 4.0 * i as f64 / 999.0))
        .map(|x| a / x + x * b)
        .fold(f64::INFINITY, f64::min);
    Ok((best >= value - 1e-9, format!("2√(ab) = {value:.6}, grid min {best:.6}")))
}

fn polylog() -> Result<(bool, String)> {
    for i in 0..10 {
        let s = i as f64 / 10.0;
        let (sum, bound) = bounds::polylog_bound(s, 500)?;
        if sum > bound * (1.0 + 1e-12) {
            return Ok((false, format!("s = {s}: {sum} > {bound}")));
        }
    }
    Ok((true, "s ∈ {0, 0.1, …, 0.9}".into()))
}

fn end_to_end() -> Result<(bool, String)> {
    let mut details = Vec::new();
    for spec in [DriftSpec::linear(1.0, 21), DriftSpec::sublinear(0.5, 21)] {
        let sim = Simulation::simulate(random_stable_system(3, 2, 21)?, &spec, 50, riccati::DEFAULT_TOL)?;
        let r = sim.report()?;
        if r.b3 < r.l_t || (r.applicable_b1 && r.b1 < r.l_t) {
            return Ok((false, format!("{:?}: L = {}, B1 = {}, B3 = {}", spec.regime, r.l_t, r.b1, r.b3)));
        }
        details.push(format!("{:?}: L = {:.3}, B1 = {:.3}, B3 = {:.3}", spec.regime, r.l_t, r.b1, r.b3));
    }
    Ok((true, details.join("; ")))
}

/// Runs the built-in numerical checks. Deterministic.
pub fn selftest(options: SelftestOptions) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f);
    SelftestReport {
        checks: vec![
            check("scalar-dare", scalar_dare(options.dare_perturbation)),
            check("quadratic-split", quadratic_split(&mut rng)),
            check("information-order", information_order()),
            check("reciprocal-infimum", reciprocal_infimum()),
            check("polylog", polylog()),
            check("end-to-end", end_to_end()),
        ],
    }
}
