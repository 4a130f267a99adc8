//! Comparator sequences with linear or sublinear total drift, and the
//! observations they generate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linops::Vector;
use crate::model::SystemModel;

/// Angular step of the sublinear drift direction, in radians per round.
pub const ROTATION_STEP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftRegime {
    /// Constant per-step drift norm `delta`.
    Linear,
    /// Per-step squared drift `(t+1)^{-β}` along a rotating direction.
    Sublinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationNoise {
    UnitGaussian,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftSpec {
    pub regime: DriftRegime,
    pub delta: f64,
    pub beta: f64,
    pub noise_v: ObservationNoise,
    pub seed: u64,
}

fn default_delta() -> f64 {
    1.0
}

fn default_beta() -> f64 {
    0.5
}

fn default_noise() -> ObservationNoise {
    ObservationNoise::UnitGaussian
}

impl DriftSpec {
    pub fn linear(delta: f64, seed: u64) -> Self {
        Self {
            regime: DriftRegime::Linear,
            delta,
            beta: default_beta(),
            noise_v: default_noise(),
            seed,
        }
    }

    pub fn sublinear(beta: f64, seed: u64) -> Self {
        Self {
            regime: DriftRegime::Sublinear,
            delta: default_delta(),
            beta,
            noise_v: default_noise(),
            seed,
        }
    }

    pub fn with_noise(mut self, noise_v: ObservationNoise) -> Self {
        self.noise_v = noise_v;
        self
    }

    pub fn check(&self) -> Result<()> {
        match self.regime {
            DriftRegime::Linear if !(self.delta > 0.0 && self.delta.is_finite()) => {
                Err(Error::config("delta", "must be a positive finite number"))
            }
            DriftRegime::Sublinear if !(self.beta > 0.0 && self.beta.is_finite()) => {
                Err(Error::config("beta", "must be a positive finite number"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedRun {
    /// `x̄_0..x̄_T`
    pub xbar: Vec<Vector>,
    /// `w_t = x̄_{t+1} − A x̄_t`, length `T`
    pub w: Vec<Vector>,
    /// `y_t = C x̄_t + v_t`, length `T`
    pub observations: Vec<Vector>,
}

impl GeneratedRun {
    pub fn rounds(&self) -> usize {
        self.observations.len()
    }
}

/// Generates `t_rounds` rounds from `x̄_0 = 0`, deterministically per seed.
pub fn generate(model: &SystemModel, spec: &DriftSpec, t_rounds: usize) -> Result<GeneratedRun> {
    spec.check()?;
    if t_rounds == 0 {
        return Err(Error::config("t_rounds", "must be at least 1"));
    }
    let n = model.n();
    let p = model.p();
    if spec.regime == DriftRegime::Sublinear && n < 2 {
        return Err(Error::config("regime", "sublinear drift rotates in a plane and needs n ≥ 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut xbar = Vec::with_capacity(t_rounds + 1);
    let mut w = Vec::with_capacity(t_rounds);
    let mut observations = Vec::with_capacity(t_rounds);
    xbar.push(Vector::zeros(n));

    for t in 0..t_rounds {
        let step = match spec.regime {
            DriftRegime::Linear => loop {
                let g = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                let norm = g.norm();
                if norm > 0.0 {
                    break g * (spec.delta / norm);
                }
            },
            DriftRegime::Sublinear => {
                let magnitude = ((t + 1) as f64).powf(-spec.beta / 2.0);
                let theta = ROTATION_STEP * t as f64;
                let mut d = Vector::zeros(n);
                d[0] = magnitude * theta.cos();
                d[1] = magnitude * theta.sin();
                d
            }
        };
        let noise = match spec.noise_v {
            ObservationNoise::UnitGaussian => Vector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal)),
            ObservationNoise::None => Vector::zeros(p),
        };
        let current = &xbar[t];
        observations.push(model.c() * current + noise);
        let next = model.a() * current + &step;
        w.push(step);
        xbar.push(next);
    }
    Ok(GeneratedRun { xbar, w, observations })
}

/// Analytic upper budget on the total drift `W_T` of a spec.
pub fn drift_budget(spec: &DriftSpec, t_rounds: usize) -> f64 {
    let t = t_rounds as f64;
    match spec.regime {
        DriftRegime::Linear => t * spec.delta * spec.delta,
        DriftRegime::Sublinear if spec.beta == 1.0 => t.ln() + 1.0,
        DriftRegime::Sublinear => (t.powf(1.0 - spec.beta) - spec.beta) / (1.0 - spec.beta),
    }
}
