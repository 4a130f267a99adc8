//! The player's side of the prediction game: a Kalman predictor started at
//! `x̂₀ = 0`, `Σ₀ = I`.

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::linops::{Matrix, Vector};
use crate::model::SystemModel;
use crate::riccati::RiccatiMap;

#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub t: usize,
    pub xhat: Vector,
    pub sigma: Matrix,
    /// Cumulative loss `L_t`.
    pub cum_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub y: Vector,
    pub yhat: Vector,
    pub loss: f64,
    pub gain: Matrix,
}

/// Filter bound to one model. Holds the Cholesky factor of `V` used for the
/// loss and the precomputed Riccati map.
#[derive(Debug, Clone)]
pub struct GameFilter<'m> {
    model: &'m SystemModel,
    map: RiccatiMap,
    v_chol: Cholesky<f64, nalgebra::Dyn>,
}

impl<'m> GameFilter<'m> {
    pub fn new(model: &'m SystemModel) -> Result<Self> {
        let v_chol = Cholesky::new(model.v().clone())
            .ok_or_else(|| Error::InvalidModel("V is not positive definite".into()))?;
        Ok(Self {
            model,
            map: RiccatiMap::new(model)?,
            v_chol,
        })
    }

    pub fn model(&self) -> &SystemModel {
        self.model
    }

    pub fn init(&self) -> FilterState {
        let n = self.model.n();
        FilterState {
            t: 0,
            xhat: Vector::zeros(n),
            sigma: Matrix::identity(n, n),
            cum_loss: 0.0,
        }
    }

    pub fn predict(&self, state: &FilterState) -> Vector {
        self.model.c() * &state.xhat
    }

    /// `‖e‖²_{V⁻¹}` through the Cholesky factor of `V`.
    pub fn loss(&self, innovation: &Vector) -> f64 {
        let z = self
            .v_chol
            .l_dirty()
            .solve_lower_triangular(innovation)
            .expect("Cholesky factor has a nonzero diagonal");
        z.norm_squared()
    }

    /// One round: predict, observe `y`, incur the loss, update.
    pub fn step(&self, state: &FilterState, y: &Vector) -> Result<(FilterState, StepRecord)> {
        if y.len() != self.model.p() {
            return Err(Error::Dimension(format!(
                "observation has length {}, expected {}",
                y.len(),
                self.model.p()
            )));
        }
        let yhat = self.predict(state);
        let innovation = y - &yhat;
        let loss = self.loss(&innovation);
        let update = self.map.update(&state.sigma)?;
        let xhat = self.model.a() * &state.xhat + &update.gain * &innovation;
        let next = FilterState {
            t: state.t + 1,
            xhat,
            sigma: update.next,
            cum_loss: state.cum_loss + loss,
        };
        let record = StepRecord {
            t: state.t,
            y: y.clone(),
            yhat,
            loss,
            gain: update.gain,
        };
        Ok((next, record))
    }

    pub fn run<'y>(&self, observations: impl IntoIterator<Item = &'y Vector>) -> Result<(FilterState, Vec<StepRecord>)> {
        let mut state = self.init();
        let mut records = Vec::new();
        for y in observations {
            let (next, rec) = self.step(&state, y)?;
            state = next;
            records.push(rec);
        }
        Ok((state, records))
    }
}

/// Runs the filter from its initial state over `observations`.
pub fn run(model: &SystemModel, observations: &[Vector]) -> Result<(FilterState, Vec<StepRecord>)> {
    GameFilter::new(model)?.run(observations)
}
