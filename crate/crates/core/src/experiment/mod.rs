//! Seeded end-to-end experiments: build a system, generate a drifting
//! comparator, run the filter and certify every prefix of the run.

mod config;
mod csv;
mod selftest;
mod sweep;

pub use config::{load_config, parse_config, parse_system_file, ExperimentConfig, SystemSource};
pub use csv::{emit_csv, parse_csv, write_csv, CSV_HEADER};
pub use selftest::{selftest, Check, SelftestOptions, SelftestReport};
pub use sweep::{sweep, SweepSummary};

use crate::bounds::{self, BoundConstants, BoundReport, ComparatorScorer, ComparatorTotals, ComparatorTrace};
use crate::drift::{self, DriftSpec, GeneratedRun};
use crate::error::Result;
use crate::filter::{FilterState, GameFilter, StepRecord};
use crate::linops::Vector;
use crate::model::{self, SystemModel};
use crate::riccati::{self, SteadySummary, DEFAULT_MAX_ITER};

/// One emitted CSV row: accumulators and both bounds at horizon `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub t: usize,
    pub l_t: f64,
    pub v_t: f64,
    pub w_t: f64,
    /// `NaN` when the drift-tracking bound is not applicable.
    pub b1: f64,
    pub b3: f64,
    /// `(L_t − V_t)/t`
    pub avg_loss_gap: f64,
}

/// A completed run with everything needed to certify it.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub model: SystemModel,
    pub steady: SteadySummary,
    pub constants: BoundConstants,
    pub generated: GeneratedRun,
    /// `x̂_0..x̂_T`
    pub estimates: Vec<Vector>,
    pub records: Vec<StepRecord>,
    pub final_state: FilterState,
}

impl Simulation {
    pub fn simulate(model: SystemModel, drift: &DriftSpec, t_rounds: usize, tol_dare: f64) -> Result<Self> {
        let steady = riccati::solve_dare(&model, tol_dare, DEFAULT_MAX_ITER)?;
        let constants = bounds::constants(&model, &steady)?;
        let generated = drift::generate(&model, drift, t_rounds)?;

        let filter = GameFilter::new(&model)?;
        let mut state = filter.init();
        let mut estimates = Vec::with_capacity(t_rounds + 1);
        let mut records = Vec::with_capacity(t_rounds);
        estimates.push(state.xhat.clone());
        for y in &generated.observations {
            let (next, rec) = filter.step(&state, y)?;
            estimates.push(next.xhat.clone());
            records.push(rec);
            state = next;
        }
        Ok(Self {
            model,
            steady,
            constants,
            generated,
            estimates,
            records,
            final_state: state,
        })
    }

    pub fn rounds(&self) -> usize {
        self.records.len()
    }

    pub fn l_t(&self) -> f64 {
        self.final_state.cum_loss
    }

    pub fn comparator_trace(&self) -> Result<ComparatorTrace> {
        bounds::accumulate_comparator(&self.model, &self.generated.xbar, &self.generated.observations)
    }

    /// True `X̃_T = Σ_{t<T} ‖x̄_t − x̂_t‖²`, known here because the comparator is.
    pub fn state_error_cum(&self) -> f64 {
        let t = self.rounds();
        bounds::cumulative_state_error(&self.generated.xbar[..t], &self.estimates[..t])
            .expect("estimates and comparator have equal length")
    }

    pub fn report(&self) -> Result<BoundReport> {
        let trace = self.comparator_trace()?;
        Ok(bounds::certify(&self.constants, &trace.totals, self.l_t()))
    }

    /// Rows at every `emit_every`-th round and at the final round, with the
    /// bounds evaluated on each prefix as its own horizon.
    pub fn summary_rows(&self, emit_every: usize) -> Result<Vec<SummaryRow>> {
        let emit_every = emit_every.max(1);
        let scorer = ComparatorScorer::new(&self.model)?;
        let xbar = &self.generated.xbar;
        let mut totals = ComparatorTotals::new(xbar[0].norm_squared());
        let mut rows = Vec::new();
        let mut l_t = 0.0;
        let last = self.rounds();
        for (i, rec) in self.records.iter().enumerate() {
            l_t += rec.loss;
            totals.push(scorer.loss(&xbar[i], &rec.y)?, scorer.drift(&xbar[i], &xbar[i + 1])?);
            let t = i + 1;
            if t % emit_every == 0 || t == last {
                let r = bounds::certify(&self.constants, &totals, l_t);
                rows.push(SummaryRow {
                    t,
                    l_t,
                    v_t: totals.v_t,
                    w_t: totals.w_t,
                    b1: r.b1,
                    b3: r.b3,
                    avg_loss_gap: (l_t - totals.v_t) / t as f64,
                });
            }
        }
        Ok(rows)
    }
}

pub fn build_model(source: &SystemSource) -> Result<SystemModel> {
    match source {
        SystemSource::Inline(m) => Ok(m.clone()),
        SystemSource::Seeded { n, p, system_seed } => model::random_stable_system(*n, *p, *system_seed),
    }
}

pub fn simulate_config(config: &ExperimentConfig) -> Result<Simulation> {
    config.check()?;
    let model = build_model(&config.system)?;
    Simulation::simulate(model, &config.drift, config.t_rounds, config.tol_dare)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<SummaryRow>> {
    simulate_config(config)?.summary_rows(config.emit_every)
}
