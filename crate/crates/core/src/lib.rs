//! Game-theoretic Kalman filter and worst-case loss certificates.
//!
//! The filter plays an online prediction game against an arbitrary observation
//! stream. Given any comparator state sequence, the [`bounds`] module turns the
//! steady-state Riccati solution into explicit upper bounds on the filter's
//! cumulative prediction loss, and the [`experiment`] module drives seeded
//! simulations that check those bounds end to end.

pub mod bounds;
pub mod drift;
pub mod error;
pub mod experiment;
pub mod filter;
pub mod linops;
pub mod model;
pub mod riccati;

pub use bounds::{BoundConstants, BoundReport, ComparatorTotals, ComparatorTrace};
pub use drift::{DriftRegime, DriftSpec, GeneratedRun, ObservationNoise};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, Simulation, SummaryRow, SystemSource};
pub use filter::{FilterState, GameFilter, StepRecord};
pub use linops::{Matrix, Vector};
pub use model::{StructureReport, SystemModel};
pub use riccati::{RiccatiMap, SteadySummary};
