//! Experiment runner, oracle suite, reports and plots for the edge-coloring
//! simulator.

pub mod config;
pub mod error;
pub mod output;
pub mod plot;
pub mod run;
pub mod stats;
pub mod verify;

pub use config::{BuilderSpec, ColorerSpec, Experiment, ExperimentConfig, OrderSpec, PhaseKindSpec};
pub use error::{HarnessError, Result};
pub use run::{run_trials, sweep, AggregateReport, Grid, SweepPoint, TrialReport, TrialSummary};
pub use verify::{verify, Level, VerifyReport};
