#![allow(dead_code)]

use edgecolor_harness::config::{BuilderSpec, ColorerSpec, ExperimentConfig, OrderSpec, PhaseKindSpec};

pub const PILOT_FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/pilot.json");

/// `K_300`, ε = 0.3, random greedy, random order.
pub fn dense_k300(trials: usize, master_seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(300, 299, 0.3, BuilderSpec::Complete { order: OrderSpec::Random });
    c.colorer = ColorerSpec::RandomGreedy;
    c.tracking.enabled = false;
    c.trials = trials;
    c.master_seed = master_seed;
    c
}

/// `K_51`, b = 5, random-order phases with scattered nulls.
pub fn random_order_k51(trials: usize, master_seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(51, 50, 0.3, BuilderSpec::Complete { order: OrderSpec::Random });
    c.phases = 5;
    c.phase_kind = PhaseKindSpec::RandomOrder;
    c.scatter_nulls = Some(true);
    c.colorer = ColorerSpec::RandomGreedy;
    c.tracking.enabled = false;
    c.trials = trials;
    c.master_seed = master_seed;
    c
}

#[derive(Debug, serde::Serialize, serde::Deserialize)]
pub struct PilotEntry {
    pub trials: usize,
    pub master_seed: u64,
    pub events: usize,
    pub rate: f64,
    /// Upper end of the 95% Wilson interval of the pilot rate.
    pub threshold: f64,
}

#[derive(Debug, serde::Serialize, serde::Deserialize)]
pub struct Pilot {
    pub dense_k300_failure: PilotEntry,
    pub random_order_k51_unbalanced: PilotEntry,
}
