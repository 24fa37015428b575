//! Recomputes the calibration fixture used by the acceptance target.
//! Run with `cargo test --release -p edgecolor-harness --test pilot -- --ignored`.

mod common;

use common::{dense_k300, random_order_k51, Pilot, PilotEntry, PILOT_FIXTURE};
use edgecolor_harness::run_trials;
use edgecolor_harness::stats::wilson95;

const PILOT_SEED: u64 = 0x5EED_0001;

fn entry(trials: usize, events: usize) -> PilotEntry {
    PilotEntry {
        trials,
        master_seed: PILOT_SEED,
        events,
        rate: events as f64 / trials as f64,
        threshold: wilson95(events, trials).unwrap().1,
    }
}

#[test]
#[ignore]
fn recompute_pilot_fixture() {
    let dense = run_trials(&dense_k300(1000, PILOT_SEED), 0).unwrap();
    assert_eq!(dense.aggregate.errors, 0);
    let ro = run_trials(&random_order_k51(4000, PILOT_SEED), 0).unwrap();
    assert_eq!(ro.aggregate.errors, 0);
    let unbalanced = ro.trials.iter().filter(|t| t.balanced == Some(false)).count();
    let pilot = Pilot {
        dense_k300_failure: entry(1000, dense.aggregate.failures),
        random_order_k51_unbalanced: entry(4000, unbalanced),
    };
    let text = serde_json::to_string_pretty(&pilot).unwrap();
    std::fs::write(PILOT_FIXTURE, text + "\n").unwrap();
    println!("{pilot:?}");
}

#[test]
fn fixture_parses() {
    let p: Pilot = serde_json::from_str(&std::fs::read_to_string(PILOT_FIXTURE).unwrap()).unwrap();
    assert!(p.dense_k300_failure.threshold >= p.dense_k300_failure.rate);
    assert!(p.random_order_k51_unbalanced.threshold >= p.random_order_k51_unbalanced.rate);
}
