//! Acceptance criteria, one line each. Run with
//! `cargo test --release -p edgecolor-harness --test acceptance`.

mod common;

use std::time::Instant;

use common::{dense_k300, random_order_k51, Pilot, PILOT_FIXTURE};
use edgecolor::analysis::{balance_failure_bound, freedman_bound};
use edgecolor::game::{rng_stream, Fault};
use edgecolor::instrument::{MartingaleTrace, TrackedSetFamily};
use edgecolor::oracle::gadget_failure_probability;
use edgecolor::phase::is_balanced;
use edgecolor::{ColorerKind, Exact, PhaseKind, Transcript};
use edgecolor_harness::config::{BuilderSpec, ColorerSpec, ExperimentConfig, OrderSpec};
use edgecolor_harness::output::csv_string;
use edgecolor_harness::run::TrialReport;
use edgecolor_harness::stats::proportion_se;
use edgecolor_harness::verify::{
    complete_run, decomposition_violations, detectors_vs_reconstruction, dp_vs_paths, equivalence_check,
    small_random_transcript,
};
use edgecolor_harness::{run_trials, Result};
use num_traits::ToPrimitive;
use rand::RngCore;

/// Dense-counter balance verdicts collected from every criterion.
#[derive(Default)]
struct BalanceLedger {
    checked: usize,
    unbalanced: Vec<String>,
}

impl BalanceLedger {
    fn transcript(&mut self, t: &Transcript, label: &str) {
        if t.config().phase_kind == PhaseKind::Dense {
            self.checked += 1;
            if !is_balanced(t, t.phases()).balanced {
                self.unbalanced.push(label.to_string());
            }
        }
    }

    fn report(&mut self, r: &TrialReport, config: &ExperimentConfig, label: &str) {
        if PhaseKind::from(config.phase_kind) == PhaseKind::Dense {
            for t in &r.trials {
                self.checked += 1;
                if t.balanced != Some(true) {
                    self.unbalanced.push(format!("{label} trial {}", t.trial));
                }
            }
        }
    }
}

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { passed, detail })
}

fn equivalence() -> Result<Verdict> {
    let s = equivalence_check(4, Fault::None)?;
    match s.first_mismatch {
        None => verdict(true, format!("{} schedules, {} exact comparisons", s.schedules, s.comparisons)),
        Some(m) => verdict(false, format!("mismatch at {m}")),
    }
}

fn gadget(balance: &mut BalanceLedger) -> Result<Verdict> {
    let mut c = ExperimentConfig::new(6, 3, 0.0, BuilderSpec::Gadget);
    c.gamma = Some(3);
    c.phases = 3;
    c.colorer = ColorerSpec::RandomGreedy;
    c.tracking.enabled = false;
    c.trials = 20_000;
    c.master_seed = 2;
    let r = run_trials(&c, 0)?;
    balance.report(&r, &c, "gadget");
    let oracle = gadget_failure_probability(3, 3)?.to_f64().expect("finite");
    let rate = r.aggregate.failure_rate.unwrap_or(f64::NAN);
    let ok = r.aggregate.errors == 0 && (rate - oracle).abs() <= 0.02;
    verdict(ok, format!("rate {rate:.4} vs oracle {oracle:.4} (±0.02), {} trials", r.aggregate.completed))
}

fn pigeonhole(balance: &mut BalanceLedger) -> Result<Verdict> {
    let cases = [
        ("K_20", ExperimentConfig::new(20, 19, 0.5, BuilderSpec::Complete { order: OrderSpec::Random })),
        ("gadget", ExperimentConfig::new(20, 10, 0.5, BuilderSpec::Gadget)),
        ("adaptive", ExperimentConfig::new(20, 10, 0.5, BuilderSpec::AdaptiveMinIntersection)),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, base) in cases {
        for colorer in [ColorerSpec::FirstFit, ColorerSpec::RandomGreedy] {
            let mut c = base.clone();
            c.gamma = Some(2 * c.delta - 1);
            c.colorer = colorer;
            c.tracking.enabled = false;
            c.trials = 1000;
            c.master_seed = 3;
            let r = run_trials(&c, 0)?;
            balance.report(&r, &c, name);
            ok &= r.aggregate.errors == 0 && r.aggregate.completed == 1000 && r.aggregate.failures == 0;
            parts.push(format!("{name}/{colorer:?} {}", r.aggregate.failures));
        }
    }
    verdict(ok, format!("failures: {}", parts.join(", ")))
}

fn decomposition(balance: &mut BalanceLedger) -> Result<Verdict> {
    let mut violations = 0;
    let mut triples = 0;
    for seed in 0..500 {
        let t = complete_run(60, 0.3, 10, ColorerKind::PhasePalette, seed)?;
        balance.transcript(&t, &format!("K_60 seed {seed}"));
        let family = TrackedSetFamily::random(t.palette_size(), 32, &mut rng_stream(seed, edgecolor::game::streams::TRACKING));
        let trace = MartingaleTrace::build(&t, &family);
        violations += decomposition_violations(&t, &trace)?;
        triples += t.n() * 32 * t.phases();
    }
    verdict(violations == 0, format!("{violations} violations over {triples} (v, r, S) triples in 500 runs"))
}

fn epsilon_hat_dp(balance: &mut BalanceLedger) -> Result<Verdict> {
    let zeta = Exact::new(1.into(), 1000.into());
    let mut max_edges = 0;
    for seed in 0..200 {
        let t = small_random_transcript(seed, 12)?;
        balance.transcript(&t, &format!("small seed {seed}"));
        max_edges = max_edges.max(t.outcomes().iter().filter(|o| !o.edge.is_null()).count());
        if let Some(why) = dp_vs_paths(&t, &zeta)? {
            return verdict(false, format!("seed {seed}: {why}"));
        }
    }
    verdict(true, format!("200 transcripts (up to {max_edges} edges): DP ≤ path bound, orders agree exactly"))
}

fn detectors(balance: &mut BalanceLedger) -> Result<Verdict> {
    use edgecolor::builders::{random_order, random_regular};
    let threshold = Exact::new(1.into(), 3.into());
    let mut pairs = 0;
    for seed in 0..100 {
        let g = random_regular(30, 15, seed)?;
        let config = edgecolor::GameConfig::new(30, 15, 0.3).with_phases(5).with_seed(seed);
        let t = edgecolor::run_game(&mut random_order(&g.edges, seed, config.steps(), false)?, &config)?;
        balance.transcript(&t, &format!("regular seed {seed}"));
        let mut family = TrackedSetFamily::random(t.palette_size(), 32, &mut rng_stream(seed, edgecolor::game::streams::TRACKING));
        for &(u, v) in &g.edges {
            family.add_pair(u, v);
        }
        pairs += family.pairs.len();
        let trace = MartingaleTrace::build(&t, &family);
        if let Some(why) = detectors_vs_reconstruction(&t, &trace, &threshold)? {
            return verdict(false, format!("seed {seed}: {why}"));
        }
    }
    verdict(true, format!("100 runs, 32 sets, {pairs} monitored pairs: exact agreement"))
}

fn freedman() -> Result<Verdict> {
    const TRIALS: usize = 10_000;
    const STEPS: usize = 10_000;
    let mut rng = rng_stream(8, 0);
    let mut sums = Vec::with_capacity(TRIALS);
    for _ in 0..TRIALS {
        let mut heads = 0i64;
        for _ in 0..STEPS / 64 {
            heads += i64::from(rng.next_u64().count_ones());
        }
        let rest = STEPS % 64;
        heads += i64::from((rng.next_u64() & ((1u64 << rest) - 1)).count_ones());
        sums.push(2 * heads - STEPS as i64);
    }
    let mut ok = true;
    let mut parts = Vec::new();
    for d in [100.0, 200.0, 300.0] {
        let hits = sums.iter().filter(|&&s| s as f64 >= d).count();
        let p = hits as f64 / TRIALS as f64;
        let se = proportion_se(p, TRIALS);
        let bound = freedman_bound(1.0, STEPS as f64, d)?;
        ok &= p <= bound + 3.0 * se;
        parts.push(format!("δ={d}: {p:.4} ≤ {bound:.4}+3·{se:.4}"));
    }
    verdict(ok, parts.join(", "))
}

fn dense_desk_scale(pilot: &Pilot) -> Result<Verdict> {
    let c = dense_k300(200, 9);
    let r = run_trials(&c, 0)?;
    let threshold = pilot.dense_k300_failure.threshold;
    let rate = r.aggregate.failure_rate.unwrap_or(f64::NAN);
    let ok = r.aggregate.errors == 0 && rate <= threshold;
    verdict(ok, format!("{} failures in {} trials, rate {rate:.4} ≤ pilot threshold {threshold:.4}", r.aggregate.failures, r.aggregate.completed))
}

fn random_order_balance(pilot: &Pilot) -> Result<Verdict> {
    let c = random_order_k51(2000, 10);
    let r = run_trials(&c, 0)?;
    let unbalanced = r.trials.iter().filter(|t| t.balanced == Some(false)).count();
    let p = unbalanced as f64 / 2000.0;
    let se = proportion_se(p, 2000);
    let bound = balance_failure_bound(50, 5);
    let slack = pilot.random_order_k51_unbalanced.threshold;
    let limit = bound.max(slack) + 3.0 * se;
    let ok = r.aggregate.errors == 0 && r.trials.iter().all(|t| t.balanced.is_some()) && p <= limit;
    verdict(ok, format!("unbalanced {p:.4} ≤ max(bound {bound:.4}, slack {slack:.4}) + 3·{se:.4}"))
}

fn determinism(balance: &mut BalanceLedger) -> Result<Verdict> {
    let mut c = ExperimentConfig::new(30, 15, 0.3, BuilderSpec::RandomRegular { graph_seed: None, order: OrderSpec::Random });
    c.trials = 64;
    c.master_seed = 11;
    let a = run_trials(&c, 8)?;
    let b = run_trials(&c, 8)?;
    let one = run_trials(&c, 1)?;
    balance.report(&one, &c, "determinism");
    let (a, b, one) = (csv_string(&a.trials)?, csv_string(&b.trials)?, csv_string(&one.trials)?);
    let ok = a == b && a == one && a.lines().count() == 65;
    verdict(ok, format!("{} bytes, 8/8/1 workers identical: {ok}", a.len()))
}

fn main() {
    let pilot: Pilot = serde_json::from_str(&std::fs::read_to_string(PILOT_FIXTURE).expect("pilot fixture"))
        .expect("pilot fixture parses");
    let mut balance = BalanceLedger::default();
    let mut failed = 0;
    let mut emit = |id: usize, name: &str, f: &mut dyn FnMut() -> Result<Verdict>| {
        let start = Instant::now();
        let v = f().unwrap_or_else(|e| Verdict {
            passed: false,
            detail: format!("error: {e}"),
        });
        let tag = if v.passed { "PASS" } else { "FAIL" };
        if !v.passed {
            failed += 1;
        }
        println!("[{tag}] {id} {name}: {} ({:.1}s)", v.detail, start.elapsed().as_secs_f64());
    };

    emit(1, "distribution equivalence", &mut equivalence);
    emit(2, "gadget failure rate", &mut || gadget(&mut balance));
    emit(3, "pigeonhole success", &mut || pigeonhole(&mut balance));
    emit(5, "decomposition inequality", &mut || decomposition(&mut balance));
    emit(6, "ε̂ DP vs path enumeration", &mut || epsilon_hat_dp(&mut balance));
    emit(7, "bad-event detector correctness", &mut || detectors(&mut balance));
    emit(8, "Freedman sanity", &mut freedman);
    emit(9, "dense desk-scale success", &mut || dense_desk_scale(&pilot));
    emit(10, "random-order balance rate", &mut || random_order_balance(&pilot));
    emit(11, "determinism", &mut || determinism(&mut balance));
    emit(4, "dense balance", &mut || {
        let ok = balance.unbalanced.is_empty() && balance.checked > 0;
        let first = balance.unbalanced.first().map_or(String::new(), |w| format!(", first: {w}"));
        verdict(ok, format!("{} dense transcripts checked, {} unbalanced{first}", balance.checked, balance.unbalanced.len()))
    });

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
