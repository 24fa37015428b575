//! The oracle suite behind `edgecolor verify` and the acceptance target.

use std::time::Instant;

use edgecolor::analysis::{epsilon_hat, path_bound, EvalOrder};
use edgecolor::builders::{complete_graph, gadget_tree, in_order, random_order, random_regular};
use edgecolor::game::{rng_stream, streams, Fault};
use edgecolor::instrument::{
    atypical_sums, decomposition_holds_exact, delta, detect_atypical, detect_d, detect_w, MartingaleTrace,
    TrackedSetFamily,
};
use edgecolor::oracle::{
    brute_force_delta, brute_force_max_window, config_for_schedule, exact_distribution_for, gadget_failure_probability,
    reference_greedy_distribution, Reconstruction, MAX_PALETTE,
};
use edgecolor::phase::is_balanced;
use edgecolor::{run_game, ColorerKind, EdgeEvent, Error, Exact, GameConfig, PhaseKind, Transcript, Vertex};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub level: Level,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// `Ok(None)` on success, `Ok(Some(reason))` on the first violation.
type Outcome = Result<Option<String>>;

fn check(name: &str, f: impl FnOnce() -> Outcome) -> CheckResult {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(None) => (true, "ok".to_string()),
        Ok(Some(why)) => (false, why),
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult {
        name: name.to_string(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Every ordered sequence of at most `max_edges` distinct edges of `K_4`.
pub fn in_cap_schedules(max_edges: usize) -> Vec<Vec<(Vertex, Vertex)>> {
    let k4: Vec<(Vertex, Vertex)> = (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v))).collect();
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_edges {
        let mut next = Vec::new();
        for s in &frontier {
            for &e in &k4 {
                if !s.contains(&e) {
                    let mut t: Vec<_> = s.clone();
                    t.push(e);
                    next.push(t);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivalenceSummary {
    pub schedules: usize,
    pub comparisons: usize,
    pub first_mismatch: Option<String>,
}

/// Compares the exact coloring law of the engine against the reference
/// greedy recursion for every schedule of at most `max_edges` edges on at
/// most 4 vertices, every `|Γ| ≤ 4`, both random colorers, `b = 1..=4` and
/// both phase counters. Stops at the first mismatch.
pub fn equivalence_check(max_edges: usize, fault: Fault) -> Result<EquivalenceSummary> {
    let schedules = in_cap_schedules(max_edges);
    let mut comparisons = 0;
    for s in &schedules {
        let events: Vec<EdgeEvent> = s.iter().map(|&(u, v)| EdgeEvent::Edge(u, v)).collect();
        for gamma in 1..=MAX_PALETTE {
            let reference = reference_greedy_distribution(s, gamma)?;
            let mut variants = vec![config_for_schedule(s, ColorerKind::RandomGreedy, gamma, 1)];
            for b in 1..=4 {
                for kind in [PhaseKind::Dense, PhaseKind::RandomOrder] {
                    let mut c = config_for_schedule(s, ColorerKind::PhasePalette, gamma, b).with_phase_kind(kind);
                    c.fault = fault;
                    variants.push(c);
                }
            }
            for c in variants {
                comparisons += 1;
                if exact_distribution_for(&c, &events)? != reference {
                    return Ok(EquivalenceSummary {
                        schedules: schedules.len(),
                        comparisons,
                        first_mismatch: Some(format!(
                            "schedule {s:?}, |Γ| = {gamma}, {:?}, b = {}, {:?}",
                            c.colorer, c.phases, c.phase_kind
                        )),
                    });
                }
            }
        }
    }
    Ok(EquivalenceSummary {
        schedules: schedules.len(),
        comparisons,
        first_mismatch: None,
    })
}

/// A random game on at most `max_edges` edges of a random graph with
/// 3 to 7 vertices, random `b ∈ 1..=min(4, 2Δ)` and phase counter, ε = 1/2.
pub fn small_random_transcript(seed: u64, max_edges: usize) -> Result<Transcript> {
    let mut rng = rng_stream(seed, streams::BUILDER);
    let n = rng.gen_range(3..=7usize);
    let mut pairs: Vec<(Vertex, Vertex)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    pairs.shuffle(&mut rng);
    let k = rng.gen_range(1..=max_edges.min(pairs.len()));
    pairs.truncate(k);
    let mut deg = vec![0usize; n];
    for &(u, v) in &pairs {
        deg[u] += 1;
        deg[v] += 1;
    }
    let max_degree = *deg.iter().max().expect("n ≥ 3");
    let kind = if rng.gen_bool(0.5) { PhaseKind::Dense } else { PhaseKind::RandomOrder };
    let config = GameConfig::new(n, max_degree, 0.5)
        .with_phases(rng.gen_range(1..=(2 * max_degree).min(4)))
        .with_phase_kind(kind)
        .with_seed(seed);
    let mut builder = random_order(&pairs, seed, config.steps(), kind == PhaseKind::RandomOrder)?;
    Ok(run_game(&mut builder, &config)?)
}

/// Exact ε̂ under both evaluation orders against the path bound, at every
/// `(v, r)`.
pub fn dp_vs_paths(transcript: &Transcript, zeta: &Exact) -> Outcome {
    let up = epsilon_hat(transcript, zeta, EvalOrder::Ascending)?;
    let down = epsilon_hat(transcript, zeta, EvalOrder::Descending)?;
    for v in 0..transcript.n() {
        for r in 0..=transcript.phases() {
            let a = up.get(v, r)?;
            if a != down.get(v, r)? {
                return Ok(Some(format!("orders disagree at ({v}, {r}): {a} vs {}", down.get(v, r)?)));
            }
            let bound = path_bound(transcript, v, r, zeta)?;
            if *a > bound {
                return Ok(Some(format!("ε̂ = {a} exceeds the path bound {bound} at ({v}, {r})")));
            }
        }
    }
    Ok(None)
}

/// The prefix-extrema detectors against recomputation from rebuilt
/// palettes: `W` prefixes, atypicality sums and flags, and `D` windows.
pub fn detectors_vs_reconstruction(transcript: &Transcript, trace: &MartingaleTrace, atypical_threshold: &Exact) -> Outcome {
    let rec = Reconstruction::new(transcript)?;
    let family = trace.family();
    for v in 0..transcript.n() {
        let w = detect_w::<Exact>(transcript, trace, v, &Exact::zero());
        if w.max_prefix != rec.max_collision_prefix(v) {
            return Ok(Some(format!("W prefix differs at vertex {v}")));
        }
        for (s, set) in family.sets.iter().enumerate() {
            let slow = rec.atypical_sums(v, set)?;
            if atypical_sums::<Exact>(transcript, trace, v, s)? != slow {
                return Ok(Some(format!("atypicality sums differ at vertex {v}, set {s}")));
            }
            let fired = slow.iter().any(|x| num_traits::Signed::abs(x) > *atypical_threshold);
            if detect_atypical::<Exact>(transcript, trace, v, s, atypical_threshold)? != fired {
                return Ok(Some(format!("atypicality flag differs at vertex {v}, set {s}")));
            }
        }
    }
    for &(u, v) in &family.pairs {
        let fast = detect_d::<Exact>(trace, u, v, &Exact::zero())?;
        let slow = brute_force_max_window(&rec.pair_differences(u, v));
        if fast.max_abs_window != slow {
            return Ok(Some(format!(
                "drift window at ({u}, {v}): prefix extrema {} vs scan {slow}",
                fast.max_abs_window
            )));
        }
    }
    Ok(None)
}

/// Number of `(v, S)` whose decomposition fails at some phase.
pub fn decomposition_violations(transcript: &Transcript, trace: &MartingaleTrace) -> Result<usize> {
    let mut bad = 0;
    for v in 0..transcript.n() {
        for s in 0..trace.set_count() {
            if !decomposition_holds_exact(transcript, trace, v, s)? {
                bad += 1;
            }
        }
    }
    Ok(bad)
}

/// `δ^r(v, S)` from the engine against the value rebuilt from raw outcomes.
pub fn delta_vs_brute_force(transcript: &Transcript, family: &TrackedSetFamily) -> Outcome {
    for v in 0..transcript.n() {
        for r in 0..=transcript.phases() {
            for s in &family.sets {
                let slow = match brute_force_delta(transcript, v, r, s) {
                    Err(Error::DegeneratePalette { .. }) => continue,
                    x => x?,
                };
                if delta::<Exact>(transcript, v, r, s)? != slow {
                    return Ok(Some(format!("δ differs at ({v}, {r})")));
                }
            }
        }
    }
    Ok(None)
}

/// A complete-graph run with random order.
pub fn complete_run(n: usize, eps: f64, phases: usize, colorer: ColorerKind, seed: u64) -> Result<Transcript> {
    let g = complete_graph(n)?;
    let config = GameConfig::new(n, n - 1, eps)
        .with_phases(phases)
        .with_colorer(colorer)
        .with_seed(seed);
    Ok(run_game(&mut random_order(&g.edges, seed, config.steps(), false)?, &config)?)
}

fn tracked(transcript: &Transcript, sets: usize, pairs: &[(Vertex, Vertex)], seed: u64) -> MartingaleTrace {
    let mut family = TrackedSetFamily::random(transcript.palette_size(), sets, &mut rng_stream(seed, streams::TRACKING));
    for &(u, v) in pairs {
        family.add_pair(u, v);
    }
    MartingaleTrace::build(transcript, &family)
}

fn regular_run(n: usize, degree: usize, eps: f64, phases: usize, seed: u64) -> Result<(Transcript, Vec<(Vertex, Vertex)>)> {
    let g = random_regular(n, degree, seed)?;
    let config = GameConfig::new(n, degree, eps).with_phases(phases).with_seed(seed);
    let t = run_game(&mut random_order(&g.edges, seed, config.steps(), false)?, &config)?;
    Ok((t, g.edges))
}

pub fn verify(level: Level) -> VerifyReport {
    let full = level == Level::Full;
    let mut checks = Vec::new();

    checks.push(check("distribution equivalence", || {
        let s = equivalence_check(if full { 4 } else { 3 }, Fault::None)?;
        Ok(s.first_mismatch.map(|m| format!("mismatch: {m}")))
    }));

    checks.push(check("injected faults are caught", || {
        for fault in [Fault::SkipResample, Fault::PaletteTooSmall] {
            if equivalence_check(4, fault)?.first_mismatch.is_none() {
                return Ok(Some(format!("{fault:?} went unnoticed")));
            }
        }
        Ok(None)
    }));

    checks.push(check("gadget closed form", || {
        let max = if full { 6 } else { 4 };
        for d in 2..=max {
            for gamma in d..=2 * d - 1 {
                let p = gadget_failure_probability(d, gamma)?;
                if gamma == 2 * d - 1 && !p.is_zero() {
                    return Ok(Some(format!("Δ = {d}, |Γ| = 2Δ−1 gives {p}")));
                }
            }
        }
        let third = gadget_failure_probability(3, 3)?;
        Ok((third != Exact::new(2.into(), 3.into())).then(|| format!("Δ = |Γ| = 3 gives {third}")))
    }));

    let runs = if full { 20 } else { 5 };

    checks.push(check("invariants and balance", || {
        for seed in 0..runs {
            for kind in [PhaseKind::Dense, PhaseKind::RandomOrder] {
                let g = complete_graph(12)?;
                let config = GameConfig::new(12, 11, 0.3).with_phases(4).with_phase_kind(kind).with_seed(seed);
                let t = run_game(&mut random_order(&g.edges, seed, config.steps(), kind == PhaseKind::RandomOrder)?, &config)?;
                t.check_invariants()?;
                if kind == PhaseKind::Dense && !is_balanced(&t, t.phases()).balanced {
                    return Ok(Some(format!("dense run {seed} is unbalanced")));
                }
            }
            let config = GameConfig::new(8, 4, 0.0).with_palette_size(4).with_phases(2).with_seed(seed);
            let t = run_game(&mut gadget_tree(4, 8)?, &config)?;
            t.check_invariants()?;
            let g = complete_graph(6)?;
            let config = GameConfig::new(6, 5, 0.5).with_phases(2).with_seed(seed);
            run_game(&mut in_order(&g.edges, config.steps())?, &config)?.check_invariants()?;
        }
        Ok(None)
    }));

    checks.push(check("δ against brute force", || {
        for seed in 0..runs {
            let t = complete_run(10, 0.3, 3, ColorerKind::PhasePalette, seed)?;
            let trace = tracked(&t, 6, &[], seed);
            if let Some(why) = delta_vs_brute_force(&t, trace.family())? {
                return Ok(Some(format!("seed {seed}: {why}")));
            }
        }
        Ok(None)
    }));

    checks.push(check("ε̂ dynamic program against path enumeration", || {
        let zeta = Exact::new(1.into(), 1000.into());
        for seed in 0..4 * runs {
            let t = small_random_transcript(seed, 12)?;
            if let Some(why) = dp_vs_paths(&t, &zeta)? {
                return Ok(Some(format!("seed {seed}: {why}")));
            }
        }
        Ok(None)
    }));

    checks.push(check("detectors against window scans", || {
        for seed in 0..runs {
            let (t, edges) = regular_run(14, 7, 0.4, 4, seed)?;
            let trace = tracked(&t, 5, &edges, seed);
            let threshold = Exact::new(1.into(), 4.into());
            if let Some(why) = detectors_vs_reconstruction(&t, &trace, &threshold)? {
                return Ok(Some(format!("seed {seed}: {why}")));
            }
        }
        Ok(None)
    }));

    checks.push(check("decomposition inequality", || {
        for seed in 0..runs {
            let t = complete_run(16, 0.3, 5, ColorerKind::PhasePalette, seed)?;
            let trace = tracked(&t, 8, &[], seed);
            let bad = decomposition_violations(&t, &trace)?;
            if bad > 0 {
                return Ok(Some(format!("seed {seed}: {bad} violations")));
            }
        }
        Ok(None)
    }));

    checks.push(check("exact oracle mass", || {
        let d = reference_greedy_distribution(&[(0, 1), (1, 2), (2, 3)], 2)?;
        Ok((d.total_mass() != Exact::one()).then(|| "reference mass is not 1".to_string()))
    }));

    VerifyReport { level, checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_counts() {
        assert_eq!(in_cap_schedules(0).len(), 1);
        assert_eq!(in_cap_schedules(2).len(), 1 + 6 + 30);
        assert_eq!(in_cap_schedules(4).len(), 1 + 6 + 30 + 120 + 360);
    }

    #[test]
    fn faults_are_reported() {
        let s = equivalence_check(3, Fault::SkipResample).unwrap();
        assert!(s.first_mismatch.is_some());
    }

    #[test]
    fn small_transcripts_are_small() {
        for seed in 0..20 {
            let t = small_random_transcript(seed, 12).unwrap();
            assert!(t.outcomes().iter().filter(|o| !o.edge.is_null()).count() <= 12);
        }
    }
}
