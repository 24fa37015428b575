//! Seeded parallel trials and sweeps.

use std::time::{Duration, Instant};

use edgecolor::game::{rng_stream, streams};
use edgecolor::instrument::{bad_events, delta, BadEventThresholds, MartingaleTrace, TrackedSetFamily};
use edgecolor::phase::is_balanced;
use edgecolor::{run_game, Error, PhaseKind, Transcript};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::stats::{trial_seed, wilson95};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialSummary {
    pub trial: usize,
    pub n: usize,
    pub delta: usize,
    pub eps: f64,
    pub gamma: usize,
    pub failed_edges: Option<usize>,
    pub collisions: Option<usize>,
    pub max_abs_delta: Option<f64>,
    pub well_behaved: Option<bool>,
    pub balanced: Option<bool>,
    pub seed: u64,
    #[serde(skip)]
    pub colors_used: Option<usize>,
    #[serde(skip)]
    pub runtime: Duration,
    #[serde(skip)]
    pub error: Option<String>,
}

impl TrialSummary {
    /// Colorer lost at least one edge.
    pub fn failed(&self) -> Option<bool> {
        self.failed_edges.map(|f| f > 0)
    }
}

/// Aggregate statistics over the completed trials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateReport {
    pub trials: usize,
    pub completed: usize,
    pub errors: usize,
    pub failures: usize,
    pub failure_rate: Option<f64>,
    pub failure_rate_ci95: Option<(f64, f64)>,
    pub mean_failed_edges: Option<f64>,
    pub mean_collisions: Option<f64>,
    pub max_collisions: Option<usize>,
    pub max_abs_delta: Option<f64>,
    pub mean_max_abs_delta: Option<f64>,
    pub well_behaved_rate: Option<f64>,
    pub balanced_rate: Option<f64>,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    (count > 0).then(|| sum / count as f64)
}

fn rate(xs: impl Iterator<Item = bool>) -> Option<f64> {
    mean(xs.map(|b| if b { 1.0 } else { 0.0 }))
}

impl AggregateReport {
    /// Summaries must be sorted by trial index; the result then does not
    /// depend on how the trials were scheduled.
    pub fn from_trials(trials: &[TrialSummary]) -> Self {
        let done: Vec<&TrialSummary> = trials.iter().filter(|t| t.error.is_none()).collect();
        let failures = done.iter().filter(|t| t.failed() == Some(true)).count();
        AggregateReport {
            trials: trials.len(),
            completed: done.len(),
            errors: trials.len() - done.len(),
            failures,
            failure_rate: rate(done.iter().filter_map(|t| t.failed())),
            failure_rate_ci95: wilson95(failures, done.len()),
            mean_failed_edges: mean(done.iter().filter_map(|t| t.failed_edges).map(|x| x as f64)),
            mean_collisions: mean(done.iter().filter_map(|t| t.collisions).map(|x| x as f64)),
            max_collisions: done.iter().filter_map(|t| t.collisions).max(),
            max_abs_delta: done.iter().filter_map(|t| t.max_abs_delta).reduce(f64::max),
            mean_max_abs_delta: mean(done.iter().filter_map(|t| t.max_abs_delta)),
            well_behaved_rate: rate(done.iter().filter_map(|t| t.well_behaved)),
            balanced_rate: rate(done.iter().filter_map(|t| t.balanced)),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialReport {
    #[serde(skip)]
    pub trials: Vec<TrialSummary>,
    pub aggregate: AggregateReport,
}

struct Measured {
    failed_edges: usize,
    collisions: usize,
    colors_used: usize,
    balanced: bool,
    max_abs_delta: Option<f64>,
    well_behaved: Option<bool>,
}

fn max_abs_delta(transcript: &Transcript, trace: &MartingaleTrace) -> Result<Option<f64>> {
    let mut best: Option<f64> = None;
    for set in 0..trace.set_count() {
        let s = trace.set(set)?;
        for v in 0..transcript.n() {
            for r in 1..=transcript.phases() {
                match delta::<f64>(transcript, v, r, s) {
                    Ok(d) => best = Some(best.map_or(d.abs(), |b| b.max(d.abs()))),
                    Err(Error::DegeneratePalette { .. }) => {}
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    Ok(best)
}

fn measure(exp: &Experiment, seed: u64) -> Result<Measured> {
    let c = &exp.config;
    let game = c.game_config(seed);
    let mut builder = exp.builder(seed)?;
    let transcript = run_game(builder.as_mut(), &game)?;
    let balanced = is_balanced(&transcript, transcript.phases()).balanced;
    let (max_abs_delta, well_behaved) = if c.tracking.enabled {
        let mut rng = rng_stream(seed, streams::TRACKING);
        let mut family = TrackedSetFamily::random(game.palette_size(), c.tracking.sets, &mut rng);
        for (u, v) in c.monitored_pairs() {
            family.add_pair(u, v);
        }
        let trace = MartingaleTrace::build(&transcript, &family);
        let thresholds = BadEventThresholds {
            alpha: c.thresholds.alpha,
            c: c.thresholds.c,
            eps: game.eps(),
        };
        let report = bad_events::<f64>(&transcript, &trace, &thresholds)?;
        (max_abs_delta(&transcript, &trace)?, Some(report.well_behaved))
    } else {
        (None, None)
    };
    Ok(Measured {
        failed_edges: transcript.failed_edges(),
        collisions: transcript.collisions(),
        colors_used: transcript.colors_used(),
        balanced,
        max_abs_delta,
        well_behaved,
    })
}

/// Runs one trial. Errors from the game are recorded in the summary.
pub fn run_trial(exp: &Experiment, trial: usize) -> TrialSummary {
    let c = &exp.config;
    let seed = trial_seed(c.master_seed, trial as u64);
    let game = c.game_config(seed);
    let start = Instant::now();
    let result = measure(exp, seed);
    let runtime = start.elapsed();
    let mut summary = TrialSummary {
        trial,
        n: c.n,
        delta: c.delta,
        eps: game.eps(),
        gamma: game.palette_size(),
        failed_edges: None,
        collisions: None,
        max_abs_delta: None,
        well_behaved: None,
        balanced: None,
        seed,
        colors_used: None,
        runtime,
        error: None,
    };
    match result {
        Ok(m) => {
            summary.failed_edges = Some(m.failed_edges);
            summary.collisions = Some(m.collisions);
            summary.colors_used = Some(m.colors_used);
            summary.balanced = Some(m.balanced);
            summary.max_abs_delta = m.max_abs_delta;
            summary.well_behaved = m.well_behaved;
        }
        Err(e) => summary.error = Some(e.to_string()),
    }
    summary
}

/// Runs `config.trials` trials on `threads` workers (0 = rayon default).
pub fn run_trials(config: &ExperimentConfig, threads: usize) -> Result<TrialReport> {
    let exp = Experiment::new(config.clone())?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let trials: Vec<TrialSummary> =
        pool.install(|| (0..config.trials).into_par_iter().map(|i| run_trial(&exp, i)).collect());
    let aggregate = AggregateReport::from_trials(&trials);
    Ok(TrialReport { trials, aggregate })
}

/// The parameter varied by a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Grid {
    Eps(Vec<f64>),
    Gamma(Vec<usize>),
}

impl Grid {
    pub fn len(&self) -> usize {
        match self {
            Grid::Eps(g) => g.len(),
            Grid::Gamma(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub eps: f64,
    pub gamma: usize,
    #[serde(flatten)]
    pub report: TrialReport,
}

/// Runs `run_trials` at every grid point. All points share `master_seed`, so
/// trial `i` sees the same builder randomness at every point.
pub fn sweep(config: &ExperimentConfig, grid: &Grid, threads: usize) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(HarnessError::Config("sweep grid is empty".into()));
    }
    let points: Vec<ExperimentConfig> = match grid {
        Grid::Eps(g) => g
            .iter()
            .map(|&eps| ExperimentConfig {
                eps,
                gamma: None,
                ..config.clone()
            })
            .collect(),
        Grid::Gamma(g) => g
            .iter()
            .map(|&k| ExperimentConfig {
                gamma: Some(k),
                ..config.clone()
            })
            .collect(),
    };
    points
        .into_iter()
        .map(|c| {
            let game = c.game_config(c.master_seed);
            let report = run_trials(&c, threads)?;
            Ok(SweepPoint {
                eps: game.eps(),
                gamma: game.palette_size(),
                report,
            })
        })
        .collect()
}

/// Whether a configuration uses the dense phase counter.
pub fn is_dense(config: &ExperimentConfig) -> bool {
    PhaseKind::from(config.phase_kind) == PhaseKind::Dense
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{BuilderSpec, ColorerSpec};

    fn gadget(trials: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(6, 3, 0.0, BuilderSpec::Gadget);
        c.gamma = Some(3);
        c.phases = 3;
        c.colorer = ColorerSpec::RandomGreedy;
        c.trials = trials;
        c.master_seed = 11;
        c
    }

    #[test]
    fn zero_trials_is_empty() {
        let r = run_trials(&gadget(0), 1).unwrap();
        assert!(r.trials.is_empty());
        assert_eq!(r.aggregate.trials, 0);
        assert_eq!(r.aggregate.failure_rate, None);
        assert_eq!(r.aggregate.failure_rate_ci95, None);
    }

    #[test]
    fn failure_rate_is_mean_indicator() {
        let r = run_trials(&gadget(300), 2).unwrap();
        assert_eq!(r.trials.len(), 300);
        let fails = r.trials.iter().filter(|t| t.failed_edges.unwrap() > 0).count();
        assert_eq!(r.aggregate.failure_rate, Some(fails as f64 / 300.0));
        assert!(r.trials.iter().enumerate().all(|(i, t)| t.trial == i));
        assert!(r.trials.iter().all(|t| t.balanced == Some(true)));
    }

    #[test]
    fn single_point_sweep_matches_run_trials() {
        let c = gadget(50);
        let direct = run_trials(&c, 1).unwrap();
        let swept = sweep(&c, &Grid::Gamma(vec![3]), 1).unwrap();
        assert_eq!(swept.len(), 1);
        let rows = |t: &[TrialSummary]| serde_json::to_string(t).unwrap();
        assert_eq!(rows(&swept[0].report.trials), rows(&direct.trials));
        assert_eq!(swept[0].report.aggregate, direct.aggregate);
    }

    #[test]
    fn gamma_sweep_endpoints() {
        let pts = sweep(&gadget(400), &Grid::Gamma(vec![3, 4, 5]), 1).unwrap();
        let rates: Vec<f64> = pts.iter().map(|p| p.report.aggregate.failure_rate.unwrap()).collect();
        assert_eq!(rates[2], 0.0);
        assert!(rates[0] >= rates[2]);
        assert!(sweep(&gadget(1), &Grid::Eps(vec![]), 1).is_err());
    }

    #[test]
    fn adaptive_trials_complete() {
        let mut c = ExperimentConfig::new(8, 4, 0.5, BuilderSpec::AdaptiveMinIntersection);
        c.trials = 3;
        let r = run_trials(&c, 1).unwrap();
        assert_eq!(r.aggregate.completed, 3);
        assert_eq!(r.aggregate.errors, 0);
    }
}
