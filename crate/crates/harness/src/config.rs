//! Experiment configuration, read from JSON.

use std::path::{Path, PathBuf};

use edgecolor::builders::{
    adaptive_min_intersection, complete_graph, gadget_tree, in_order, random_order, random_regular, NullBuilder,
};
use edgecolor::{Builder, ColorerKind, GameConfig, Graph, PhaseKind};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKindSpec {
    #[default]
    Dense,
    RandomOrder,
}

impl From<PhaseKindSpec> for PhaseKind {
    fn from(k: PhaseKindSpec) -> Self {
        match k {
            PhaseKindSpec::Dense => PhaseKind::Dense,
            PhaseKindSpec::RandomOrder => PhaseKind::RandomOrder,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorerSpec {
    FirstFit,
    RandomGreedy,
    #[default]
    PhasePalette,
}

impl From<ColorerSpec> for ColorerKind {
    fn from(c: ColorerSpec) -> Self {
        match c {
            ColorerSpec::FirstFit => ColorerKind::FirstFit,
            ColorerSpec::RandomGreedy => ColorerKind::RandomGreedy,
            ColorerSpec::PhasePalette => ColorerKind::PhasePalette,
        }
    }
}

/// Arrival order for graph-based builders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderSpec {
    /// A fresh uniformly random order per trial.
    #[default]
    Random,
    /// The order in which the graph lists its edges.
    Listed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BuilderSpec {
    /// `K_n`; needs `delta ≥ n − 1`.
    Complete {
        #[serde(default)]
        order: OrderSpec,
    },
    /// A random `delta`-regular graph, fixed by `graph_seed` or redrawn per
    /// trial when absent.
    RandomRegular {
        #[serde(default)]
        graph_seed: Option<u64>,
        #[serde(default)]
        order: OrderSpec,
    },
    /// The two-star gadget with center edge last.
    Gadget,
    AdaptiveMinIntersection,
    /// A graph read from an edge-list file (`n m` header, then `u v` lines).
    EdgeList {
        path: PathBuf,
        #[serde(default)]
        order: OrderSpec,
    },
    Null,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackingSpec {
    pub enabled: bool,
    /// Number of static random color sets.
    pub sets: usize,
    /// Explicit monitored pairs.
    pub pairs: Vec<(usize, usize)>,
    /// When `pairs` is empty, monitor `(0,1), (2,3), …` up to this many.
    pub auto_pairs: usize,
}

impl Default for TrackingSpec {
    fn default() -> Self {
        TrackingSpec {
            enabled: true,
            sets: edgecolor::instrument::DEFAULT_STATIC_SETS,
            pairs: Vec::new(),
            auto_pairs: 16,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdSpec {
    pub alpha: f64,
    pub c: usize,
}

impl Default for ThresholdSpec {
    fn default() -> Self {
        ThresholdSpec {
            alpha: edgecolor::instrument::DEFAULT_ALPHA,
            c: edgecolor::instrument::DEFAULT_C,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

fn default_phases() -> usize {
    edgecolor::game::DEFAULT_PHASES
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub delta: usize,
    pub eps: f64,
    /// Overrides `|Γ| = ⌈(1+ε)Δ⌉`.
    #[serde(default)]
    pub gamma: Option<usize>,
    #[serde(default = "default_phases")]
    pub phases: usize,
    #[serde(default)]
    pub phase_kind: PhaseKindSpec,
    #[serde(default)]
    pub colorer: ColorerSpec,
    pub builder: BuilderSpec,
    /// Uniform injection of the edges into all `m` slots. Defaults to true
    /// exactly when `phase_kind` is `random_order`.
    #[serde(default)]
    pub scatter_nulls: Option<bool>,
    #[serde(default)]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub tracking: TrackingSpec,
    #[serde(default)]
    pub thresholds: ThresholdSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn new(n: usize, delta: usize, eps: f64, builder: BuilderSpec) -> Self {
        ExperimentConfig {
            n,
            delta,
            eps,
            gamma: None,
            phases: default_phases(),
            phase_kind: PhaseKindSpec::default(),
            colorer: ColorerSpec::default(),
            builder,
            scatter_nulls: None,
            trials: 0,
            master_seed: 0,
            tracking: TrackingSpec::default(),
            thresholds: ThresholdSpec::default(),
            output: OutputSpec::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    /// The game configuration of a trial with seed `seed`.
    pub fn game_config(&self, seed: u64) -> GameConfig {
        let mut g = GameConfig::new(self.n, self.delta, self.eps)
            .with_phases(self.phases)
            .with_phase_kind(self.phase_kind.into())
            .with_colorer(self.colorer.into())
            .with_seed(seed);
        if let Some(k) = self.gamma {
            g = g.with_palette_size(k);
        }
        g
    }

    pub fn scatter(&self) -> bool {
        self.scatter_nulls.unwrap_or(self.phase_kind == PhaseKindSpec::RandomOrder)
    }

    pub fn validate(&self) -> Result<()> {
        self.game_config(0).validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        for &(u, v) in &self.tracking.pairs {
            if u >= self.n || v >= self.n || u == v {
                return Err(HarnessError::Config(format!("monitored pair ({u}, {v}) is invalid for n = {}", self.n)));
            }
        }
        if self.thresholds.alpha.is_nan() || self.thresholds.alpha <= 0.0 {
            return Err(HarnessError::Config("alpha must be positive".into()));
        }
        match &self.builder {
            BuilderSpec::Complete { .. } if self.delta + 1 < self.n => Err(HarnessError::Config(format!(
                "K_{} needs delta ≥ {}, got {}",
                self.n,
                self.n - 1,
                self.delta
            ))),
            BuilderSpec::Gadget if self.delta < 2 || self.n < 2 * self.delta => Err(HarnessError::Config(format!(
                "the gadget needs delta ≥ 2 and n ≥ 2·delta, got n = {}, delta = {}",
                self.n, self.delta
            ))),
            BuilderSpec::RandomRegular { .. } if self.delta >= self.n || (self.n * self.delta) % 2 == 1 => {
                Err(HarnessError::Config(format!("no {}-regular graph on {} vertices", self.delta, self.n)))
            }
            _ => Ok(()),
        }
    }

    /// Monitored pairs for the drift detector.
    pub fn monitored_pairs(&self) -> Vec<(usize, usize)> {
        if !self.tracking.pairs.is_empty() {
            return self.tracking.pairs.clone();
        }
        (0..self.tracking.auto_pairs)
            .map(|k| (2 * k, 2 * k + 1))
            .take_while(|&(_, v)| v < self.n)
            .collect()
    }
}

/// A validated configuration with any graph file loaded.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    graph: Option<Graph>,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let graph = match &config.builder {
            BuilderSpec::EdgeList { path, .. } => {
                let file = std::fs::File::open(path)
                    .map_err(|e| HarnessError::Config(format!("cannot open {}: {e}", path.display())))?;
                let g = Graph::read_edge_list(std::io::BufReader::new(file))
                    .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
                if g.n > config.n {
                    return Err(HarnessError::Config(format!("graph has {} vertices but n = {}", g.n, config.n)));
                }
                if g.max_degree() > config.delta {
                    return Err(HarnessError::Config(format!(
                        "graph has maximum degree {} but delta = {}",
                        g.max_degree(),
                        config.delta
                    )));
                }
                Some(g)
            }
            BuilderSpec::Complete { .. } => Some(complete_graph(config.n)?),
            BuilderSpec::RandomRegular {
                graph_seed: Some(s), ..
            } => Some(random_regular(config.n, config.delta, *s)?),
            _ => None,
        };
        Ok(Experiment { config, graph })
    }

    /// The builder for a trial with seed `seed`.
    pub fn builder(&self, seed: u64) -> Result<Box<dyn Builder>> {
        let c = &self.config;
        let steps = c.game_config(seed).steps();
        let ordered = |g: &Graph, order: OrderSpec| -> Result<Box<dyn Builder>> {
            Ok(match order {
                OrderSpec::Listed => Box::new(in_order(&g.edges, steps)?),
                OrderSpec::Random => Box::new(random_order(&g.edges, seed, steps, c.scatter())?),
            })
        };
        match &c.builder {
            BuilderSpec::Complete { order } | BuilderSpec::EdgeList { order, .. } => {
                ordered(self.graph.as_ref().expect("graph loaded"), *order)
            }
            BuilderSpec::RandomRegular { order, .. } => match &self.graph {
                Some(g) => ordered(g, *order),
                None => ordered(&random_regular(c.n, c.delta, seed)?, *order),
            },
            BuilderSpec::Gadget => Ok(Box::new(gadget_tree(c.delta, c.n)?)),
            BuilderSpec::AdaptiveMinIntersection => Ok(Box::new(adaptive_min_intersection())),
            BuilderSpec::Null => Ok(Box::new(NullBuilder)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip_and_defaults() {
        let text = r#"{"n": 20, "delta": 19, "eps": 0.3, "builder": {"kind": "complete"}}"#;
        let c: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.phases, 10);
        assert_eq!(c.colorer, ColorerSpec::PhasePalette);
        assert_eq!(c.builder, BuilderSpec::Complete { order: OrderSpec::Random });
        assert!(c.tracking.enabled);
        assert_eq!(c.tracking.sets, 32);
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(c.game_config(5).palette_size(), 25);
    }

    #[test]
    fn builder_kinds_parse() {
        for kind in [
            r#"{"kind": "random_regular", "graph_seed": 3, "order": "listed"}"#,
            r#"{"kind": "gadget"}"#,
            r#"{"kind": "adaptive_min_intersection"}"#,
            r#"{"kind": "edge_list", "path": "g.txt"}"#,
            r#"{"kind": "null"}"#,
        ] {
            serde_json::from_str::<BuilderSpec>(kind).unwrap();
        }
        assert!(serde_json::from_str::<BuilderSpec>(r#"{"kind": "petersen"}"#).is_err());
    }

    #[test]
    fn validation_errors() {
        let mut c = ExperimentConfig::new(20, 5, 0.3, BuilderSpec::Complete { order: OrderSpec::Listed });
        assert!(matches!(c.validate(), Err(HarnessError::Config(_))));
        c.builder = BuilderSpec::Gadget;
        assert!(c.validate().is_ok());
        c.eps = 1.5;
        assert!(c.validate().is_err());
        let c = ExperimentConfig::new(5, 3, 0.3, BuilderSpec::RandomRegular { graph_seed: None, order: OrderSpec::Random });
        assert!(c.validate().is_err());
    }

    #[test]
    fn scatter_default_follows_phase_kind() {
        let mut c = ExperimentConfig::new(10, 9, 0.3, BuilderSpec::Complete { order: OrderSpec::Random });
        assert!(!c.scatter());
        c.phase_kind = PhaseKindSpec::RandomOrder;
        assert!(c.scatter());
        c.scatter_nulls = Some(false);
        assert!(!c.scatter());
    }

    #[test]
    fn auto_pairs() {
        let c = ExperimentConfig::new(5, 4, 0.3, BuilderSpec::Null);
        assert_eq!(c.monitored_pairs(), vec![(0, 1), (2, 3)]);
    }
}
