//! The online edge-coloring game and its Colorer strategies.
//!
//! A game on `n` vertices with degree bound Δ lasts `m = ⌊Δn/2⌋` steps. At
//! each step the builder offers an edge (or a null edge) and the colorer
//! assigns a color from Γ, `|Γ| = ⌈(1+ε)Δ⌉`, or leaves the edge uncolored
//! when no color is free at both endpoints.
//!
//! Three colorers are provided:
//!
//! * [`ColorerKind::FirstFit`]: lowest free color id.
//! * [`ColorerKind::RandomGreedy`]: uniform over `F(u) ∩ F(v)`.
//! * [`ColorerKind::PhasePalette`]: draws a preliminary color uniformly from
//!   the palettes `A(u) ∩ A(v)`, keeps it if it is still free at both ends
//!   and otherwise resamples uniformly from `F(u) ∩ F(v)`. Palettes are
//!   frozen copies of the free sets taken at phase boundaries.
//!
//! The last two produce the same distribution over colorings.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::builders::{Builder, StateView};
use crate::color_set::{Color, ColorSet};
use crate::error::{Error, Result, Violation};
use crate::phase::{PhaseCounter, PhaseKind};

pub type Vertex = usize;

/// Random stream used by the colorer and the builders.
pub type GameRng = ChaCha8Rng;

/// Independent stream `stream` of the generator keyed by `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> GameRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream ids carved out of one game seed.
pub mod streams {
    pub const COLORER: u64 = 0;
    pub const BUILDER: u64 = 1;
    pub const TRACKING: u64 = 2;
}

/// Source of uniform indices. The engine asks for `pick(k)` and expects a
/// value in `0..k`; the exact oracles substitute a scripted source to walk
/// every branch.
pub trait DrawSource {
    fn pick(&mut self, k: usize) -> usize;
}

impl DrawSource for GameRng {
    fn pick(&mut self, k: usize) -> usize {
        self.gen_range(0..k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeEvent {
    Null,
    Edge(Vertex, Vertex),
}

impl EdgeEvent {
    pub fn endpoints(self) -> Option<(Vertex, Vertex)> {
        match self {
            EdgeEvent::Null => None,
            EdgeEvent::Edge(u, v) => Some((u, v)),
        }
    }

    pub fn is_null(self) -> bool {
        matches!(self, EdgeEvent::Null)
    }

    pub fn touches(self, w: Vertex) -> bool {
        matches!(self, EdgeEvent::Edge(u, v) if u == w || v == w)
    }
}

pub(crate) fn edge_key(u: Vertex, v: Vertex) -> (Vertex, Vertex) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// How the size of Γ is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ColorBudget {
    /// `|Γ| = ⌈(1+ε)Δ⌉` with `0 < ε < 1`.
    Slack(f64),
    /// An explicit `|Γ|`, for instances such as `|Γ| = Δ` or `2Δ−1`.
    Exact(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ColorerKind {
    FirstFit,
    RandomGreedy,
    #[default]
    PhasePalette,
}

/// Deliberate defects used to show that the oracle suite catches them.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// A collision leaves the edge uncolored instead of resampling.
    SkipResample,
    /// After a phase change the palette drops its lowest color at the end of
    /// the step, even if that color is still free.
    PaletteTooSmall,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameConfig {
    pub n: usize,
    pub max_degree: usize,
    pub colors: ColorBudget,
    /// Number of phases `b`.
    pub phases: usize,
    pub seed: u64,
    pub phase_kind: PhaseKind,
    pub colorer: ColorerKind,
    #[doc(hidden)]
    pub fault: Fault,
}

pub const DEFAULT_PHASES: usize = 10;

/// `⌈x⌉`, treating values within rounding noise of an integer as that
/// integer, so that `⌈1.3·10⌉ = 13` rather than 14.
pub fn ceil_tolerant(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

impl GameConfig {
    pub fn new(n: usize, max_degree: usize, eps: f64) -> Self {
        GameConfig {
            n,
            max_degree,
            colors: ColorBudget::Slack(eps),
            phases: DEFAULT_PHASES,
            seed: 0,
            phase_kind: PhaseKind::Dense,
            colorer: ColorerKind::PhasePalette,
            fault: Fault::None,
        }
    }

    pub fn with_palette_size(mut self, size: usize) -> Self {
        self.colors = ColorBudget::Exact(size);
        self
    }

    pub fn with_phases(mut self, phases: usize) -> Self {
        self.phases = phases;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_phase_kind(mut self, kind: PhaseKind) -> Self {
        self.phase_kind = kind;
        self
    }

    pub fn with_colorer(mut self, colorer: ColorerKind) -> Self {
        self.colorer = colorer;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("need at least 2 vertices, got {}", self.n)));
        }
        if self.max_degree < 1 {
            return Err(Error::Config("degree bound must be at least 1".into()));
        }
        if self.phases < 1 {
            return Err(Error::Config("phase count must be at least 1".into()));
        }
        match self.colors {
            ColorBudget::Slack(eps) if !(eps > 0.0 && eps < 1.0) => {
                Err(Error::Config(format!("eps must lie in (0, 1), got {eps}")))
            }
            ColorBudget::Exact(0) => Err(Error::Config("palette size must be positive".into())),
            _ => Ok(()),
        }
    }

    /// `|Γ|`.
    pub fn palette_size(&self) -> usize {
        match self.colors {
            ColorBudget::Slack(eps) => ceil_tolerant((1.0 + eps) * self.max_degree as f64),
            ColorBudget::Exact(k) => k,
        }
    }

    /// The step budget `m = ⌊Δn/2⌋`.
    pub fn steps(&self) -> usize {
        self.max_degree * self.n / 2
    }

    /// The slack ε; for an explicit palette this is `|Γ|/Δ − 1`.
    pub fn eps(&self) -> f64 {
        match self.colors {
            ColorBudget::Slack(eps) => eps,
            ColorBudget::Exact(k) => k as f64 / self.max_degree as f64 - 1.0,
        }
    }
}

/// Result of one step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    /// 1-based step index.
    pub step: usize,
    pub edge: EdgeEvent,
    pub preliminary: Option<Color>,
    pub final_color: Option<Color>,
    /// The preliminary color was drawn and was not free at both endpoints.
    pub collision: bool,
    pub failed: bool,
    /// `A_{i−1}(u) ∩ A_{i−1}(v)`; empty for null edges.
    pub palette_meet: ColorSet,
    /// `F_{i−1}(u) ∩ F_{i−1}(v)`; empty for null edges.
    pub free_meet: ColorSet,
    /// `(φ_i(u), φ_i(v))` for a non-null edge `(u, v)`.
    pub phases: Option<(usize, usize)>,
}

impl StepOutcome {
    pub fn colored(&self) -> bool {
        self.final_color.is_some()
    }

    /// The collision indicator `Z_i`: a collision followed by a successful
    /// resample.
    pub fn z(&self) -> bool {
        self.collision && self.final_color.is_some()
    }

    pub fn palette_meet_size(&self) -> usize {
        self.palette_meet.len()
    }

    pub fn free_meet_size(&self) -> usize {
        self.free_meet.len()
    }
}

/// One arrival at a vertex: an element of `T(v)` with the phase of both
/// endpoints at that step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Incidence {
    pub step: usize,
    pub other: Vertex,
    /// `φ_step(v)`.
    pub phase: usize,
    /// `s_step(v) = φ_step(other)`.
    pub other_phase: usize,
    pub color: Option<Color>,
}

/// Live game state.
#[derive(Clone, Debug)]
pub struct GameState {
    config: GameConfig,
    gamma: usize,
    steps: usize,
    step: usize,
    free: Vec<ColorSet>,
    palette: Vec<ColorSet>,
    degree: Vec<usize>,
    counter: PhaseCounter,
    edges: HashMap<(Vertex, Vertex), Option<Color>>,
    outcomes: Vec<StepOutcome>,
    incident: Vec<Vec<Incidence>>,
    /// Closed phase palettes `A^0(v), A^1(v), …`.
    snapshots: Vec<Vec<ColorSet>>,
    changed: Vec<(Vertex, usize, usize)>,
    pending_shrink: Vec<Option<Color>>,
}

impl GameState {
    pub fn new(config: GameConfig) -> Result<Self> {
        config.validate()?;
        let gamma = config.palette_size();
        let steps = config.steps();
        let n = config.n;
        let full = ColorSet::full(gamma);
        Ok(GameState {
            gamma,
            steps,
            step: 0,
            free: vec![full.clone(); n],
            palette: vec![full.clone(); n],
            degree: vec![0; n],
            counter: PhaseCounter::new(config.phase_kind, n, config.phases, steps, config.max_degree),
            edges: HashMap::new(),
            outcomes: Vec::with_capacity(steps),
            incident: vec![Vec::new(); n],
            snapshots: vec![vec![full]; n],
            changed: Vec::new(),
            pending_shrink: vec![None; n],
            config,
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn palette_size(&self) -> usize {
        self.gamma
    }

    /// Step budget `m`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of steps played so far.
    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn is_finished(&self) -> bool {
        self.step == self.steps
    }

    fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    pub fn free_set(&self, v: Vertex) -> Result<&ColorSet> {
        self.check_vertex(v)?;
        Ok(&self.free[v])
    }

    pub fn palette(&self, v: Vertex) -> Result<&ColorSet> {
        self.check_vertex(v)?;
        Ok(&self.palette[v])
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.degree[v]
    }

    pub fn phase(&self, v: Vertex) -> usize {
        self.counter.phi(v)
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.edges.contains_key(&edge_key(u, v))
    }

    /// Color of edge `{u, v}`: `None` if absent, `Some(None)` if uncolored.
    pub fn edge_color(&self, u: Vertex, v: Vertex) -> Option<Option<Color>> {
        self.edges.get(&edge_key(u, v)).copied()
    }

    pub fn outcomes(&self) -> &[StepOutcome] {
        &self.outcomes
    }

    /// `F(u) ∩ F(v)` for the current state.
    pub fn free_intersection(&self, u: Vertex, v: Vertex) -> Result<ColorSet> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::Domain("free_intersection needs distinct vertices".into()));
        }
        Ok(self.free[u].intersection(&self.free[v]))
    }

    /// Whether `edge` may be played now.
    pub fn check_legal(&self, edge: EdgeEvent) -> std::result::Result<(), Violation> {
        if self.step >= self.steps {
            return Err(Violation::StepBudgetExhausted);
        }
        let Some((u, v)) = edge.endpoints() else {
            return Ok(());
        };
        for w in [u, v] {
            if w >= self.n() {
                return Err(Violation::UnknownVertex { vertex: w });
            }
        }
        if u == v {
            return Err(Violation::SelfLoop);
        }
        if self.has_edge(u, v) {
            return Err(Violation::RepeatedEdge);
        }
        for w in [u, v] {
            if self.degree[w] >= self.config.max_degree {
                return Err(Violation::DegreeExceeded { vertex: w });
            }
        }
        Ok(())
    }

    /// Plays one step.
    pub fn step<D: DrawSource + ?Sized>(&mut self, edge: EdgeEvent, draws: &mut D) -> Result<StepOutcome> {
        self.check_legal(edge).map_err(|violation| Error::BuilderProtocol {
            step: self.step + 1,
            violation,
        })?;
        self.step += 1;
        let i = self.step;

        let mut changed = std::mem::take(&mut self.changed);
        self.counter.advance(i, edge.endpoints(), &mut changed);
        for &(w, old, new) in &changed {
            self.close_phases(w, old, new);
        }
        self.changed = changed;

        let outcome = match edge.endpoints() {
            None => StepOutcome {
                step: i,
                edge,
                preliminary: None,
                final_color: None,
                collision: false,
                failed: false,
                palette_meet: ColorSet::empty(self.gamma),
                free_meet: ColorSet::empty(self.gamma),
                phases: None,
            },
            Some((u, v)) => self.color_edge(i, u, v, draws),
        };

        if let Some((u, v)) = edge.endpoints() {
            let (pu, pv) = outcome.phases.expect("phases recorded for edges");
            if let Some(c) = outcome.final_color {
                self.free[u].remove(c);
                self.free[v].remove(c);
            }
            self.degree[u] += 1;
            self.degree[v] += 1;
            self.edges.insert(edge_key(u, v), outcome.final_color);
            self.incident[u].push(Incidence {
                step: i,
                other: v,
                phase: pu,
                other_phase: pv,
                color: outcome.final_color,
            });
            self.incident[v].push(Incidence {
                step: i,
                other: u,
                phase: pv,
                other_phase: pu,
                color: outcome.final_color,
            });
            if self.config.fault == Fault::PaletteTooSmall {
                for w in [u, v] {
                    if let Some(c) = self.pending_shrink[w].take() {
                        self.palette[w].remove(c);
                    }
                }
            }
        }
        self.outcomes.push(outcome.clone());
        Ok(outcome)
    }

    /// Records `A^r(w) = F(w)` for every phase `r` that completed before the
    /// current step and installs the new palette.
    fn close_phases(&mut self, w: Vertex, old: usize, new: usize) {
        for _ in old.max(1)..new {
            self.snapshots[w].push(self.free[w].clone());
        }
        self.palette[w] = self.free[w].clone();
        if self.config.fault == Fault::PaletteTooSmall && new >= 2 {
            self.pending_shrink[w] = self.free[w].min();
        }
    }

    fn color_edge<D: DrawSource + ?Sized>(&mut self, step: usize, u: Vertex, v: Vertex, draws: &mut D) -> StepOutcome {
        let free_meet = self.free[u].intersection(&self.free[v]);
        let palette_meet = self.palette[u].intersection(&self.palette[v]);
        let phases = Some((self.counter.phi(u), self.counter.phi(v)));
        let uniform = |set: &ColorSet, draws: &mut D| -> Option<Color> {
            match set.len() {
                0 => None,
                k => set.nth(draws.pick(k)),
            }
        };

        let (preliminary, final_color, collision) = match self.config.colorer {
            ColorerKind::FirstFit => (None, free_meet.min(), false),
            ColorerKind::RandomGreedy => (None, uniform(&free_meet, draws), false),
            ColorerKind::PhasePalette => match uniform(&palette_meet, draws) {
                None => (None, None, false),
                Some(c) if free_meet.contains(c) => (Some(c), Some(c), false),
                Some(c) => {
                    let resample = match self.config.fault {
                        Fault::SkipResample => None,
                        _ => uniform(&free_meet, draws),
                    };
                    (Some(c), resample, true)
                }
            },
        };

        StepOutcome {
            step,
            edge: EdgeEvent::Edge(u, v),
            preliminary,
            final_color,
            collision,
            failed: final_color.is_none(),
            palette_meet,
            free_meet,
            phases,
        }
    }

    /// Pads the remaining steps with null edges and closes every open phase.
    pub fn into_transcript(mut self) -> Transcript {
        let mut no_draws = NoDraws;
        while self.step < self.steps {
            self.step(EdgeEvent::Null, &mut no_draws)
                .expect("null edges are always legal before the budget runs out");
        }
        let phases = self.config.phases;
        for w in 0..self.n() {
            while self.snapshots[w].len() <= phases {
                self.snapshots[w].push(self.free[w].clone());
            }
        }
        let failures = self
            .outcomes
            .iter()
            .filter(|o| o.failed)
            .map(|o| o.step)
            .collect();
        Transcript {
            gamma: self.gamma,
            config: self.config,
            outcomes: self.outcomes,
            incident: self.incident,
            palettes: self.snapshots,
            failures,
        }
    }
}

struct NoDraws;

impl DrawSource for NoDraws {
    fn pick(&mut self, _k: usize) -> usize {
        unreachable!("null edges draw nothing")
    }
}

/// Complete record of a finished game.
#[derive(Clone, Debug)]
pub struct Transcript {
    config: GameConfig,
    gamma: usize,
    outcomes: Vec<StepOutcome>,
    incident: Vec<Vec<Incidence>>,
    /// `A^r(v)` for `r = 0..=b`.
    palettes: Vec<Vec<ColorSet>>,
    failures: Vec<usize>,
}

impl Transcript {
    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn phases(&self) -> usize {
        self.config.phases
    }

    pub fn palette_size(&self) -> usize {
        self.gamma
    }

    pub fn steps(&self) -> usize {
        self.outcomes.len()
    }

    pub fn outcomes(&self) -> &[StepOutcome] {
        &self.outcomes
    }

    /// Outcome of 1-based step `i`.
    pub fn outcome(&self, i: usize) -> &StepOutcome {
        &self.outcomes[i - 1]
    }

    /// Steps whose edge was left uncolored.
    pub fn failures(&self) -> &[usize] {
        &self.failures
    }

    pub fn failed_edges(&self) -> usize {
        self.failures.len()
    }

    pub fn collisions(&self) -> usize {
        self.outcomes.iter().filter(|o| o.z()).count()
    }

    pub fn colors_used(&self) -> usize {
        let mut used = ColorSet::empty(self.gamma);
        for c in self.outcomes.iter().filter_map(|o| o.final_color) {
            used.insert(c);
        }
        used.len()
    }

    /// `T(v)` in arrival order.
    pub fn incidences(&self, v: Vertex) -> &[Incidence] {
        &self.incident[v]
    }

    /// `T^r(v)`.
    pub fn incidences_in_phase(&self, v: Vertex, r: usize) -> impl Iterator<Item = &Incidence> + '_ {
        self.incident[v].iter().filter(move |inc| inc.phase == r)
    }

    /// `A^r(v)`, the free set of `v` at the end of its phase `r`.
    pub fn phase_palette(&self, v: Vertex, r: usize) -> Result<&ColorSet> {
        self.palettes
            .get(v)
            .ok_or(Error::UnknownVertex(v))?
            .get(r)
            .ok_or(Error::PhaseOutOfRange { vertex: v, phase: r })
    }

    /// `U^r(v) = A^{r−1}(v) \ A^r(v)`, the colors used at `v` during phase `r`.
    pub fn used_in_phase(&self, v: Vertex, r: usize) -> Result<ColorSet> {
        if r == 0 {
            return Err(Error::PhaseOutOfRange { vertex: v, phase: 0 });
        }
        Ok(self.phase_palette(v, r - 1)?.difference(self.phase_palette(v, r)?))
    }

    /// `last(r, v)`, the arrival time of the last edge at `v` in phase `r`.
    pub fn last(&self, v: Vertex, r: usize) -> Option<usize> {
        self.incidences_in_phase(v, r).map(|inc| inc.step).last()
    }

    /// `φ_i(v)` recomputed from the arrival record.
    pub fn phase_at(&self, v: Vertex, i: usize) -> usize {
        let c = &self.config;
        match c.phase_kind {
            PhaseKind::Dense => {
                let seen = self.incident[v].iter().take_while(|inc| inc.step <= i).count();
                crate::phase::dense_phase(seen, c.phases, c.max_degree)
            }
            PhaseKind::RandomOrder => crate::phase::random_order_phase(i, c.phases, self.steps()),
        }
    }

    /// `F_{i−1}(v)`, the free set of `v` just before step `i`.
    pub fn free_before(&self, v: Vertex, i: usize) -> ColorSet {
        let mut free = ColorSet::full(self.gamma);
        for inc in self.incident[v].iter().take_while(|inc| inc.step < i) {
            if let Some(c) = inc.color {
                free.remove(c);
            }
        }
        free
    }

    /// Final free set `F_m(v)`.
    pub fn final_free(&self, v: Vertex) -> ColorSet {
        self.free_before(v, self.steps() + 1)
    }

    /// Checks the structural invariants of a finished game.
    pub fn check_invariants(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Inconsistent(msg));
        if self.outcomes.len() != self.config.steps() {
            return bad(format!("{} outcomes for a budget of {}", self.outcomes.len(), self.config.steps()));
        }
        for o in &self.outcomes {
            if o.failed != (o.final_color.is_none() && !o.edge.is_null()) {
                return bad(format!("step {}: failure flag disagrees with final color", o.step));
            }
            if let Some(c) = o.final_color {
                if !o.free_meet.contains(c) {
                    return bad(format!("step {}: final color {c} was not free at both ends", o.step));
                }
            }
            if o.collision {
                match o.preliminary {
                    Some(c) if !o.free_meet.contains(c) => {}
                    _ => return bad(format!("step {}: collision without an invalid preliminary", o.step)),
                }
            }
            if self.config.colorer == ColorerKind::PhasePalette && !o.free_meet.is_subset(&o.palette_meet) {
                return bad(format!("step {}: free intersection escapes the palettes", o.step));
            }
        }
        let b = self.phases();
        for v in 0..self.n() {
            // proper coloring at v
            let mut seen = ColorSet::empty(self.gamma);
            let mut colored = 0;
            for inc in &self.incident[v] {
                if let Some(c) = inc.color {
                    if seen.contains(c) {
                        return bad(format!("color {c} repeated at vertex {v}"));
                    }
                    seen.insert(c);
                    colored += 1;
                }
            }
            if self.incident[v].len() > self.config.max_degree {
                return bad(format!("vertex {v} exceeds the degree bound"));
            }
            let free = self.final_free(v);
            if free.len() != self.gamma - colored {
                return bad(format!("vertex {v}: |F| = {} with {colored} colored edges", free.len()));
            }
            if self.palettes[v].len() != b + 1 {
                return bad(format!("vertex {v}: {} phase palettes for b = {b}", self.palettes[v].len()));
            }
            if self.palettes[v][0] != ColorSet::full(self.gamma) || self.palettes[v][b] != free {
                return bad(format!("vertex {v}: palette chain has the wrong endpoints"));
            }
            for r in 1..=b {
                if !self.palettes[v][r].is_subset(&self.palettes[v][r - 1]) {
                    return bad(format!("vertex {v}: A^{r} is not inside A^{}", r - 1));
                }
                let used = self.used_in_phase(v, r)?;
                let colored_here: Vec<_> = self
                    .incidences_in_phase(v, r)
                    .filter_map(|inc| inc.color)
                    .collect();
                if used.len() != colored_here.len() || colored_here.iter().any(|&c| !used.contains(c)) {
                    return bad(format!("vertex {v}: U^{r} disagrees with the phase's colored edges"));
                }
            }
            let mut prev_last = 0;
            let mut prev_phase = 0;
            for inc in &self.incident[v] {
                if inc.phase < prev_phase || inc.phase > b || inc.phase == 0 {
                    return bad(format!("vertex {v}: phase sequence is not monotone in 1..=b"));
                }
                prev_phase = inc.phase;
            }
            for r in 1..=b {
                if let Some(t) = self.last(v, r) {
                    if t <= prev_last {
                        return bad(format!("vertex {v}: last(r, v) not increasing at r = {r}"));
                    }
                    prev_last = t;
                }
            }
        }
        Ok(())
    }
}

/// Plays a full game of `config.steps()` steps against `builder`.
///
/// The colorer and the builder draw from separate streams of `config.seed`,
/// so an adaptive builder sees colors but never the colorer's randomness.
pub fn run_game<B: Builder + ?Sized>(builder: &mut B, config: &GameConfig) -> Result<Transcript> {
    let mut state = GameState::new(config.clone())?;
    let mut colorer_rng = rng_stream(config.seed, streams::COLORER);
    let mut builder_rng = rng_stream(config.seed, streams::BUILDER);
    while !state.is_finished() {
        let edge = builder.next_edge(&StateView::new(&state), &mut builder_rng);
        state.step(edge, &mut colorer_rng)?;
    }
    Ok(state.into_transcript())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{gadget_tree, oblivious_from, NullBuilder};

    #[test]
    fn new_game_sizes() {
        let g = GameState::new(GameConfig::new(4, 3, 0.5)).unwrap();
        assert_eq!(g.palette_size(), 5);
        assert!((0..4).all(|v| g.free_set(v).unwrap().len() == 5));
        assert_eq!(g.steps(), 6);
        assert_eq!(GameConfig::new(2, 1, 0.5).steps(), 1);
    }

    #[test]
    fn config_errors() {
        assert!(matches!(GameState::new(GameConfig::new(4, 3, 1.0)), Err(Error::Config(_))));
        assert!(matches!(GameState::new(GameConfig::new(4, 3, 0.0)), Err(Error::Config(_))));
        assert!(matches!(GameState::new(GameConfig::new(1, 3, 0.5)), Err(Error::Config(_))));
        assert!(matches!(GameState::new(GameConfig::new(4, 0, 0.5)), Err(Error::Config(_))));
    }

    #[test]
    fn palette_size_avoids_float_noise() {
        assert_eq!(GameConfig::new(20, 10, 0.3).palette_size(), 13);
        assert_eq!(GameConfig::new(300, 299, 0.3).palette_size(), 389);
    }

    #[test]
    fn first_step_draws_from_everything() {
        let mut g = GameState::new(GameConfig::new(4, 3, 0.5)).unwrap();
        let mut rng = rng_stream(1, 0);
        let o = g.step(EdgeEvent::Edge(0, 1), &mut rng).unwrap();
        assert_eq!(o.free_meet_size(), 5);
        assert_eq!(o.palette_meet_size(), 5);
        assert!(!o.collision);
        assert!(o.preliminary.is_some());
        assert_eq!(o.preliminary, o.final_color);
    }

    #[test]
    fn null_edge_only_advances_step() {
        let mut g = GameState::new(GameConfig::new(4, 3, 0.5)).unwrap();
        let mut rng = rng_stream(1, 0);
        let before = (0..4).map(|v| g.free_set(v).unwrap().clone()).collect::<Vec<_>>();
        let o = g.step(EdgeEvent::Null, &mut rng).unwrap();
        assert_eq!(g.step_index(), 1);
        assert!(!o.failed && !o.collision && o.final_color.is_none());
        assert!((0..4).all(|v| g.free_set(v).unwrap() == &before[v] && g.degree(v) == 0));
    }

    #[test]
    fn free_intersection_examples() {
        let mut g = GameState::new(GameConfig::new(4, 3, 0.5)).unwrap();
        assert_eq!(g.free_intersection(0, 1).unwrap(), ColorSet::full(5));
        let mut rng = rng_stream(3, 0);
        let o = g.step(EdgeEvent::Edge(0, 1), &mut rng).unwrap();
        let c = o.final_color.unwrap();
        assert!(!g.free_intersection(0, 1).unwrap().contains(c));
        assert!(matches!(g.free_intersection(0, 9), Err(Error::UnknownVertex(9))));
        assert!(g.free_intersection(2, 2).is_err());
    }

    #[test]
    fn protocol_errors() {
        let mut g = GameState::new(GameConfig::new(6, 1, 0.5)).unwrap();
        let mut rng = rng_stream(0, 0);
        let err = |r: Result<StepOutcome>| match r {
            Err(Error::BuilderProtocol { violation, .. }) => violation,
            other => panic!("expected protocol error, got {other:?}"),
        };
        assert_eq!(err(g.step(EdgeEvent::Edge(1, 1), &mut rng)), Violation::SelfLoop);
        g.step(EdgeEvent::Edge(0, 1), &mut rng).unwrap();
        assert_eq!(err(g.step(EdgeEvent::Edge(1, 0), &mut rng)), Violation::RepeatedEdge);
        assert_eq!(
            err(g.step(EdgeEvent::Edge(0, 2), &mut rng)),
            Violation::DegreeExceeded { vertex: 0 }
        );
    }

    #[test]
    fn all_null_game() {
        let cfg = GameConfig::new(5, 2, 0.5);
        let t = run_game(&mut NullBuilder, &cfg).unwrap();
        assert_eq!(t.steps(), 5);
        assert_eq!(t.collisions(), 0);
        assert!((0..5).all(|v| t.final_free(v) == ColorSet::full(3)));
        t.check_invariants().unwrap();
    }

    #[test]
    fn palettes_track_phase_ends() {
        // star at 0 with 4 leaves, Δ = 4, b = 2: phase 1 holds two edges
        let edges = vec![(0, 1), (0, 2), (0, 3), (0, 4)];
        let cfg = GameConfig::new(5, 4, 0.5).with_phases(2).with_seed(9);
        let mut b = oblivious_from(&edges, &[1, 2, 3, 4], cfg.steps()).unwrap();
        let t = run_game(&mut b, &cfg).unwrap();
        t.check_invariants().unwrap();
        let phases: Vec<_> = t.incidences(0).iter().map(|i| i.phase).collect();
        assert_eq!(phases, vec![1, 1, 2, 2]);
        // the third edge's palette is F after the first two edges
        let third = t.outcome(3);
        let a1 = t.phase_palette(0, 1).unwrap();
        assert_eq!(a1.len(), 4);
        assert_eq!(third.palette_meet, a1.intersection(&ColorSet::full(6)));
        assert_eq!(t.last(0, 1), Some(2));
        assert_eq!(t.last(0, 2), Some(4));
        assert_eq!(t.phase_at(0, 3), 2);
    }

    #[test]
    fn same_seed_same_transcript() {
        let cfg = GameConfig::new(10, 3, 0.5).with_seed(77);
        let run = || {
            let mut b = gadget_tree(3, 10).unwrap();
            run_game(&mut b, &cfg).unwrap()
        };
        assert_eq!(run().outcomes(), run().outcomes());
    }
}
