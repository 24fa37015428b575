//! Exhaustive small-instance oracles in exact rational arithmetic.
//!
//! The engine oracles drive the real [`GameState`] with a scripted
//! [`DrawSource`] that walks every branch of every random draw. The
//! reference oracles recompute the same quantities from scratch without
//! touching the engine.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::color_set::{Color, ColorSet};
use crate::error::{Error, Result};
use crate::game::{ColorerKind, DrawSource, EdgeEvent, GameConfig, GameState, StepOutcome, Transcript, Vertex};
use crate::phase::PhaseKind;

pub const MAX_EDGES: usize = 4;
pub const MAX_VERTICES: usize = 4;
pub const MAX_PALETTE: usize = 4;

/// Final color (or failure) of each scheduled edge, in schedule order.
pub type Coloring = Vec<Option<Color>>;

/// Exact law of the final coloring.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OutcomeDistribution {
    pub probabilities: BTreeMap<Coloring, BigRational>,
}

impl OutcomeDistribution {
    pub fn total_mass(&self) -> BigRational {
        self.probabilities.values().fold(BigRational::zero(), |a, p| a + p)
    }

    pub fn probability(&self, coloring: &[Option<Color>]) -> BigRational {
        self.probabilities.get(coloring).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Probability that scheduled edge `k` is left uncolored.
    pub fn failure_probability(&self, k: usize) -> BigRational {
        self.probabilities
            .iter()
            .filter(|(c, _)| c[k].is_none())
            .fold(BigRational::zero(), |a, (_, p)| a + p)
    }

    fn add(&mut self, coloring: Coloring, p: BigRational) {
        *self.probabilities.entry(coloring).or_insert_with(BigRational::zero) += p;
    }
}

/// Replays a fixed prefix of choices, then takes branch 0 of every new draw
/// while recording its arity.
struct Odometer {
    choices: Vec<usize>,
    arities: Vec<usize>,
    cursor: usize,
}

impl Odometer {
    fn new() -> Self {
        Odometer {
            choices: Vec::new(),
            arities: Vec::new(),
            cursor: 0,
        }
    }

    fn rewind(&mut self) {
        self.cursor = 0;
    }

    fn weight(&self) -> BigRational {
        self.arities[..self.cursor]
            .iter()
            .fold(BigRational::one(), |w, &k| w / BigRational::from_integer(BigInt::from(k)))
    }

    /// Moves to the next branch; false once every branch has been visited.
    fn advance(&mut self) -> bool {
        self.choices.truncate(self.cursor);
        self.arities.truncate(self.cursor);
        while let Some(last) = self.choices.pop() {
            let k = self.arities.pop().expect("arity per choice");
            if last + 1 < k {
                self.choices.push(last + 1);
                self.arities.push(k);
                return true;
            }
        }
        false
    }
}

impl DrawSource for Odometer {
    fn pick(&mut self, k: usize) -> usize {
        let j = self.cursor;
        self.cursor += 1;
        if j < self.choices.len() {
            assert_eq!(self.arities[j], k, "replayed draw changed arity");
            self.choices[j]
        } else {
            self.choices.push(0);
            self.arities.push(k);
            0
        }
    }
}

fn check_caps(config: &GameConfig, schedule: &[EdgeEvent]) -> Result<()> {
    let edges = schedule.iter().filter(|e| !e.is_null()).count();
    if edges > MAX_EDGES {
        return Err(Error::OverCap(format!("{edges} edges, at most {MAX_EDGES}")));
    }
    if config.n > MAX_VERTICES {
        return Err(Error::OverCap(format!("{} vertices, at most {MAX_VERTICES}", config.n)));
    }
    if config.palette_size() > MAX_PALETTE {
        return Err(Error::OverCap(format!("|Γ| = {}, at most {MAX_PALETTE}", config.palette_size())));
    }
    if schedule.len() > config.steps() {
        return Err(Error::Config(format!("schedule of {} steps exceeds the budget {}", schedule.len(), config.steps())));
    }
    Ok(())
}

/// Exact law of the coloring the engine produces on a fixed schedule, by
/// enumerating every draw. Null edges in `schedule` are played as such;
/// steps past its end are null.
pub fn exact_distribution_for(config: &GameConfig, schedule: &[EdgeEvent]) -> Result<OutcomeDistribution> {
    config.validate()?;
    check_caps(config, schedule)?;
    let mut dist = OutcomeDistribution::default();
    let mut odo = Odometer::new();
    loop {
        odo.rewind();
        let mut state = GameState::new(config.clone())?;
        let mut coloring = Vec::new();
        for &e in schedule {
            let o = state.step(e, &mut odo)?;
            if !e.is_null() {
                coloring.push(o.final_color);
            }
        }
        dist.add(coloring, odo.weight());
        if !odo.advance() {
            break;
        }
    }
    Ok(dist)
}

/// The smallest game that holds `schedule`: `n` covers every endpoint and
/// Δ is the largest degree.
pub fn config_for_schedule(schedule: &[(Vertex, Vertex)], colorer: ColorerKind, palette_size: usize, phases: usize) -> GameConfig {
    let n = schedule.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(2).max(2);
    let mut deg = vec![0usize; n];
    for &(u, v) in schedule {
        deg[u] += 1;
        deg[v] += 1;
    }
    let max_degree = deg.into_iter().max().unwrap_or(1).max(1);
    GameConfig::new(n, max_degree, 0.5)
        .with_palette_size(palette_size)
        .with_phases(phases)
        .with_colorer(colorer)
}

/// [`exact_distribution_for`] on the smallest game holding `schedule`,
/// with dense phases.
pub fn exact_outcome_distribution(
    schedule: &[(Vertex, Vertex)],
    colorer: ColorerKind,
    palette_size: usize,
    phases: usize,
) -> Result<OutcomeDistribution> {
    let config = config_for_schedule(schedule, colorer, palette_size, phases).with_phase_kind(PhaseKind::Dense);
    let events: Vec<_> = schedule.iter().map(|&(u, v)| EdgeEvent::Edge(u, v)).collect();
    exact_distribution_for(&config, &events)
}

/// Law of the coloring under the plain random greedy colorer computed by
/// direct recursion on free sets, without the engine.
pub fn reference_greedy_distribution(schedule: &[(Vertex, Vertex)], palette_size: usize) -> Result<OutcomeDistribution> {
    let n = schedule.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
    if schedule.len() > MAX_EDGES || n > MAX_VERTICES || palette_size > MAX_PALETTE {
        return Err(Error::OverCap("reference recursion is limited to the oracle caps".into()));
    }
    fn go(
        schedule: &[(Vertex, Vertex)],
        used: &mut Vec<Vec<bool>>,
        coloring: &mut Coloring,
        p: BigRational,
        dist: &mut OutcomeDistribution,
    ) {
        let Some(&(u, v)) = schedule.get(coloring.len()) else {
            dist.add(coloring.clone(), p);
            return;
        };
        let options: Vec<Color> = (0..used[u].len()).filter(|&c| !used[u][c] && !used[v][c]).collect();
        if options.is_empty() {
            coloring.push(None);
            go(schedule, used, coloring, p, dist);
            coloring.pop();
            return;
        }
        let share = p / BigRational::from_integer(BigInt::from(options.len()));
        for c in options {
            used[u][c] = true;
            used[v][c] = true;
            coloring.push(Some(c));
            go(schedule, used, coloring, share.clone(), dist);
            coloring.pop();
            used[u][c] = false;
            used[v][c] = false;
        }
    }
    let mut dist = OutcomeDistribution::default();
    go(
        schedule,
        &mut vec![vec![false; palette_size]; n],
        &mut Vec::new(),
        BigRational::one(),
        &mut dist,
    );
    Ok(dist)
}

/// Exact law of the next step from `state` on `edge`, one entry per draw
/// path.
pub fn exact_step_law(state: &GameState, edge: EdgeEvent) -> Result<Vec<(StepOutcome, BigRational)>> {
    let mut out = Vec::new();
    let mut odo = Odometer::new();
    loop {
        odo.rewind();
        let o = state.clone().step(edge, &mut odo)?;
        out.push((o, odo.weight()));
        if !odo.advance() {
            break;
        }
    }
    Ok(out)
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// Law of the set of colors left free at a star center after `leaves`
/// leaves are colored greedily, by enumerating ordered color sequences.
fn star_free_sets(palette_size: usize, leaves: usize) -> HashMap<ColorSet, BigRational> {
    let mut out = HashMap::new();
    let mut seq: Vec<Color> = Vec::with_capacity(leaves);
    fn go(palette_size: usize, leaves: usize, seq: &mut Vec<Color>, p: BigRational, out: &mut HashMap<ColorSet, BigRational>) {
        if seq.len() == leaves {
            let mut free = ColorSet::full(palette_size);
            for &c in seq.iter() {
                free.remove(c);
            }
            *out.entry(free).or_insert_with(BigRational::zero) += p;
            return;
        }
        let share = p / BigRational::from_integer(BigInt::from(palette_size - seq.len()));
        for c in 0..palette_size {
            if !seq.contains(&c) {
                seq.push(c);
                go(palette_size, leaves, seq, share.clone(), out);
                seq.pop();
            }
        }
    }
    go(palette_size, leaves, &mut seq, BigRational::one(), &mut out);
    out
}

/// Exact probability that the center edge of the two-star gadget is left
/// uncolored under random greedy coloring with `|Γ| = palette_size`.
///
/// Each center has `Δ−1` leaves colored first, leaving `a = |Γ|−Δ+1` free
/// colors at each center. The enumeration is checked against
/// `C(|Γ|−a, a)/C(|Γ|, a)`.
pub fn gadget_failure_probability(max_degree: usize, palette_size: usize) -> Result<BigRational> {
    if max_degree == 0 {
        return Err(Error::Domain("Δ must be positive".into()));
    }
    if palette_size < max_degree {
        return Err(Error::Domain(format!("|Γ| = {palette_size} < Δ = {max_degree}: the stars cannot be completed")));
    }
    let leaves = max_degree - 1;
    let law = star_free_sets(palette_size, leaves);
    let mut fail = BigRational::zero();
    for (fu, pu) in &law {
        for (fv, pv) in &law {
            if fu.intersection_len(fv) == 0 {
                fail += pu * pv;
            }
        }
    }
    let a = palette_size - leaves;
    let closed = BigRational::new(binomial(palette_size - a, a), binomial(palette_size, a));
    if closed != fail {
        return Err(Error::Inconsistent(format!("enumeration gives {fail}, closed form {closed}")));
    }
    Ok(fail)
}

/// `A^r(v)` rebuilt from the raw step outcomes: Γ minus the colors of edges
/// at `v` whose arrival phase is at most `r`.
pub fn brute_force_palette(transcript: &Transcript, v: Vertex, r: usize) -> Result<ColorSet> {
    if v >= transcript.n() {
        return Err(Error::UnknownVertex(v));
    }
    if r > transcript.phases() {
        return Err(Error::PhaseOutOfRange { vertex: v, phase: r });
    }
    let mut a = ColorSet::full(transcript.palette_size());
    for o in transcript.outcomes() {
        if let (true, Some(c)) = (o.edge.touches(v), o.final_color) {
            if transcript.phase_at(v, o.step) <= r {
                a.remove(c);
            }
        }
    }
    Ok(a)
}

/// `δ^r(v, S)` recomputed from the raw outcomes.
pub fn brute_force_delta(transcript: &Transcript, v: Vertex, r: usize, s: &ColorSet) -> Result<BigRational> {
    let a = brute_force_palette(transcript, v, r)?;
    if a.is_empty() {
        return Err(Error::DegeneratePalette { vertex: v, phase: r });
    }
    let int = |x: usize| BigInt::from(x);
    Ok(BigRational::new(int(a.intersection(s).len()), int(a.len()))
        - BigRational::new(int(s.len()), int(transcript.palette_size())))
}

/// Step variables recomputed from rebuilt palettes and free sets rather
/// than from the meets recorded by the engine.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructedStep {
    pub z: bool,
    pub q: BigRational,
    pub x: bool,
    pub p: BigRational,
}

#[derive(Clone, Debug)]
struct StepMeets {
    palette_meet: ColorSet,
    free_meet: ColorSet,
    drawn: Color,
}

/// Palettes and per-step meets rebuilt once from the raw outcomes, for the
/// brute-force detector oracles.
#[derive(Clone, Debug)]
pub struct Reconstruction<'a> {
    transcript: &'a Transcript,
    palettes: Vec<Vec<ColorSet>>,
    steps: Vec<Option<StepMeets>>,
}

impl<'a> Reconstruction<'a> {
    /// The palette in force at step `i` for an endpoint in phase `r` is
    /// `A^{r−1}`.
    pub fn new(transcript: &'a Transcript) -> Result<Self> {
        let palettes = (0..transcript.n())
            .map(|v| (0..=transcript.phases()).map(|r| brute_force_palette(transcript, v, r)).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        let mut steps = Vec::with_capacity(transcript.steps());
        for o in transcript.outcomes() {
            let (Some((u, v)), Some(c)) = (o.edge.endpoints(), o.final_color) else {
                steps.push(None);
                continue;
            };
            let i = o.step;
            let palette = |w: Vertex| -> Result<&ColorSet> {
                match transcript.phase_at(w, i) {
                    0 => Err(Error::Inconsistent(format!("step {i}: endpoint {w} in phase 0"))),
                    r => Ok(&palettes[w][r - 1]),
                }
            };
            steps.push(Some(StepMeets {
                palette_meet: palette(u)?.intersection(palette(v)?),
                free_meet: transcript.free_before(u, i).intersection(&transcript.free_before(v, i)),
                drawn: o.preliminary.unwrap_or(c),
            }));
        }
        Ok(Reconstruction {
            transcript,
            palettes,
            steps,
        })
    }

    pub fn palette(&self, v: Vertex, r: usize) -> &ColorSet {
        &self.palettes[v][r]
    }

    /// `(Z_i, q_i, X_i(S), p_i(S))` for 1-based step `i`.
    pub fn step(&self, i: usize, s: &ColorSet) -> ReconstructedStep {
        let Some(m) = &self.steps[i - 1] else {
            return ReconstructedStep {
                z: false,
                q: BigRational::zero(),
                x: false,
                p: BigRational::zero(),
            };
        };
        let int = |x: usize| BigInt::from(x);
        let a = &m.palette_meet;
        ReconstructedStep {
            z: !m.free_meet.contains(m.drawn),
            q: BigRational::new(int(a.len() - a.intersection_len(&m.free_meet)), int(a.len())),
            x: s.contains(m.drawn),
            p: BigRational::new(int(a.intersection_len(s)), int(a.len())),
        }
    }

    /// Largest prefix sum of `Z_i − q_i` over `T(v)`.
    pub fn max_collision_prefix(&self, v: Vertex) -> BigRational {
        let empty = ColorSet::empty(self.transcript.palette_size());
        let mut best = BigRational::zero();
        let mut sum = BigRational::zero();
        for inc in self.transcript.incidences(v) {
            let r = self.step(inc.step, &empty);
            sum += indicator(r.z) - r.q;
            if sum > best {
                best = sum.clone();
            }
        }
        best
    }

    /// The atypicality sums `∑_{ℓ≤r} (1/|A^ℓ|) ∑_{i∈T^ℓ(v)} D_i(S)` for
    /// `r = 1..=b`, with phases recomputed from arrival counts.
    pub fn atypical_sums(&self, v: Vertex, s: &ColorSet) -> Result<Vec<BigRational>> {
        let t = self.transcript;
        let mut per_phase = vec![BigRational::zero(); t.phases() + 1];
        for inc in t.incidences(v) {
            let r = self.step(inc.step, s);
            per_phase[t.phase_at(v, inc.step)] += indicator(r.x) - r.p;
        }
        let mut out = Vec::new();
        let mut acc = BigRational::zero();
        for (l, sum) in per_phase.into_iter().enumerate().skip(1) {
            if !sum.is_zero() {
                let a = self.palettes[v][l].len();
                if a == 0 {
                    return Err(Error::DegeneratePalette { vertex: v, phase: l });
                }
                acc += sum / BigRational::from_integer(BigInt::from(a));
            }
            out.push(acc.clone());
        }
        Ok(out)
    }

    /// `D_i(S_i)` along `T(u) ∪ T(v)` with `S_i = F_{i−1}(u) ∩ F_{i−1}(v)`.
    pub fn pair_differences(&self, u: Vertex, v: Vertex) -> Vec<BigRational> {
        let t = self.transcript;
        t.outcomes()
            .iter()
            .filter(|o| o.edge.touches(u) || o.edge.touches(v))
            .map(|o| {
                let target = t.free_before(u, o.step).intersection(&t.free_before(v, o.step));
                let r = self.step(o.step, &target);
                indicator(r.x) - r.p
            })
            .collect()
    }
}

fn indicator(b: bool) -> BigRational {
    if b {
        BigRational::one()
    } else {
        BigRational::zero()
    }
}

/// Largest `|∑_{a<k≤b} x_k|` over all windows, by scanning every pair.
pub fn brute_force_max_window(xs: &[BigRational]) -> BigRational {
    let mut best = BigRational::zero();
    for a in 0..xs.len() {
        let mut sum = BigRational::zero();
        for x in &xs[a..] {
            sum += x;
            if sum.abs() > best {
                best = sum.abs();
            }
        }
    }
    best
}

/// Exact upper tail `P(X ≥ x)` of a hypergeometric variable: `k` draws from
/// `m` items of which `d` are marked.
pub fn hypergeometric_upper_tail(m: usize, d: usize, k: usize, x: usize) -> Result<BigRational> {
    if d > m || k > m {
        return Err(Error::Domain(format!("need d, k ≤ m, got m={m}, d={d}, k={k}")));
    }
    let total = binomial(m, k);
    let hits = (x..=k.min(d)).fold(BigInt::zero(), |acc, j| acc + binomial(d, j) * binomial(m - d, k - j));
    Ok(BigRational::new(hits, total))
}
