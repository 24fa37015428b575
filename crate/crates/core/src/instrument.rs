//! Per-step random variables of the phase-palette colorer and the bad-event
//! detectors built on them.
//!
//! For a non-null edge `e_i = (u, v)`:
//!
//! * `Z_i`: a collision happened and the resample succeeded.
//! * `q_i = 1 − |F∩F| / |A∩A|`, the conditional probability of `Z_i`.
//! * `X_i(S)`, `Y_i(S)`: the preliminary / final color lies in `S`.
//! * `p_i(S) = |A∩A∩S| / |A∩A|` and `D_i(S) = X_i(S) − p_i(S)`.
//!
//! Every variable is 0 on null edges and on edges left uncolored. Traces
//! store raw counts; sums are evaluated in any [`Scalar`], exactly with
//! [`BigRational`](num_rational::BigRational) or quickly with `f64`.
//!
//! For colorers without a preliminary draw the final color stands in for it.

use rand::seq::index::sample;

use crate::color_set::ColorSet;
use crate::error::{Error, Result};
use crate::game::{GameRng, GameState, StepOutcome, Transcript, Vertex};
use crate::scalar::{Fraction, Scalar};

pub const DEFAULT_STATIC_SETS: usize = 32;
pub const DEFAULT_ALPHA: f64 = 0.1;
pub const DEFAULT_C: usize = 8;

/// Color sets and vertex pairs whose variables are recorded.
#[derive(Clone, Debug, Default)]
pub struct TrackedSetFamily {
    pub sets: Vec<ColorSet>,
    /// Pairs `(u, v)` whose moving target `S_i = F_{i−1}(u) ∩ F_{i−1}(v)`
    /// is tracked.
    pub pairs: Vec<(Vertex, Vertex)>,
}

impl TrackedSetFamily {
    pub fn new() -> Self {
        Self::default()
    }

    /// `count` uniform random sets whose sizes cycle through
    /// `|Γ|/4, |Γ|/2, 3|Γ|/4`.
    pub fn random(palette_size: usize, count: usize, rng: &mut GameRng) -> Self {
        let sizes = [palette_size / 4, palette_size / 2, 3 * palette_size / 4];
        let sets = (0..count)
            .map(|k| {
                let size = sizes[k % 3];
                ColorSet::from_colors(palette_size, sample(rng, palette_size, size))
            })
            .collect();
        TrackedSetFamily { sets, pairs: Vec::new() }
    }

    pub fn add_set(&mut self, set: ColorSet) -> usize {
        self.sets.push(set);
        self.sets.len() - 1
    }

    pub fn add_pair(&mut self, u: Vertex, v: Vertex) -> usize {
        self.pairs.push((u, v));
        self.pairs.len() - 1
    }

    /// Registers `A^{ℓ−1}(v)` and `A^{ℓ−1}(v) ∩ S` for every phase `ℓ`,
    /// the sets the neighbor-error argument needs. Returns their indices.
    pub fn add_palette_sets(&mut self, transcript: &Transcript, v: Vertex, s: &ColorSet) -> Result<Vec<usize>> {
        let mut added = Vec::new();
        for l in 1..=transcript.phases() {
            let a = transcript.phase_palette(v, l - 1)?.clone();
            let meet = a.intersection(s);
            added.push(self.add_set(a));
            added.push(self.add_set(meet));
        }
        Ok(added)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CollisionSample {
    pub z: bool,
    pub q: Fraction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SetSample {
    pub x: bool,
    pub y: bool,
    pub p: Fraction,
}

impl SetSample {
    pub const ZERO: SetSample = SetSample {
        x: false,
        y: false,
        p: Fraction::ZERO,
    };

    /// `D_i(S) = X_i(S) − p_i(S)`.
    pub fn d<T: Scalar>(&self) -> T {
        let x = if self.x { T::one() } else { T::zero() };
        x - self.p.to_scalar::<T>()
    }
}

/// `q` for an edge with the given free and palette intersections.
pub fn q_from_meets(free_meet: &ColorSet, palette_meet: &ColorSet) -> Fraction {
    if free_meet.is_empty() || palette_meet.is_empty() {
        return Fraction::ZERO;
    }
    Fraction::new(palette_meet.len() - free_meet.intersection_len(palette_meet), palette_meet.len())
}

/// `p(S)` for an edge with the given palette intersection.
pub fn p_from_meet(palette_meet: &ColorSet, s: &ColorSet) -> Fraction {
    Fraction::new(palette_meet.intersection_len(s), palette_meet.len())
}

/// `q_i` for the edge `(u, v)` arriving at the current state.
pub fn compute_q(state: &GameState, u: Vertex, v: Vertex) -> Result<Fraction> {
    let free = state.free_intersection(u, v)?;
    let palette = state.palette(u)?.intersection(state.palette(v)?);
    Ok(q_from_meets(&free, &palette))
}

/// `p_i(S)` for the edge `(u, v)` arriving at the current state.
pub fn compute_p(state: &GameState, u: Vertex, v: Vertex, s: &ColorSet) -> Result<Fraction> {
    let palette = state.palette(u)?.intersection(state.palette(v)?);
    Ok(p_from_meet(&palette, s))
}

fn collision_sample(o: &StepOutcome) -> CollisionSample {
    if !o.colored() {
        return CollisionSample {
            z: false,
            q: Fraction::ZERO,
        };
    }
    CollisionSample {
        z: o.z(),
        q: q_from_meets(&o.free_meet, &o.palette_meet),
    }
}

fn set_sample(o: &StepOutcome, s: &ColorSet) -> SetSample {
    let Some(final_color) = o.final_color else {
        return SetSample::ZERO;
    };
    let prelim = o.preliminary.unwrap_or(final_color);
    SetSample {
        x: s.contains(prelim),
        y: s.contains(final_color),
        p: p_from_meet(&o.palette_meet, s),
    }
}

/// `D_i(S_i)` along `T(u) ∪ T(v)` for one monitored pair.
#[derive(Clone, Debug)]
pub struct PairTrace {
    pub pair: (Vertex, Vertex),
    /// `(step, sample)` in step order.
    pub samples: Vec<(usize, SetSample)>,
}

/// All recorded variables of one run.
#[derive(Clone, Debug)]
pub struct MartingaleTrace {
    family: TrackedSetFamily,
    collisions: Vec<CollisionSample>,
    sets: Vec<Vec<SetSample>>,
    pairs: Vec<PairTrace>,
}

impl MartingaleTrace {
    pub fn build(transcript: &Transcript, family: &TrackedSetFamily) -> Self {
        let outcomes = transcript.outcomes();
        let collisions = outcomes.iter().map(collision_sample).collect();
        let sets = family
            .sets
            .iter()
            .map(|s| outcomes.iter().map(|o| set_sample(o, s)).collect())
            .collect();
        let pairs = family
            .pairs
            .iter()
            .map(|&(u, v)| pair_trace(transcript, u, v))
            .collect();
        MartingaleTrace {
            family: family.clone(),
            collisions,
            sets,
            pairs,
        }
    }

    pub fn family(&self) -> &TrackedSetFamily {
        &self.family
    }

    pub fn set_count(&self) -> usize {
        self.sets.len()
    }

    /// `(Z_i, q_i)` for 1-based step `i`.
    pub fn collision(&self, i: usize) -> CollisionSample {
        self.collisions[i - 1]
    }

    pub fn set(&self, index: usize) -> Result<&ColorSet> {
        self.family.sets.get(index).ok_or(Error::Untracked(index))
    }

    /// `(X_i(S), Y_i(S), p_i(S))` for tracked set `index` at step `i`.
    pub fn sample(&self, index: usize, i: usize) -> Result<SetSample> {
        self.sets
            .get(index)
            .map(|samples| samples[i - 1])
            .ok_or(Error::Untracked(index))
    }

    pub fn pair(&self, u: Vertex, v: Vertex) -> Result<&PairTrace> {
        self.pairs
            .iter()
            .find(|p| p.pair == (u, v) || p.pair == (v, u))
            .ok_or(Error::Unmonitored(u, v))
    }

    pub fn pairs(&self) -> &[PairTrace] {
        &self.pairs
    }
}

fn pair_trace(transcript: &Transcript, u: Vertex, v: Vertex) -> PairTrace {
    let gamma = transcript.palette_size();
    let mut free_u = ColorSet::full(gamma);
    let mut free_v = ColorSet::full(gamma);
    let mut samples = Vec::new();
    for o in transcript.outcomes() {
        let (touch_u, touch_v) = (o.edge.touches(u), o.edge.touches(v));
        if !touch_u && !touch_v {
            continue;
        }
        let target = free_u.intersection(&free_v);
        samples.push((o.step, set_sample(o, &target)));
        if let Some(c) = o.final_color {
            if touch_u {
                free_u.remove(c);
            }
            if touch_v {
                free_v.remove(c);
            }
        }
    }
    PairTrace { pair: (u, v), samples }
}

/// `δ^r(v, S) = |A^r(v) ∩ S| / |A^r(v)| − |S| / |Γ|`.
pub fn delta<T: Scalar>(transcript: &Transcript, v: Vertex, r: usize, s: &ColorSet) -> Result<T> {
    let a = transcript.phase_palette(v, r)?;
    if a.is_empty() {
        return Err(Error::DegeneratePalette { vertex: v, phase: r });
    }
    Ok(T::from_ratio(a.intersection_len(s) as i64, a.len() as i64)
        - T::from_ratio(s.len() as i64, transcript.palette_size() as i64))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollisionReport<T> {
    pub fired: bool,
    /// Largest prefix sum of `Z_i − q_i` over `i ∈ T(v)`, the empty prefix
    /// included.
    pub max_prefix: T,
}

/// Too many collisions at `v`: some prefix of `∑_{i∈T(v)} (Z_i − q_i)`
/// exceeds `threshold` (normally `αΔ`).
pub fn detect_w<T: Scalar>(transcript: &Transcript, trace: &MartingaleTrace, v: Vertex, threshold: &T) -> CollisionReport<T> {
    let mut sum = T::zero();
    let mut best = T::zero();
    for inc in transcript.incidences(v) {
        let c = trace.collision(inc.step);
        let z = if c.z { T::one() } else { T::zero() };
        sum = sum + z - c.q.to_scalar::<T>();
        if sum > best {
            best = sum.clone();
        }
    }
    CollisionReport {
        fired: best > *threshold,
        max_prefix: best,
    }
}

/// `∑_{ℓ≤r} (1/|A^ℓ(v)|) ∑_{i∈T^ℓ(v)} D_i(S)` for `r = 1..=b`.
pub fn atypical_sums<T: Scalar>(transcript: &Transcript, trace: &MartingaleTrace, v: Vertex, set: usize) -> Result<Vec<T>> {
    trace.set(set)?;
    let b = transcript.phases();
    let mut per_phase = vec![T::zero(); b + 1];
    for inc in transcript.incidences(v) {
        let d: T = trace.sample(set, inc.step)?.d();
        per_phase[inc.phase] = per_phase[inc.phase].clone() + d;
    }
    let mut acc = T::zero();
    let mut out = Vec::with_capacity(b);
    for (l, sum) in per_phase.into_iter().enumerate().skip(1) {
        if !sum.is_zero() {
            let a = transcript.phase_palette(v, l)?.len();
            if a == 0 {
                return Err(Error::DegeneratePalette { vertex: v, phase: l });
            }
            acc = acc + sum / T::from_count(a);
        }
        out.push(acc.clone());
    }
    Ok(out)
}

/// Whether `v` is S-atypical: some `|atypical_sums[r]| > threshold`
/// (normally `α/ε`).
pub fn detect_atypical<T: Scalar>(
    transcript: &Transcript,
    trace: &MartingaleTrace,
    v: Vertex,
    set: usize,
    threshold: &T,
) -> Result<bool> {
    Ok(atypical_sums::<T>(transcript, trace, v, set)?
        .iter()
        .any(|s| s.abs() > *threshold))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftReport<T> {
    pub fired: bool,
    /// Largest `|∑ D_i(S_i)|` over windows of `T(u) ∪ T(v)`.
    pub max_abs_window: T,
    /// Inclusive step range of a window attaining the maximum, if any
    /// window has a nonzero sum.
    pub window: Option<(usize, usize)>,
}

/// Too much drift at `(u, v)`, found from the running maximum and minimum
/// of the prefix sums: the largest window sum in absolute value is
/// `max prefix − min prefix`.
pub fn detect_d<T: Scalar>(trace: &MartingaleTrace, u: Vertex, v: Vertex, threshold: &T) -> Result<DriftReport<T>> {
    let samples = &trace.pair(u, v)?.samples;
    let mut prefix = T::zero();
    let (mut min_p, mut min_at) = (T::zero(), 0usize);
    let (mut max_p, mut max_at) = (T::zero(), 0usize);
    let mut best = T::zero();
    let mut window = None;
    for (k, (_, s)) in samples.iter().enumerate() {
        prefix = prefix + s.d::<T>();
        let rise = prefix.clone() - min_p.clone();
        if rise > best {
            best = rise;
            window = Some((samples[min_at].0, samples[k].0));
        }
        let fall = max_p.clone() - prefix.clone();
        if fall > best {
            best = fall;
            window = Some((samples[max_at].0, samples[k].0));
        }
        if prefix < min_p {
            min_p = prefix.clone();
            min_at = k + 1;
        }
        if prefix > max_p {
            max_p = prefix.clone();
            max_at = k + 1;
        }
    }
    Ok(DriftReport {
        fired: best > *threshold,
        max_abs_window: best,
        window,
    })
}

/// The three-term bound on `|δ^r(v, S)|` for one phase `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition<T> {
    pub lhs: T,
    /// `(1/|A^r(v)|) ∑_{i∈T^{≤r}(v)} Z_i`
    pub collision_term: T,
    /// `|∑_{ℓ≤r} (1/|A^ℓ(v)|) ∑_{i∈T^ℓ(v)} D_i(S)|`
    pub drift_term: T,
    /// `∑_{ℓ≤r} (1/|A^ℓ(v)|) ∑_{i∈T̃^ℓ(v)} |p_i(S) − |A^{ℓ−1}(v)∩S|/|A^{ℓ−1}(v)||`
    pub palette_term: T,
}

impl<T: Scalar> Decomposition<T> {
    pub fn rhs(&self) -> T {
        self.collision_term.clone() + self.drift_term.clone() + self.palette_term.clone()
    }

    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs()
    }
}

/// The decomposition for every phase `r = 1..=b` of `v` and tracked set
/// `set`, computed in one pass.
pub fn decomposition_profile<T: Scalar>(
    transcript: &Transcript,
    trace: &MartingaleTrace,
    v: Vertex,
    set: usize,
) -> Result<Vec<Decomposition<T>>> {
    profile_upto(transcript, trace, v, set, transcript.phases())
}

/// Phases `1..=last` of the profile.
fn profile_upto<T: Scalar>(
    transcript: &Transcript,
    trace: &MartingaleTrace,
    v: Vertex,
    set: usize,
    last: usize,
) -> Result<Vec<Decomposition<T>>> {
    let s = trace.set(set)?;
    let b = transcript.phases();
    let incidences = transcript.incidences(v);
    let mut cursor = 0;
    let mut collisions = 0usize;
    let mut drift = T::zero();
    let mut palette_term = T::zero();
    let mut out = Vec::with_capacity(last);
    for l in 1..=last {
        let a_prev = transcript.phase_palette(v, l - 1)?;
        let a_cur = transcript.phase_palette(v, l)?;
        if a_cur.is_empty() {
            return Err(Error::DegeneratePalette { vertex: v, phase: l });
        }
        let a_len = T::from_count(a_cur.len());
        let reference: T = T::from_ratio(a_prev.intersection_len(s) as i64, a_prev.len() as i64);
        let mut phase_drift = T::zero();
        let mut phase_palette = T::zero();
        while cursor < incidences.len() && incidences[cursor].phase == l {
            let inc = &incidences[cursor];
            cursor += 1;
            if trace.collision(inc.step).z {
                collisions += 1;
            }
            let sample = trace.sample(set, inc.step)?;
            phase_drift = phase_drift + sample.d::<T>();
            if inc.color.is_some() {
                phase_palette = phase_palette + (sample.p.to_scalar::<T>() - reference.clone()).abs();
            }
        }
        drift = drift + phase_drift / a_len.clone();
        palette_term = palette_term + phase_palette / a_len.clone();
        out.push(Decomposition {
            lhs: delta::<T>(transcript, v, l, s)?.abs(),
            collision_term: T::from_count(collisions) / a_len,
            drift_term: drift.abs(),
            palette_term: palette_term.clone(),
        });
    }
    if last == b && cursor != incidences.len() {
        return Err(Error::Inconsistent(format!("vertex {v} has arrivals outside phases 1..={b}")));
    }
    Ok(out)
}

/// The decomposition at a single phase `r ≥ 1`.
pub fn decomposition_check<T: Scalar>(
    transcript: &Transcript,
    trace: &MartingaleTrace,
    v: Vertex,
    r: usize,
    set: usize,
) -> Result<Decomposition<T>> {
    if r == 0 || r > transcript.phases() {
        return Err(Error::PhaseOutOfRange { vertex: v, phase: r });
    }
    Ok(decomposition_profile::<T>(transcript, trace, v, set)?.swap_remove(r - 1))
}

/// Exact verdict on `lhs ≤ rhs` for every phase of `(v, S)`.
///
/// Evaluates in `f64` first; any phase whose margin is within `1e-9` is
/// re-decided in exact rationals, computing the exact profile only up to the
/// last such phase. Each `f64` term is a sum of at most a few hundred values
/// in `[0, 1]`, so its rounding error is far below `1e-9`.
pub fn decomposition_holds_exact(transcript: &Transcript, trace: &MartingaleTrace, v: Vertex, set: usize) -> Result<bool> {
    let approx = decomposition_profile::<f64>(transcript, trace, v, set)?;
    let tight: Vec<usize> = (0..approx.len()).filter(|&k| approx[k].rhs() - approx[k].lhs <= 1e-9).collect();
    let Some(&last) = tight.last() else {
        return Ok(true);
    };
    let exact = profile_upto::<num_rational::BigRational>(transcript, trace, v, set, last + 1)?;
    Ok(tight.iter().all(|&k| exact[k].holds()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BadEventThresholds {
    pub alpha: f64,
    /// Number of S-atypical vertices at which `ℬ(S)` fires.
    pub c: usize,
    pub eps: f64,
}

impl BadEventThresholds {
    pub fn new(eps: f64) -> Self {
        BadEventThresholds {
            alpha: DEFAULT_ALPHA,
            c: DEFAULT_C,
            eps,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AtypicalSet {
    pub set: usize,
    pub vertices: Vec<Vertex>,
    pub fired: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BadEventReport {
    pub w_vertices: Vec<Vertex>,
    pub atypical: Vec<AtypicalSet>,
    pub drift_pairs: Vec<(Vertex, Vertex)>,
    /// Vertices skipped by the atypicality test because a phase palette
    /// they needed was empty.
    pub degenerate_vertices: Vec<Vertex>,
    pub well_behaved: bool,
}

/// Evaluates all three bad-event families over the tracked sets and pairs.
pub fn bad_events<T: Scalar>(transcript: &Transcript, trace: &MartingaleTrace, thresholds: &BadEventThresholds) -> Result<BadEventReport> {
    let delta_bound = T::from_f64(thresholds.alpha) * T::from_count(transcript.config().max_degree);
    let atypical_bound = T::from_f64(thresholds.alpha) / T::from_f64(thresholds.eps);
    let n = transcript.n();

    let w_vertices: Vec<_> = (0..n)
        .filter(|&v| detect_w(transcript, trace, v, &delta_bound).fired)
        .collect();

    let mut degenerate = std::collections::BTreeSet::new();
    let mut atypical = Vec::with_capacity(trace.set_count());
    for set in 0..trace.set_count() {
        let mut vertices = Vec::new();
        for v in 0..n {
            match detect_atypical(transcript, trace, v, set, &atypical_bound) {
                Ok(true) => vertices.push(v),
                Ok(false) => {}
                Err(Error::DegeneratePalette { .. }) => {
                    degenerate.insert(v);
                }
                Err(e) => return Err(e),
            }
        }
        let fired = vertices.len() >= thresholds.c;
        atypical.push(AtypicalSet { set, vertices, fired });
    }

    let mut drift_pairs = Vec::new();
    for p in trace.pairs() {
        if detect_d(trace, p.pair.0, p.pair.1, &delta_bound)?.fired {
            drift_pairs.push(p.pair);
        }
    }

    let well_behaved = w_vertices.is_empty() && drift_pairs.is_empty() && atypical.iter().all(|a| !a.fired);
    Ok(BadEventReport {
        w_vertices,
        atypical,
        drift_pairs,
        degenerate_vertices: degenerate.into_iter().collect(),
        well_behaved,
    })
}
