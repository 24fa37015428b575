//! Phase-partition counters and the balance property.
//!
//! Two counters are supported. The dense counter advances a vertex's phase
//! with the number of edges that have arrived at it, `⌈|T(v) ∩ [i]|·b/Δ⌉`.
//! The random-order counter is global, `⌈i·b/m⌉`. Phases are 1-based over
//! steps `1..=m`; phase 0 is the pre-game value.

use crate::game::{Transcript, Vertex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum PhaseKind {
    #[default]
    Dense,
    RandomOrder,
}

/// Dense phase for a vertex with `incident` arrivals so far.
pub fn dense_phase(incident: usize, phases: usize, max_degree: usize) -> usize {
    (incident * phases).div_ceil(max_degree)
}

/// Random-order phase of step `step` (shared by every vertex).
pub fn random_order_phase(step: usize, phases: usize, steps: usize) -> usize {
    (step * phases).div_ceil(steps)
}

/// Live phase state for one game.
#[derive(Clone, Debug)]
pub struct PhaseCounter {
    kind: PhaseKind,
    phases: usize,
    steps: usize,
    max_degree: usize,
    incident: Vec<usize>,
    current: Vec<usize>,
    global: usize,
}

impl PhaseCounter {
    pub fn new(kind: PhaseKind, n: usize, phases: usize, steps: usize, max_degree: usize) -> Self {
        PhaseCounter {
            kind,
            phases,
            steps,
            max_degree,
            incident: vec![0; n],
            current: vec![0; n],
            global: 0,
        }
    }

    pub fn kind(&self) -> PhaseKind {
        self.kind
    }

    pub fn phases(&self) -> usize {
        self.phases
    }

    /// `φ_i(v)` for the most recent step `i` passed to [`advance`](Self::advance).
    pub fn phi(&self, v: Vertex) -> usize {
        match self.kind {
            PhaseKind::Dense => self.current[v],
            PhaseKind::RandomOrder => self.global,
        }
    }

    /// Moves the counter to step `step`, where `edge` is the arrival at that
    /// step. Every vertex whose phase changed is reported as
    /// `(vertex, old, new)`.
    pub fn advance(
        &mut self,
        step: usize,
        edge: Option<(Vertex, Vertex)>,
        changed: &mut Vec<(Vertex, usize, usize)>,
    ) {
        changed.clear();
        match self.kind {
            PhaseKind::Dense => {
                if let Some((u, v)) = edge {
                    for w in [u, v] {
                        self.incident[w] += 1;
                        let new = dense_phase(self.incident[w], self.phases, self.max_degree);
                        let old = self.current[w];
                        if new != old {
                            self.current[w] = new;
                            changed.push((w, old, new));
                        }
                    }
                }
            }
            PhaseKind::RandomOrder => {
                let new = random_order_phase(step, self.phases, self.steps);
                let old = self.global;
                if new != old {
                    self.global = new;
                    changed.extend((0..self.current.len()).map(|w| (w, old, new)));
                }
            }
        }
    }
}

/// A phase that holds too many edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BalanceWitness {
    pub vertex: Vertex,
    pub phase: usize,
    pub count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BalanceVerdict {
    pub balanced: bool,
    pub witness: Option<BalanceWitness>,
}

/// Checks that every v-phase holds at most `2Δ/b` edges incident to `v`.
///
/// The comparison is against the real threshold, done in integers as
/// `count·b ≤ 2Δ`. The first offending `(v, r)` in vertex-then-phase order is
/// returned as the witness.
pub fn is_balanced(transcript: &Transcript, phases: usize) -> BalanceVerdict {
    let max_degree = transcript.config().max_degree;
    for v in 0..transcript.n() {
        let mut counts = vec![0usize; transcript.phases() + 1];
        for inc in transcript.incidences(v) {
            counts[inc.phase] += 1;
        }
        for (r, &count) in counts.iter().enumerate() {
            if count * phases > 2 * max_degree {
                return BalanceVerdict {
                    balanced: false,
                    witness: Some(BalanceWitness {
                        vertex: v,
                        phase: r,
                        count,
                    }),
                };
            }
        }
    }
    BalanceVerdict {
        balanced: true,
        witness: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_order_ceiling() {
        assert_eq!(random_order_phase(10, 10, 100), 1);
        assert_eq!(random_order_phase(11, 10, 100), 2);
        assert_eq!(random_order_phase(100, 10, 100), 10);
        assert_eq!(random_order_phase(0, 10, 100), 0);
    }

    #[test]
    fn dense_ceiling() {
        assert_eq!(dense_phase(3, 4, 8), 2);
        assert_eq!(dense_phase(0, 4, 8), 0);
        assert_eq!(dense_phase(8, 4, 8), 4);
        assert_eq!(dense_phase(1, 4, 8), 1);
    }

    #[test]
    fn dense_counter_moves_only_endpoints() {
        let mut c = PhaseCounter::new(PhaseKind::Dense, 4, 2, 6, 3);
        let mut changed = Vec::new();
        c.advance(1, Some((0, 1)), &mut changed);
        assert_eq!(changed, vec![(0, 0, 1), (1, 0, 1)]);
        c.advance(2, None, &mut changed);
        assert!(changed.is_empty());
        c.advance(3, Some((0, 2)), &mut changed);
        // ⌈2·2/3⌉ = 2 for vertex 0, ⌈1·2/3⌉ = 1 for vertex 2
        assert_eq!(changed, vec![(0, 1, 2), (2, 0, 1)]);
        assert_eq!(c.phi(3), 0);
    }

    #[test]
    fn random_order_counter_is_global() {
        let mut c = PhaseCounter::new(PhaseKind::RandomOrder, 3, 2, 4, 2);
        let mut changed = Vec::new();
        c.advance(1, None, &mut changed);
        assert_eq!(changed.len(), 3);
        c.advance(2, None, &mut changed);
        assert!(changed.is_empty());
        c.advance(3, Some((0, 1)), &mut changed);
        assert_eq!(changed.len(), 3);
        assert!((0..3).all(|v| c.phi(v) == 2));
    }
}
