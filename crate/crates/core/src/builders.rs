//! Builder strategies: the adversary side of the game.
//!
//! Oblivious builders fix their edge sequence up front (a graph `G` and an
//! injective slot map `σ: E(G) → [m]`); adaptive builders look at the
//! current coloring through a read-only [`StateView`].

use std::collections::HashSet;
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::color_set::{Color, ColorSet};
use crate::error::{Error, Result};
use crate::game::{edge_key, EdgeEvent, GameRng, GameState, Vertex};

/// What a builder may observe: free sets, palettes, degrees and the colored
/// graph. The colorer's random stream is not reachable from here.
#[derive(Clone, Copy)]
pub struct StateView<'a> {
    state: &'a GameState,
}

impl<'a> StateView<'a> {
    pub fn new(state: &'a GameState) -> Self {
        StateView { state }
    }

    pub fn n(&self) -> usize {
        self.state.n()
    }

    pub fn max_degree(&self) -> usize {
        self.state.config().max_degree
    }

    pub fn palette_size(&self) -> usize {
        self.state.palette_size()
    }

    /// Steps played so far.
    pub fn step_index(&self) -> usize {
        self.state.step_index()
    }

    pub fn steps(&self) -> usize {
        self.state.steps()
    }

    pub fn free_set(&self, v: Vertex) -> &'a ColorSet {
        self.state.free_set(v).expect("vertex in range")
    }

    pub fn palette(&self, v: Vertex) -> &'a ColorSet {
        self.state.palette(v).expect("vertex in range")
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.state.degree(v)
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.state.has_edge(u, v)
    }

    pub fn edge_color(&self, u: Vertex, v: Vertex) -> Option<Option<Color>> {
        self.state.edge_color(u, v)
    }

    /// Whether `(u, v)` could be added now.
    pub fn is_legal(&self, u: Vertex, v: Vertex) -> bool {
        self.state.check_legal(EdgeEvent::Edge(u, v)).is_ok()
    }
}

/// A builder strategy.
pub trait Builder {
    fn next_edge(&mut self, view: &StateView<'_>, rng: &mut GameRng) -> EdgeEvent;

    /// True when the output never depends on the coloring.
    fn is_oblivious(&self) -> bool;
}

impl<B: Builder + ?Sized> Builder for Box<B> {
    fn next_edge(&mut self, view: &StateView<'_>, rng: &mut GameRng) -> EdgeEvent {
        (**self).next_edge(view, rng)
    }
    fn is_oblivious(&self) -> bool {
        (**self).is_oblivious()
    }
}

/// Plays only null edges.
#[derive(Clone, Copy, Debug, Default)]
pub struct NullBuilder;

impl Builder for NullBuilder {
    fn next_edge(&mut self, _view: &StateView<'_>, _rng: &mut GameRng) -> EdgeEvent {
        EdgeEvent::Null
    }
    fn is_oblivious(&self) -> bool {
        true
    }
}

/// A simple graph given as an edge list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(Vertex, Vertex)>,
}

impl Graph {
    /// Checks vertex ids, self-loops and duplicate edges.
    pub fn new(n: usize, edges: Vec<(Vertex, Vertex)>) -> Result<Self> {
        check_simple(n, &edges)?;
        Ok(Graph { n, edges })
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Reads the edge-list text format: a header `n m`, then `m` lines
    /// `u v` with 0-based vertex ids. Blank lines and `#` comments are
    /// skipped.
    pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let text = line.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let nums = text
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line: lineno,
                    message: e.to_string(),
                })?;
            if nums.len() != 2 {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected two integers, found {}", nums.len()),
                });
            }
            match header {
                None => header = Some((nums[0], nums[1])),
                Some(_) => edges.push((nums[0], nums[1])),
            }
        }
        let (n, m) = header.ok_or(Error::Parse {
            line: 0,
            message: "missing `n m` header".into(),
        })?;
        if edges.len() != m {
            return Err(Error::Parse {
                line: 0,
                message: format!("header announces {m} edges, found {}", edges.len()),
            });
        }
        Graph::new(n, edges)
    }

    pub fn write_edge_list<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.n, self.edges.len())?;
        for (u, v) in &self.edges {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }
}

fn check_simple(n: usize, edges: &[(Vertex, Vertex)]) -> Result<()> {
    let mut seen = HashSet::new();
    for &(u, v) in edges {
        if u >= n || v >= n {
            return Err(Error::Graph(format!("edge ({u}, {v}) uses a vertex outside 0..{n}")));
        }
        if u == v {
            return Err(Error::Graph(format!("self-loop at {u}")));
        }
        if !seen.insert(edge_key(u, v)) {
            return Err(Error::Graph(format!("duplicate edge ({u}, {v})")));
        }
    }
    Ok(())
}

/// `obl(G, σ)`: plays the edge mapped to each slot, null elsewhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObliviousSchedule {
    slots: Vec<EdgeEvent>,
    cursor: usize,
}

impl ObliviousSchedule {
    /// The full slot sequence of length `m`.
    pub fn slots(&self) -> &[EdgeEvent] {
        &self.slots
    }

    /// Edges in arrival order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.slots.iter().filter_map(|e| e.endpoints())
    }

    /// Checks that no vertex is asked to exceed `max_degree`.
    pub fn check_degrees(&self, n: usize, max_degree: usize) -> Result<()> {
        let mut deg = vec![0usize; n];
        for (u, v) in self.edges() {
            for w in [u, v] {
                deg[w] += 1;
                if deg[w] > max_degree {
                    return Err(Error::Graph(format!("vertex {w} exceeds degree {max_degree}")));
                }
            }
        }
        Ok(())
    }
}

impl Builder for ObliviousSchedule {
    fn next_edge(&mut self, _view: &StateView<'_>, _rng: &mut GameRng) -> EdgeEvent {
        let e = self.slots.get(self.cursor).copied().unwrap_or(EdgeEvent::Null);
        self.cursor += 1;
        e
    }
    fn is_oblivious(&self) -> bool {
        true
    }
}

/// Builds `obl(G, σ)` from edges and their 1-based slots in `[m]`.
pub fn oblivious_from(edges: &[(Vertex, Vertex)], positions: &[usize], steps: usize) -> Result<ObliviousSchedule> {
    if edges.len() != positions.len() {
        return Err(Error::Graph(format!(
            "{} edges but {} slot assignments",
            edges.len(),
            positions.len()
        )));
    }
    let n = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
    check_simple(n, edges)?;
    let mut slots = vec![EdgeEvent::Null; steps];
    for (&(u, v), &pos) in edges.iter().zip(positions) {
        if pos == 0 || pos > steps {
            return Err(Error::Graph(format!("slot {pos} outside 1..={steps}")));
        }
        if !slots[pos - 1].is_null() {
            return Err(Error::Graph(format!("two edges mapped to slot {pos}")));
        }
        slots[pos - 1] = EdgeEvent::Edge(u, v);
    }
    Ok(ObliviousSchedule { slots, cursor: 0 })
}

/// Edges in the listed order, occupying slots `1..=|E|`.
pub fn in_order(edges: &[(Vertex, Vertex)], steps: usize) -> Result<ObliviousSchedule> {
    let positions: Vec<usize> = (1..=edges.len()).collect();
    oblivious_from(edges, &positions, steps)
}

/// A uniformly random arrival order.
///
/// With `scatter_nulls` the edges are placed by a uniform injection of
/// `E(G)` into all `m` slots; otherwise a uniform permutation fills slots
/// `1..=|E|` and the rest are null.
pub fn random_order(edges: &[(Vertex, Vertex)], seed: u64, steps: usize, scatter_nulls: bool) -> Result<ObliviousSchedule> {
    if edges.len() > steps {
        return Err(Error::Graph(format!("{} edges do not fit in {steps} steps", edges.len())));
    }
    let mut rng = crate::game::rng_stream(seed, crate::game::streams::BUILDER);
    let positions: Vec<usize> = if scatter_nulls {
        let mut slots: Vec<usize> = (1..=steps).collect();
        slots.shuffle(&mut rng);
        slots.truncate(edges.len());
        slots
    } else {
        let mut slots: Vec<usize> = (1..=edges.len()).collect();
        slots.shuffle(&mut rng);
        slots
    };
    oblivious_from(edges, &positions, steps)
}

/// The two-star gadget: `Δ−1` edges at `u = 0`, then `Δ−1` edges at
/// `v = 1`, then the center edge `(0, 1)`. Leaves are `2..=Δ` and
/// `Δ+1..=2Δ−1`.
pub fn gadget_edges(max_degree: usize) -> Vec<(Vertex, Vertex)> {
    let d = max_degree;
    let mut edges: Vec<_> = (2..=d).map(|w| (0, w)).collect();
    edges.extend((d + 1..2 * d).map(|x| (1, x)));
    edges.push((0, 1));
    edges
}

pub fn gadget_tree(max_degree: usize, n: usize) -> Result<ObliviousSchedule> {
    if max_degree < 2 {
        return Err(Error::Config(format!("gadget needs Δ ≥ 2, got {max_degree}")));
    }
    if n < 2 * max_degree {
        return Err(Error::Config(format!("gadget needs n ≥ 2Δ = {}, got {n}", 2 * max_degree)));
    }
    in_order(&gadget_edges(max_degree), max_degree * n / 2)
}

/// Edges of `K_n` in lexicographic order.
pub fn complete_graph(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::Config("complete graph needs n ≥ 2".into()));
    }
    let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    Graph::new(n, edges)
}

/// A random `Δ`-regular simple graph on `n` vertices.
///
/// Starts from a circulant `Δ`-regular graph and applies `10·|E|` random
/// degree-preserving double-edge swaps.
pub fn random_regular(n: usize, degree: usize, seed: u64) -> Result<Graph> {
    if n < 2 || degree == 0 || degree >= n {
        return Err(Error::Config(format!("no {degree}-regular simple graph on {n} vertices")));
    }
    if (n * degree) % 2 == 1 {
        return Err(Error::Config(format!("n·Δ = {} is odd", n * degree)));
    }
    let mut edges: Vec<(Vertex, Vertex)> = Vec::with_capacity(n * degree / 2);
    for u in 0..n {
        for k in 1..=degree / 2 {
            edges.push(edge_key(u, (u + k) % n));
        }
        if degree % 2 == 1 && u < n / 2 {
            edges.push((u, u + n / 2));
        }
    }
    let mut present: HashSet<(Vertex, Vertex)> = edges.iter().copied().collect();
    let mut rng = crate::game::rng_stream(seed, crate::game::streams::BUILDER);
    let e = edges.len();
    if e >= 2 {
        for _ in 0..10 * e {
            let i = rng.gen_range(0..e);
            let j = rng.gen_range(0..e);
            if i == j {
                continue;
            }
            let (a, b) = edges[i];
            let (c, d) = edges[j];
            let (x, y) = if rng.gen::<bool>() { ((a, c), (b, d)) } else { ((a, d), (b, c)) };
            if x.0 == x.1 || y.0 == y.1 {
                continue;
            }
            let (x, y) = (edge_key(x.0, x.1), edge_key(y.0, y.1));
            if x == y || present.contains(&x) || present.contains(&y) {
                continue;
            }
            present.remove(&edges[i]);
            present.remove(&edges[j]);
            present.insert(x);
            present.insert(y);
            edges[i] = x;
            edges[j] = y;
        }
    }
    edges.sort_unstable();
    Graph::new(n, edges)
}

/// Adaptive attacker: plays the legal non-edge with the smallest
/// `|F(u) ∩ F(v)|`, ties broken by the lexicographically smallest `(u, v)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct MinIntersection;

pub fn adaptive_min_intersection() -> MinIntersection {
    MinIntersection
}

impl Builder for MinIntersection {
    fn next_edge(&mut self, view: &StateView<'_>, _rng: &mut GameRng) -> EdgeEvent {
        let n = view.n();
        let cap = view.max_degree();
        let mut best: Option<(usize, Vertex, Vertex)> = None;
        for u in 0..n {
            if view.degree(u) >= cap {
                continue;
            }
            for v in u + 1..n {
                if view.degree(v) >= cap || view.has_edge(u, v) {
                    continue;
                }
                let size = view.free_set(u).intersection_len(view.free_set(v));
                if best.is_none_or(|(s, _, _)| size < s) {
                    best = Some((size, u, v));
                    if size == 0 {
                        return EdgeEvent::Edge(u, v);
                    }
                }
            }
        }
        best.map_or(EdgeEvent::Null, |(_, u, v)| EdgeEvent::Edge(u, v))
    }
    fn is_oblivious(&self) -> bool {
        false
    }
}
