//! Deterministic formulas: technical parameters, the ε̂ error recurrence,
//! valid-path bounds and tail-bound calculators.

use crate::error::{Error, Result};
use crate::game::{Transcript, Vertex};
use crate::scalar::Scalar;

/// Which reading of the α definition to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AlphaConvention {
    /// `α = ζ·ε³/5`.
    #[default]
    ZetaEpsCubedOverFive,
    /// `α = ζ`.
    EqualsZeta,
}

/// The technical parameters for `(ε, M)`; `M = 0` is the random-order case.
///
/// These values under- or overflow `f64` for every realistic ε, so each one
/// is also kept as a natural logarithm.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterSet {
    pub eps: f64,
    pub m: f64,
    pub convention: AlphaConvention,
    pub zeta: f64,
    pub alpha: f64,
    pub b: f64,
    pub c: f64,
    pub n: f64,
    pub ln_zeta: f64,
    pub ln_alpha: f64,
    pub ln_b: f64,
    pub ln_c: f64,
    pub ln_n: f64,
}

struct Core {
    ln_zeta: f64,
    ln_alpha: f64,
    ln_b: f64,
    ln_c: f64,
}

fn core(eps: f64, m: f64, convention: AlphaConvention) -> Core {
    let le = eps.ln();
    let ln_zeta = if m == 0.0 {
        -20.0 / (eps * eps) + 3.0 * le - 10f64.ln()
    } else {
        let s = 5.0 * m / (eps * eps);
        5.0 * le - (100.0 * m).ln() - s * s
    };
    let ln_alpha = match convention {
        AlphaConvention::ZetaEpsCubedOverFive => ln_zeta + 3.0 * le - 5f64.ln(),
        AlphaConvention::EqualsZeta => ln_zeta,
    };
    Core {
        ln_zeta,
        ln_alpha,
        ln_b: 40f64.ln() - ln_alpha - 2.0 * le,
        ln_c: 2000f64.ln() - 4.0 * ln_alpha,
    }
}

impl ParameterSet {
    pub fn new(eps: f64, m: f64) -> Result<Self> {
        Self::with_convention(eps, m, AlphaConvention::default())
    }

    pub fn with_convention(eps: f64, m: f64, convention: AlphaConvention) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Domain(format!("ε = {eps} must lie in (0, 1)")));
        }
        if !(m == 0.0 || m > 1.0) {
            return Err(Error::Domain(format!("M = {m} must be 0 or greater than 1")));
        }
        let k = core(eps, m, convention);
        let k0 = core(eps, 0.0, convention);
        let ln_n = (400f64.ln() + k0.ln_c).max(50f64.ln() + k0.ln_b);
        Ok(ParameterSet {
            eps,
            m,
            convention,
            zeta: k.ln_zeta.exp(),
            alpha: k.ln_alpha.exp(),
            b: k.ln_b.exp(),
            c: k.ln_c.exp(),
            n: ln_n.exp(),
            ln_zeta: k.ln_zeta,
            ln_alpha: k.ln_alpha,
            ln_b: k.ln_b,
            ln_c: k.ln_c,
            ln_n,
        })
    }
}

/// Tie-break among vertex-phase pairs with the same `last` time. Any choice
/// is a valid evaluation order; both exist so that order independence can
/// be checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EvalOrder {
    #[default]
    Ascending,
    Descending,
}

/// `ε̂^r(v)` for every vertex and `r = 0..=b`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonHatTable<T> {
    pub zeta: T,
    values: Vec<Vec<T>>,
}

impl<T: Scalar> EpsilonHatTable<T> {
    pub fn get(&self, v: Vertex, r: usize) -> Result<&T> {
        self.values
            .get(v)
            .ok_or(Error::UnknownVertex(v))?
            .get(r)
            .ok_or(Error::PhaseOutOfRange { vertex: v, phase: r })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn phases(&self) -> usize {
        self.values.first().map_or(0, |row| row.len() - 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vertex, usize, &T)> + '_ {
        self.values
            .iter()
            .enumerate()
            .flat_map(|(v, row)| row.iter().enumerate().map(move |(r, x)| (v, r, x)))
    }
}

fn growth<T: Scalar>(transcript: &Transcript) -> T {
    let eps = transcript.config().eps();
    T::from_f64(5.0) / (T::from_count(transcript.config().max_degree) * T::from_f64(eps * eps))
}

/// Evaluates `ε̂^r(v) = ζ + (5/(Δε²))·∑_{j∈T^{≤r}(v)} ε̂^{s_j(v)−1}(e_j − v)`
/// with `ε̂^0 = 0`.
///
/// Pairs are processed by `last`-time key `max T^{≤r}(v)`. Every dependency
/// `(u, s−1)` of `(v, r)` only involves arrivals at `u` strictly before some
/// `j ∈ T^{≤r}(v)`, so it has a smaller key and is already evaluated.
pub fn epsilon_hat<T: Scalar>(transcript: &Transcript, zeta: &T, order: EvalOrder) -> Result<EpsilonHatTable<T>> {
    let n = transcript.n();
    let b = transcript.phases();
    let c: T = growth(transcript);
    let mut pairs = Vec::with_capacity(n * b);
    for v in 0..n {
        let mut key = 0;
        let mut inc = transcript.incidences(v).iter().peekable();
        for r in 1..=b {
            while let Some(i) = inc.next_if(|i| i.phase <= r) {
                if i.phase == 0 {
                    return Err(Error::Inconsistent(format!("arrival at {v} in phase 0")));
                }
                key = i.step;
            }
            pairs.push((key, v, r));
        }
        if inc.next().is_some() {
            return Err(Error::Inconsistent(format!("arrival at {v} beyond phase {b}")));
        }
    }
    match order {
        EvalOrder::Ascending => pairs.sort_unstable(),
        EvalOrder::Descending => pairs.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)).then(b.2.cmp(&a.2))),
    }
    let mut values: Vec<Vec<Option<T>>> = vec![vec![None; b + 1]; n];
    for row in &mut values {
        row[0] = Some(T::zero());
    }
    for (_, v, r) in pairs {
        let mut sum = T::zero();
        for i in transcript.incidences(v).iter().take_while(|i| i.phase <= r) {
            let s = i.other_phase;
            if s == 0 {
                return Err(Error::Inconsistent(format!("step {}: neighbor in phase 0", i.step)));
            }
            let dep = values[i.other][s - 1].as_ref().ok_or_else(|| {
                Error::Inconsistent(format!("({v}, {r}) needs ({}, {}) which is not yet evaluated", i.other, s - 1))
            })?;
            sum = sum + dep.clone();
        }
        values[v][r] = Some(zeta.clone() + c.clone() * sum);
    }
    Ok(EpsilonHatTable {
        zeta: zeta.clone(),
        values: values
            .into_iter()
            .map(|row| row.into_iter().map(|x| x.expect("every pair evaluated")).collect())
            .collect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControlVerdict<T> {
    pub controlled: bool,
    /// The largest entry and where it occurs.
    pub worst: Option<(Vertex, usize, T)>,
}

/// Whether every `ε̂^r(v) ≤ ε³/10`.
pub fn is_error_controlled<T: Scalar>(table: &EpsilonHatTable<T>, eps: f64) -> ControlVerdict<T> {
    let limit = T::from_f64(eps * eps * eps / 10.0);
    let mut worst: Option<(Vertex, usize, T)> = None;
    for (v, r, x) in table.iter() {
        if worst.as_ref().is_none_or(|w| *x > w.2) {
            worst = Some((v, r, x.clone()));
        }
    }
    ControlVerdict {
        controlled: worst.as_ref().is_none_or(|w| w.2 <= limit),
        worst,
    }
}

pub const PATH_EDGE_CAP: usize = 12;
pub const PATH_COUNT_CAP: usize = 1_000_000;

/// `ζ·∑_{P∈𝒫^r(v)} (5/(Δε²))^{l(P)}` by explicit enumeration of valid paths.
///
/// A valid path leaves `v` along an edge `e_j` with `j ∈ T^{≤r}(v)` and
/// continues from the other endpoint `u` inside `T^{≤s_j(v)−1}(u)`, and so
/// on. The length-0 path is included.
pub fn path_bound<T: Scalar>(transcript: &Transcript, v: Vertex, r: usize, zeta: &T) -> Result<T> {
    let edges = transcript.outcomes().iter().filter(|o| !o.edge.is_null()).count();
    if edges > PATH_EDGE_CAP {
        return Err(Error::OverCap(format!("{edges} edges, path enumeration allows {PATH_EDGE_CAP}")));
    }
    if v >= transcript.n() {
        return Err(Error::UnknownVertex(v));
    }
    if r > transcript.phases() {
        return Err(Error::PhaseOutOfRange { vertex: v, phase: r });
    }
    // count[l] = number of valid paths of length l
    let mut count = Vec::new();
    let mut total = 0usize;
    let mut stack = vec![(v, r, 0usize)];
    while let Some((w, phase, len)) = stack.pop() {
        total += 1;
        if total > PATH_COUNT_CAP {
            return Err(Error::OverCap(format!("more than {PATH_COUNT_CAP} valid paths")));
        }
        if count.len() <= len {
            count.resize(len + 1, 0usize);
        }
        count[len] += 1;
        for i in transcript.incidences(w).iter().filter(|i| i.phase <= phase) {
            if i.other_phase >= 1 {
                stack.push((i.other, i.other_phase - 1, len + 1));
            }
        }
    }
    let c: T = growth(transcript);
    let mut sum = T::zero();
    let mut power = T::one();
    for k in count {
        sum = sum + T::from_count(k) * power.clone();
        power = power * c.clone();
    }
    Ok(zeta.clone() * sum)
}

fn check_nonneg(name: &str, x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("{name} = {x} must be nonnegative")));
    }
    Ok(())
}

/// Freedman's inequality for a supermartingale with increments at most `d`
/// and predictable variation at most `var_budget`:
/// `min(1, exp(−δ²/(2(dδ/3 + var_budget))))`.
pub fn freedman_bound(d: f64, var_budget: f64, delta: f64) -> Result<f64> {
    if d.is_nan() || d <= 0.0 {
        return Err(Error::Domain(format!("increment bound {d} must be positive")));
    }
    check_nonneg("variance budget", var_budget)?;
    check_nonneg("deviation", delta)?;
    if delta == 0.0 {
        return Ok(1.0);
    }
    Ok((-delta * delta / (2.0 * (d * delta / 3.0 + var_budget))).exp().min(1.0))
}

/// `min(1, exp(−C·α⁴·Δ/(128a)))`.
pub fn derived_concentration_bound(c: f64, alpha: f64, max_degree: f64, a: f64) -> Result<f64> {
    for (name, x) in [("C", c), ("α", alpha), ("Δ", max_degree), ("a", a)] {
        if x.is_nan() || x <= 0.0 {
            return Err(Error::Domain(format!("{name} = {x} must be positive")));
        }
    }
    Ok((-c * alpha.powi(4) * max_degree / (128.0 * a)).exp().min(1.0))
}

/// Upper-tail bound `exp(−t²/(2(μ + t/3)))`, `μ = kd/m`, for a
/// hypergeometric variable counting marked items among `k` draws without
/// replacement from `m` items of which `d` are marked.
pub fn hypergeometric_tail(m: u64, d: u64, k: u64, t: f64) -> Result<f64> {
    if m == 0 || d > m || k > m {
        return Err(Error::Domain(format!("need 0 ≤ d, k ≤ m and m > 0, got m={m}, d={d}, k={k}")));
    }
    check_nonneg("t", t)?;
    if t == 0.0 {
        return Ok(1.0);
    }
    let mu = k as f64 * d as f64 / m as f64;
    Ok((-t * t / (2.0 * (mu + t / 3.0))).exp())
}

/// `exp(−Δ/(20b))`, the bound on the fraction of orderings for which the
/// random-order phases are unbalanced.
pub fn balance_failure_bound(max_degree: usize, phases: usize) -> f64 {
    (-(max_degree as f64) / (20.0 * phases as f64)).exp()
}
