//! Fixed-universe bit sets over color ids `0..|Γ|`.

use std::fmt;

/// Color id in `0..|Γ|`.
pub type Color = usize;

const WORD: usize = 64;

/// A subset of the color universe Γ, stored as a bit vector.
///
/// Two sets can only be combined when they share a universe size; mixing
/// universes is a programming error and panics.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ColorSet {
    universe: usize,
    words: Vec<u64>,
}

impl ColorSet {
    pub fn empty(universe: usize) -> Self {
        ColorSet {
            universe,
            words: vec![0; universe.div_ceil(WORD)],
        }
    }

    /// The whole universe Γ.
    pub fn full(universe: usize) -> Self {
        let mut set = Self::empty(universe);
        for (i, w) in set.words.iter_mut().enumerate() {
            let lo = i * WORD;
            let hi = (lo + WORD).min(universe);
            *w = if hi - lo == WORD {
                u64::MAX
            } else {
                (1u64 << (hi - lo)) - 1
            };
        }
        set
    }

    pub fn from_colors(universe: usize, colors: impl IntoIterator<Item = Color>) -> Self {
        let mut set = Self::empty(universe);
        for c in colors {
            set.insert(c);
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn contains(&self, c: Color) -> bool {
        c < self.universe && self.words[c / WORD] >> (c % WORD) & 1 == 1
    }

    pub fn insert(&mut self, c: Color) {
        assert!(c < self.universe, "color {c} outside universe {}", self.universe);
        self.words[c / WORD] |= 1 << (c % WORD);
    }

    pub fn remove(&mut self, c: Color) {
        if c < self.universe {
            self.words[c / WORD] &= !(1 << (c % WORD));
        }
    }

    fn check_universe(&self, other: &ColorSet) {
        assert_eq!(self.universe, other.universe, "color universes differ");
    }

    pub fn intersection(&self, other: &ColorSet) -> ColorSet {
        self.check_universe(other);
        ColorSet {
            universe: self.universe,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn difference(&self, other: &ColorSet) -> ColorSet {
        self.check_universe(other);
        ColorSet {
            universe: self.universe,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect(),
        }
    }

    pub fn union(&self, other: &ColorSet) -> ColorSet {
        self.check_universe(other);
        ColorSet {
            universe: self.universe,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect(),
        }
    }

    /// `|self ∩ other|` without allocating.
    pub fn intersection_len(&self, other: &ColorSet) -> usize {
        self.check_universe(other);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset(&self, other: &ColorSet) -> bool {
        self.check_universe(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Colors in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = Color> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * WORD + bit)
            })
        })
    }

    pub fn min(&self) -> Option<Color> {
        self.iter().next()
    }

    /// The `j`-th member in ascending id order. This is the only way the
    /// engine turns a uniform index into a color, so runs are reproducible.
    pub fn nth(&self, mut j: usize) -> Option<Color> {
        for (i, &w) in self.words.iter().enumerate() {
            let ones = w.count_ones() as usize;
            if j < ones {
                let mut w = w;
                for _ in 0..j {
                    w &= w - 1;
                }
                return Some(i * WORD + w.trailing_zeros() as usize);
            }
            j -= ones;
        }
        None
    }
}

impl fmt::Debug for ColorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
