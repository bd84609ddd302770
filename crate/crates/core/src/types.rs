//! Symbols, words, periodic orbits and the invariant measures they carry.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{int, Rational};
use crate::potential::Potential;
use crate::shift::TransitionSystem;

/// A letter of the countable alphabet `{0, 1, 2, ...}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Symbol(pub u64);

impl Symbol {
    pub fn index(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for Symbol {
    fn from(v: u64) -> Self {
        Symbol(v)
    }
}

/// Finite sequence of symbols. Allowability is checked on demand against a
/// [`TransitionSystem`] rather than carried as a type-level guarantee.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn from_indices(idx: &[u64]) -> Self {
        Word(idx.iter().copied().map(Symbol).collect())
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn max_symbol(&self) -> Option<Symbol> {
        self.0.iter().copied().max()
    }

    pub fn is_allowable(&self, ts: &dyn TransitionSystem) -> bool {
        is_allowable(&self.0, ts)
    }

    /// Returns the first offending position `i` with `A(w_i, w_{i+1}) = 0`.
    pub fn check_allowable(&self, ts: &dyn TransitionSystem) -> Result<()> {
        match self.0.windows(2).position(|p| !ts.allowed(p[0], p[1])) {
            None => Ok(()),
            Some(i) => Err(Error::Domain(format!(
                "transition {} -> {} at position {i} of {self} is forbidden",
                self.0[i],
                self.0[i + 1]
            ))),
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str(")")
    }
}

pub fn is_allowable(symbols: &[Symbol], ts: &dyn TransitionSystem) -> bool {
    symbols.windows(2).all(|p| ts.allowed(p[0], p[1]))
}

/// One primitive period of a periodic point, rotated to its
/// lexicographically least rotation so that equal orbits compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    period_word: Word,
}

impl PeriodicOrbit {
    /// Validates cyclic allowability, reduces to the primitive root and
    /// normalizes the rotation.
    pub fn new(word: Word, ts: &dyn TransitionSystem) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::Precondition("periodic word must be non-empty".into()));
        }
        word.check_allowable(ts)?;
        let (last, first) = (*word.0.last().unwrap(), word.0[0]);
        if !ts.allowed(last, first) {
            return Err(Error::Domain(format!(
                "closing transition {last} -> {first} of {word} is forbidden"
            )));
        }
        Ok(Self::from_cyclic_unchecked(word.0))
    }

    /// Caller guarantees cyclic allowability.
    pub(crate) fn from_cyclic_unchecked(symbols: Vec<Symbol>) -> Self {
        let root = primitive_root(&symbols);
        let start = least_rotation(root);
        let mut rotated = Vec::with_capacity(root.len());
        rotated.extend_from_slice(&root[start..]);
        rotated.extend_from_slice(&root[..start]);
        PeriodicOrbit {
            period_word: Word(rotated),
        }
    }

    pub fn period_word(&self) -> &Word {
        &self.period_word
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.period_word.0
    }

    pub fn period(&self) -> usize {
        self.period_word.len()
    }

    /// Coordinate `i` of the bi-infinite periodic extension.
    pub fn at(&self, i: usize) -> Symbol {
        self.period_word.0[i % self.period()]
    }

    /// The `len` coordinates starting at `start`.
    pub fn window(&self, start: usize, len: usize) -> Vec<Symbol> {
        (0..len).map(|j| self.at(start + j)).collect()
    }

    pub fn contains_only(&self, alphabet: &[Symbol]) -> bool {
        self.symbols().iter().all(|s| alphabet.binary_search(s).is_ok())
    }
}

impl fmt::Display for PeriodicOrbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^inf", self.period_word)
    }
}

fn primitive_root(s: &[Symbol]) -> &[Symbol] {
    let n = s.len();
    (1..=n)
        .find(|&d| n.is_multiple_of(d) && (d..n).all(|i| s[i] == s[i - d]))
        .map(|d| &s[..d])
        .unwrap_or(s)
}

fn least_rotation(s: &[Symbol]) -> usize {
    let n = s.len();
    (0..n)
        .min_by(|&a, &b| {
            (0..n)
                .map(|j| s[(a + j) % n].cmp(&s[(b + j) % n]))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(0)
}

/// Uniform probability on the `n` points of a periodic orbit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicMeasure {
    orbit: PeriodicOrbit,
}

impl PeriodicMeasure {
    pub fn new(orbit: PeriodicOrbit) -> Self {
        PeriodicMeasure { orbit }
    }

    pub fn orbit(&self) -> &PeriodicOrbit {
        &self.orbit
    }

    /// `(point, mass)` pairs; each point is named by its rotation index.
    pub fn weights(&self) -> Vec<(usize, Rational)> {
        let n = self.orbit.period() as i64;
        (0..self.orbit.period())
            .map(|i| (i, Rational::new(1.into(), n.into())))
            .collect()
    }

    pub fn integrate(&self, p: &dyn Potential) -> Rational {
        orbit_average(p, &self.orbit)
    }
}

/// `S_m f` along the periodic extension, starting at `start` (mod period).
pub fn birkhoff_sum(p: &dyn Potential, x: &PeriodicOrbit, start: usize, count: usize) -> Result<Rational> {
    if count == 0 {
        return Err(Error::Precondition("Birkhoff sum over zero terms".into()));
    }
    let k = p.memory();
    let mut total = Rational::zero();
    for i in 0..count {
        total += p.eval(&x.window(start + i, k));
    }
    Ok(total)
}

pub fn orbit_average(p: &dyn Potential, x: &PeriodicOrbit) -> Rational {
    let n = x.period();
    let sum = birkhoff_sum(p, x, 0, n).expect("period is at least one");
    sum / int(n as i64)
}

/// The least symbol visited by the orbit.
pub fn starts_in(x: &PeriodicOrbit) -> Symbol {
    *x.symbols().iter().min().expect("orbits are non-empty")
}
