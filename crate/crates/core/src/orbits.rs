//! Periodic orbit enumeration and random instance generators.

use rand::Rng;

use crate::lift::WeightedGraph;
use crate::numeric::{int, Rational};
use crate::shift::{connect, ConnectPolicy, TransitionSystem};
use crate::types::{PeriodicOrbit, Symbol, Word};

/// Every periodic orbit over symbols `<= max_symbol` with period
/// `<= max_period`, each once, in lexicographic order of normalized words.
pub fn enumerate_orbits(ts: &dyn TransitionSystem, max_symbol: u64, max_period: usize) -> Vec<PeriodicOrbit> {
    let mut out = Vec::new();
    let mut word = Vec::with_capacity(max_period);
    for s in 0..=max_symbol {
        word.clear();
        word.push(Symbol(s));
        extend(ts, max_symbol, max_period, &mut word, &mut out);
    }
    out
}

fn extend(ts: &dyn TransitionSystem, max_symbol: u64, max_period: usize, word: &mut Vec<Symbol>, out: &mut Vec<PeriodicOrbit>) {
    if ts.allowed(*word.last().unwrap(), word[0]) && is_lyndon(word) {
        out.push(PeriodicOrbit::from_cyclic_unchecked(word.clone()));
    }
    if word.len() == max_period {
        return;
    }
    let first = word[0];
    let last = *word.last().unwrap();
    let next: Vec<Symbol> = ts
        .successors(last)
        .take_while(|s| s.0 <= max_symbol)
        .filter(|&s| s >= first)
        .collect();
    for s in next {
        word.push(s);
        extend(ts, max_symbol, max_period, word, out);
        word.pop();
    }
}

/// Strictly smaller than each of its proper rotations.
fn is_lyndon(w: &[Symbol]) -> bool {
    let n = w.len();
    (1..n).all(|r| (0..n).map(|j| w[j].cmp(&w[(r + j) % n])).find(|o| o.is_ne()) == Some(std::cmp::Ordering::Less))
}

/// Random walks that favour the least successor, closed back to their start.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSampler {
    pub max_symbol: u64,
    pub max_period: usize,
    /// Probability of stepping to the least allowed successor.
    pub bias: f64,
}

impl OrbitSampler {
    fn walk(&self, ts: &dyn TransitionSystem, rng: &mut impl Rng, start: Symbol, len: usize) -> Option<Vec<Symbol>> {
        let mut w = vec![start];
        while w.len() < len {
            let next: Vec<Symbol> = ts
                .successors(*w.last().unwrap())
                .take_while(|s| s.0 <= self.max_symbol)
                .collect();
            if next.is_empty() {
                return None;
            }
            let s = if rng.gen_bool(self.bias) {
                next[0]
            } else {
                next[rng.gen_range(0..next.len())]
            };
            w.push(s);
        }
        Some(w)
    }

    fn closer(&self, ts: &dyn TransitionSystem, from: Symbol, to: Symbol) -> Option<Word> {
        let policy = ConnectPolicy {
            max_symbol: self.max_symbol,
            max_len: self.max_period,
        };
        connect(ts, from, to, &policy).ok()
    }

    pub fn sample(&self, ts: &dyn TransitionSystem, rng: &mut impl Rng, start: Symbol) -> Option<PeriodicOrbit> {
        let len = rng.gen_range(1..=self.max_period);
        let mut w = self.walk(ts, rng, start, len)?;
        let tail = self.closer(ts, *w.last().unwrap(), start)?;
        w.extend_from_slice(tail.symbols());
        PeriodicOrbit::new(Word::new(w), ts).ok()
    }

    /// An allowable word from `start` that returns to `start` at its end.
    pub fn sample_prefix(&self, ts: &dyn TransitionSystem, rng: &mut impl Rng, start: Symbol) -> Option<Word> {
        let len = rng.gen_range(1..=self.max_period);
        let mut w = self.walk(ts, rng, start, len)?;
        let tail = self.closer(ts, *w.last().unwrap(), start)?;
        w.extend_from_slice(tail.symbols());
        w.push(start);
        Some(Word::new(w))
    }
}

/// Random digraph on `n` vertices; each ordered pair (loops included) is an
/// edge with probability `density`, weighted by a fraction in `[-10, 10]`
/// with denominator at most 4.
pub fn random_graph(rng: &mut impl Rng, n: usize, density: f64) -> WeightedGraph<Rational> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if rng.gen_bool(density) {
                let q: i64 = rng.gen_range(1..=4);
                let p: i64 = rng.gen_range(-10 * q..=10 * q);
                edges.push((u, v, int(p) / int(q)));
            }
        }
    }
    WeightedGraph::from_edges(n, edges)
}
