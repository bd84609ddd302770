//! Orbit surgery: the constructive steps that show orbits leaving the
//! reduced alphabet are beaten.
//!
//! A periodic orbit that starts below `I1` and visits some symbol `>= I2`
//! contains words `x_ℓ .. x_{ℓ+m}` with `x_ℓ < I1`, `x_{ℓ+m} >= I2` and
//! everything in between `< I2`. Cutting such a word after its last symbol
//! below `I1` and closing it with a connecting word from the first hull gives
//! an orbit on `A2` whose average is higher by at least `δ/(r+2)`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::numeric::{int, Rational, Scalar};
use crate::potential::Potential;
use crate::reduction::Reduction;
use crate::shift::TransitionSystem;
use crate::types::{orbit_average, starts_in, PeriodicOrbit, Symbol, Word};

/// `x_ℓ .. x_{ℓ+m}` inside a periodic orbit, with `r` the last offset
/// before `m` whose symbol is below `I1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaximalWord {
    pub ell: usize,
    pub m: usize,
    pub r: usize,
    pub kappa: Rational,
    pub kappa_r: Rational,
    /// `κ >= β(x)`; guaranteed for some word when `β(x) >= β - ε`.
    pub dominates_average: bool,
}

fn f_at(p: &dyn Potential, x: &PeriodicOrbit, i: usize) -> Rational {
    p.eval(&x.window(i, p.memory()))
}

/// `κ = (1/(m+1)) Σ_{j=0}^{m} f(σ^{ℓ+j} x)` and
/// `κ_r = (1/(r+2)) (f(σ^{ℓ+m} x) + Σ_{j=0}^{r} f(σ^{ℓ+j} x))`.
pub fn kappa_pair(p: &dyn Potential, x: &PeriodicOrbit, ell: usize, m: usize, r: usize) -> (Rational, Rational) {
    let head: Rational = (0..=r).map(|j| f_at(p, x, ell + j)).sum();
    let all: Rational = (0..=m).map(|j| f_at(p, x, ell + j)).sum();
    let kappa = all / int(m as i64 + 1);
    let kappa_r = (head + f_at(p, x, ell + m)) / int(r as i64 + 2);
    (kappa, kappa_r)
}

fn applicable<S: Scalar>(x: &PeriodicOrbit, red: &Reduction<S>) -> Result<()> {
    if starts_in(x) >= red.i1 {
        return Err(Error::NotApplicable(format!(
            "{x} starts in {} >= I1 = {}",
            starts_in(x),
            red.i1
        )));
    }
    if x.symbols().iter().all(|&s| s < red.i2) {
        return Err(Error::NotApplicable(format!("{x} has no symbol >= I2 = {}", red.i2)));
    }
    Ok(())
}

/// Every word meeting the start/end/interior conditions, one per start
/// position `ℓ` with `x_ℓ < I1`.
pub fn maximal_word_candidates<S: Scalar>(p: &dyn Potential, x: &PeriodicOrbit, red: &Reduction<S>) -> Result<Vec<MaximalWord>> {
    applicable(x, red)?;
    let n = x.period();
    let average = orbit_average(p, x);
    let mut out = Vec::new();
    for ell in (0..n).filter(|&l| x.at(l) < red.i1) {
        let m = (1..=n).find(|&j| x.at(ell + j) >= red.i2).expect("some symbol is >= I2");
        let r = (0..m).rev().find(|&j| x.at(ell + j) < red.i1).expect("x_ℓ is below I1");
        let (kappa, kappa_r) = kappa_pair(p, x, ell, m, r);
        out.push(MaximalWord {
            ell,
            m,
            r,
            dominates_average: kappa >= average,
            kappa,
            kappa_r,
        });
    }
    Ok(out)
}

/// The candidate with the greatest `κ`, ties to the smallest `ℓ`.
pub fn find_maximal_word<S: Scalar>(p: &dyn Potential, x: &PeriodicOrbit, red: &Reduction<S>) -> Result<MaximalWord> {
    let mut best: Option<MaximalWord> = None;
    for c in maximal_word_candidates(p, x, red)? {
        if best.as_ref().is_none_or(|b| c.kappa > b.kappa) {
            best = Some(c);
        }
    }
    best.ok_or_else(|| Error::NotApplicable(format!("{x} has no symbol below I1")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splice<S> {
    pub word: MaximalWord,
    pub connector: Word,
    pub z: PeriodicOrbit,
    /// `δ / (r + 2)`.
    pub gap: S,
}

/// Replaces `x` by the orbit of `x_ℓ .. x_{ℓ+r} w`, `w` the first-hull word
/// connecting `x_{ℓ+r}` back to `x_ℓ`.
pub fn splice<S: Scalar>(p: &dyn Potential, ts: &dyn TransitionSystem, x: &PeriodicOrbit, red: &Reduction<S>) -> Result<Splice<S>> {
    if x.contains_only(&red.hull2.symbols) {
        return Err(Error::NotApplicable(format!("{x} already lies in the reduced alphabet")));
    }
    let word = find_maximal_word(p, x, red)?;
    let (from, to) = (x.at(word.ell + word.r), x.at(word.ell));
    let connector = red
        .hull1
        .connector(from, to)
        .cloned()
        .ok_or_else(|| Error::Construction(format!("first hull has no word connecting {from} to {to}")))?;
    let mut period = x.window(word.ell, word.r + 1);
    period.extend_from_slice(connector.symbols());
    let z = PeriodicOrbit::new(Word::new(period), ts)
        .map_err(|e| Error::Construction(format!("spliced orbit is not allowable: {e}")))?;
    if !z.contains_only(&red.hull2.symbols) {
        return Err(Error::Construction(format!("spliced orbit {z} leaves the reduced alphabet")));
    }
    let gap = red.delta.clone() / S::from_int(word.r as i64 + 2);
    Ok(Splice { word, connector, z, gap })
}

/// One block `x_b .. x_a` replaced by `x_b y x_a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exchange {
    pub b: usize,
    pub a: usize,
    pub connector: Word,
    /// Sum of the terms at positions `b .. a` (exclusive) before the exchange.
    pub original_sum: Rational,
    /// Sum of the terms at `x_b` and across `y` after it.
    pub new_sum: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrefixImprovement<S> {
    pub m: usize,
    pub m_tilde: usize,
    pub exchanges: Vec<Exchange>,
    pub modified: Word,
    pub closing: Word,
    /// One period of `z` as constructed, before normalization.
    pub z_word: Word,
    pub z: PeriodicOrbit,
    /// `S_m f(x)`.
    pub prefix_sum: Rational,
    /// `S_{m̃} f(x̃)`.
    pub modified_sum: Rational,
    /// `S_p f(z)` over the constructed period.
    pub z_sum: Rational,
    /// `S_m f(x) + kδ - 2V - (P0 + 1)|min f on Σ(A1)|`.
    pub sum_bound: S,
}

fn word_sum(p: &dyn Potential, w: &[Symbol], from: usize, to: usize) -> Rational {
    let k = p.memory();
    (from..to).map(|t| p.eval(&w[t..t + k])).sum()
}

fn cyclic_sum(p: &dyn Potential, w: &[Symbol]) -> Rational {
    let k = p.memory();
    let n = w.len();
    (0..n)
        .map(|t| {
            let window: Vec<Symbol> = (0..k).map(|j| w[(t + j) % n]).collect();
            p.eval(&window)
        })
        .sum()
}

/// Exchanges every block between consecutive symbols below `I1` that visits
/// a symbol `>= I2` for the first-hull connecting word, then closes the
/// modified prefix up to the last symbol below `I1` back to `x_0`.
pub fn improve_prefix<S: Scalar>(
    p: &dyn Potential,
    ts: &dyn TransitionSystem,
    x: &Word,
    red: &Reduction<S>,
) -> Result<PrefixImprovement<S>> {
    x.check_allowable(ts)?;
    let xs = x.symbols();
    let k = p.memory();
    if xs.is_empty() || xs[0] >= red.i1 {
        return Err(Error::Precondition("prefix must start below I1".into()));
    }
    // terms up to m - 1 need k symbols each
    let last = (xs.len() + 1).checked_sub(k).map(|v| v.min(xs.len() - 1));
    let m = last
        .and_then(|last| (0..=last).rev().find(|&i| xs[i] < red.i1))
        .ok_or_else(|| Error::Precondition(format!("prefix {x} is too short for memory {k}")))?;
    let small: Vec<usize> = (0..=m).filter(|&i| xs[i] < red.i1).collect();
    let blocks: Vec<(usize, usize)> = small
        .windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|&(b, a)| xs[b + 1..a].iter().any(|&s| s >= red.i2))
        .collect();
    if blocks.is_empty() {
        return Err(Error::NotApplicable(format!("prefix {x} has no block through a symbol >= I2")));
    }
    let lookup = |from: Symbol, to: Symbol| {
        red.hull1
            .connector(from, to)
            .cloned()
            .ok_or_else(|| Error::Construction(format!("first hull has no word connecting {from} to {to}")))
    };

    let mut out: Vec<Symbol> = Vec::with_capacity(xs.len());
    let mut cursor = 0;
    let mut placed = Vec::with_capacity(blocks.len());
    for &(b, a) in &blocks {
        out.extend_from_slice(&xs[cursor..=b]);
        let y = lookup(xs[b], xs[a])?;
        placed.push((out.len() - 1, y.len()));
        out.extend_from_slice(y.symbols());
        cursor = a;
    }
    out.extend_from_slice(&xs[cursor..]);
    let m_tilde = blocks
        .iter()
        .zip(&placed)
        .fold(m as i64, |acc, (&(b, a), &(_, q))| acc + q as i64 - (a - b - 1) as i64) as usize;

    let mut exchanges = Vec::with_capacity(blocks.len());
    for (&(b, a), &(new_b, q)) in blocks.iter().zip(&placed) {
        exchanges.push(Exchange {
            b,
            a,
            connector: Word::new(out[new_b + 1..new_b + 1 + q].to_vec()),
            original_sum: word_sum(p, xs, b, a),
            new_sum: word_sum(p, &out, new_b, new_b + q + 1),
        });
    }

    let closing = lookup(xs[m], xs[0])?;
    let mut z_symbols = out[..=m_tilde].to_vec();
    z_symbols.extend_from_slice(closing.symbols());
    let z_word = Word::new(z_symbols);
    let z = PeriodicOrbit::new(z_word.clone(), ts)
        .map_err(|e| Error::Construction(format!("closed orbit is not allowable: {e}")))?;

    let prefix_sum = word_sum(p, xs, 0, m);
    let modified_sum = word_sum(p, &out, 0, m_tilde);
    let z_sum = cyclic_sum(p, z_word.symbols());
    let sum_bound = S::from_rational(&prefix_sum) + S::from_int(exchanges.len() as i64) * red.delta.clone()
        - S::from_int(2) * red.variation.clone()
        - S::from_int(red.hull1.p0 as i64 + 1) * red.min_f_a1.abs();
    Ok(PrefixImprovement {
        m,
        m_tilde,
        exchanges,
        modified: Word::new(out),
        closing,
        z_word,
        z,
        prefix_sum,
        modified_sum,
        z_sum,
        sum_bound,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportVerdict {
    pub contained: bool,
    pub violations: Vec<Symbol>,
}

/// Whether every symbol of `x` lies in `A2`.
pub fn support_check<S: Scalar>(x: &PeriodicOrbit, red: &Reduction<S>) -> SupportVerdict {
    let violations: Vec<Symbol> = x
        .symbols()
        .iter()
        .filter(|s| !red.hull2.contains(**s))
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    SupportVerdict {
        contained: violations.is_empty(),
        violations,
    }
}
