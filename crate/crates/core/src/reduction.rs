//! The two-cut reduction to a finite alphabet.
//!
//! 1. A first cut `I1` below which every cylinder sup stays under
//!    `β - ε`, certified against a lower bound for `β`.
//! 2. The hull `A1`: the symbols `< I1` closed under one canonical connecting
//!    word per ordered pair; `P0` is the longest such word.
//! 3. The constants
//!    `C1 = -(P0·|min f on Σ(A1)| + (P0 - 1)·|β| + 2V)`,
//!    `C2 = β - ε - V` and `C = min(C1, C2)`.
//! 4. A second cut `I2 >= I1` beyond which cylinder sups stay under `C`,
//!    its hull `A2 ⊇ A1`, and the margin `δ = C - sup_{j >= I2} sup f|[j]`.
//!
//! `β` is unknown up front, so `β` is replaced by a certified lower bound in
//! `C2` and in the first cut, and `|β|` in `C1` by whichever certified bound
//! keeps `C1` from growing.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lift::lift;
use crate::mmc::max_mean_cycle;
use crate::numeric::{Rational, Scalar};
use crate::potential::{cylinder_sup_query, Potential};
use crate::shift::{connect, restrict, strongly_connected, ConnectPolicy, TransitionSystem};
use crate::types::{Symbol, Word};

/// Symbols below a cut, closed under a table of connecting words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphabetHull {
    pub cut: Symbol,
    /// Symbols `< cut` that lie on some cycle.
    pub base_cut: Vec<Symbol>,
    /// Symbols `< cut` on no cycle within the search budget.
    pub dropped: Vec<Symbol>,
    #[serde(with = "table_serde")]
    pub connect_table: BTreeMap<(Symbol, Symbol), Word>,
    pub extra_symbols: Vec<Symbol>,
    pub symbols: Vec<Symbol>,
    pub p0: usize,
}

impl AlphabetHull {
    pub fn connector(&self, from: Symbol, to: Symbol) -> Option<&Word> {
        self.connect_table.get(&(from, to))
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.symbols.binary_search(&s).is_ok()
    }
}

mod table_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        from: Symbol,
        to: Symbol,
        word: Word,
    }

    pub fn serialize<S: Serializer>(t: &BTreeMap<(Symbol, Symbol), Word>, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = t
            .iter()
            .map(|(&(from, to), word)| Entry {
                from,
                to,
                word: word.clone(),
            })
            .collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<(Symbol, Symbol), Word>, D::Error> {
        let entries = Vec::<Entry>::deserialize(d)?;
        Ok(entries.into_iter().map(|e| ((e.from, e.to), e.word)).collect())
    }
}

/// Builds the hull of `{0, .., cut - 1}` under canonical connecting words.
pub fn build_hull(ts: &dyn TransitionSystem, cut: Symbol, policy: &ConnectPolicy) -> Result<AlphabetHull> {
    if cut.0 == 0 {
        return Err(Error::Precondition("hull cut must be at least 1".into()));
    }
    let mut base_cut = Vec::new();
    let mut dropped = Vec::new();
    let mut table = BTreeMap::new();
    for i in (0..cut.0).map(Symbol) {
        match connect(ts, i, i, policy) {
            Ok(w) => {
                base_cut.push(i);
                table.insert((i, i), w);
            }
            Err(Error::Budget { .. }) => dropped.push(i),
            Err(e) => return Err(e),
        }
    }
    if base_cut.is_empty() {
        return Err(Error::Construction(format!(
            "no symbol below {cut} lies on a cycle of {}",
            ts.describe()
        )));
    }
    for &i in &base_cut {
        for &j in &base_cut {
            if i != j {
                table.insert((i, j), connect(ts, i, j, policy)?);
            }
        }
    }
    hull_from_table(ts, cut, base_cut, dropped, table, &[])
}

fn hull_from_table(
    ts: &dyn TransitionSystem,
    cut: Symbol,
    base_cut: Vec<Symbol>,
    dropped: Vec<Symbol>,
    table: BTreeMap<(Symbol, Symbol), Word>,
    also: &[Symbol],
) -> Result<AlphabetHull> {
    let base: BTreeSet<Symbol> = base_cut.iter().copied().collect();
    let mut all: BTreeSet<Symbol> = base.clone();
    for w in table.values() {
        all.extend(w.symbols().iter().copied());
    }
    all.extend(also.iter().copied());
    let extra_symbols: Vec<Symbol> = all.difference(&base).copied().collect();
    let symbols: Vec<Symbol> = all.into_iter().collect();
    let p0 = table.values().map(Word::len).max().unwrap_or(0);
    if !restrict(ts, &symbols).is_irreducible() {
        return Err(Error::Construction(format!(
            "restriction of {} to {:?} is not irreducible",
            ts.describe(),
            symbols.iter().map(|s| s.0).collect::<Vec<_>>()
        )));
    }
    Ok(AlphabetHull {
        cut,
        base_cut,
        dropped,
        connect_table: table,
        extra_symbols,
        symbols,
        p0,
    })
}

/// Adds `inner`'s symbols to `outer`, re-verifying irreducibility.
pub fn extend_hull(ts: &dyn TransitionSystem, outer: AlphabetHull, inner: &AlphabetHull) -> Result<AlphabetHull> {
    hull_from_table(
        ts,
        outer.cut,
        outer.base_cut,
        outer.dropped,
        outer.connect_table,
        &inner.symbols,
    )
}

/// Least `I` such that every cylinder sup at `j >= I` is certified below
/// `threshold`, together with the index `J >= I` from which the tail
/// certificate alone carries the bound.
pub fn least_certified_cut<S: Scalar>(p: &dyn Potential, threshold: &S) -> Result<(Symbol, Symbol)> {
    let start = p.tail_start().0;
    let below = |j: u64| S::from_rational(&p.tail_certificate(Symbol(j))).certified_lt(threshold);
    // exponential probe, then bisection on the nonincreasing certificate
    let mut hi_off = 0u64;
    let mut lo_off: Option<u64> = None;
    loop {
        let j = start.checked_add(hi_off).ok_or_else(|| not_coercive(p, threshold))?;
        if below(j) {
            break;
        }
        if hi_off >= 1 << 62 {
            return Err(not_coercive(p, threshold));
        }
        lo_off = Some(hi_off);
        hi_off = if hi_off == 0 { 1 } else { hi_off * 2 };
    }
    let mut lo = lo_off.map(|o| start + o + 1).unwrap_or(start);
    let mut hi = start + hi_off;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if below(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let tail_from = hi;
    let mut cut = tail_from;
    while cut > 0 && S::from_rational(&cylinder_sup_query(p, Symbol(cut - 1))).certified_lt(threshold) {
        cut -= 1;
    }
    Ok((Symbol(cut), Symbol(tail_from)))
}

fn not_coercive<S: Scalar>(p: &dyn Potential, threshold: &S) -> Error {
    Error::Certification(format!(
        "tail certificate of {} never drops below {threshold}",
        p.describe()
    ))
}

/// `max(sup f|[j] for from <= j < tail_from, T(tail_from))`, an upper bound
/// for `sup_{j >= from} sup f|[j]` when `tail_from >= max(from, tail_start)`.
pub fn tail_sup(p: &dyn Potential, from: Symbol, tail_from: Symbol) -> Rational {
    debug_assert!(tail_from >= from && tail_from >= p.tail_start());
    (from.0..tail_from.0)
        .map(|j| cylinder_sup_query(p, Symbol(j)))
        .fold(p.tail_certificate(tail_from), |a, b| if b > a { b } else { a })
}

/// First cut: least `I1 >= 1` with every cylinder sup at `j >= I1` certified
/// below `beta_lb - epsilon`.
pub fn find_i1<S: Scalar>(p: &dyn Potential, beta_lb: &S, epsilon: &S) -> Result<Symbol> {
    if !(epsilon.clone() > S::zero()) {
        return Err(Error::Precondition("epsilon must be positive".into()));
    }
    let threshold = beta_lb.clone() - epsilon.clone();
    let (cut, _) = least_certified_cut(p, &threshold)?;
    Ok(Symbol(cut.0.max(1)))
}

/// Exact minimum of `f` over the k-words that lie on bi-infinite paths of the
/// restriction to `hull.symbols`.
pub fn min_over_subshift(p: &dyn Potential, hull: &AlphabetHull, ts: &dyn TransitionSystem) -> Result<Rational> {
    let wg = lift(&restrict(ts, &hull.symbols), p)?;
    let adjacency = wg.adjacency();
    let n = adjacency.len();
    let (label, count) = strongly_connected(&adjacency);
    let mut size = vec![0usize; count];
    for &c in &label {
        size[c] += 1;
    }
    let cyclic: Vec<bool> = (0..n)
        .map(|v| size[label[v]] > 1 || adjacency[v].contains(&v))
        .collect();
    let mut reverse = vec![Vec::new(); n];
    for (u, out) in adjacency.iter().enumerate() {
        for &v in out {
            reverse[v].push(u);
        }
    }
    let reach = |graph: &[Vec<usize>]| {
        let mut seen = cyclic.clone();
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| cyclic[v]).collect();
        while let Some(v) = queue.pop_front() {
            for &w in &graph[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    };
    let forward = reach(&adjacency);
    let backward = reach(&reverse);
    (0..n)
        .filter(|&v| forward[v] && backward[v])
        .map(|v| p.eval(wg.label(v).symbols()))
        .min()
        .ok_or_else(|| Error::Construction(format!("subshift on {:?} is empty", hull.symbols)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constants<S> {
    pub min_f: S,
    pub c1: S,
    pub c2: S,
    pub c: S,
}

/// `C1`, `C2` and `C = min(C1, C2)` for the hull of the first cut, given
/// certified bounds `beta_abs = (lower, upper)` for `|β|`.
pub fn compute_constants<S: Scalar>(
    p: &dyn Potential,
    ts: &dyn TransitionSystem,
    hull1: &AlphabetHull,
    beta_lb: &S,
    beta_abs: (&S, &S),
    epsilon: &S,
) -> Result<Constants<S>> {
    let min_f = S::from_rational(&min_over_subshift(p, hull1, ts)?);
    let v = S::from_rational(&p.total_variation());
    let p0 = S::from_int(hull1.p0 as i64);
    let p0_minus_one = S::from_int(hull1.p0 as i64 - 1);
    let two = S::from_int(2);
    // (P0 - 1)|β| is bounded above: by the upper bound of |β| when the
    // coefficient is non-negative, by its lower bound when P0 = 0
    let (abs_lb, abs_ub) = beta_abs;
    let beta_abs = if hull1.p0 == 0 { abs_lb } else { abs_ub };
    let c1 = -(p0 * min_f.abs() + p0_minus_one * beta_abs.clone() + two * v.clone());
    let c2 = beta_lb.clone() - epsilon.clone() - v;
    let c = S::min_of(c1.clone(), c2.clone());
    Ok(Constants { min_f, c1, c2, c })
}

/// How the cuts are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Thresholds {
    /// Cuts derived from the tail certificate.
    Coercive,
    /// Caller-supplied cuts. Unless `unchecked`, both are verified against
    /// the certified bounds and rejected when they fail.
    User { i1: u64, i2: u64, unchecked: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReduceOptions<S> {
    pub epsilon: S,
    pub thresholds: Thresholds,
    pub refine: bool,
    pub connect: ConnectPolicy,
    /// Largest truncation `{0, .., N-1}` searched for a first cycle.
    pub truncation_limit: u64,
    /// Overrides the truncation search for the lower bound of `β`.
    pub beta_lb: Option<S>,
}

impl<S: Scalar> ReduceOptions<S> {
    pub fn new(epsilon: S) -> Self {
        ReduceOptions {
            epsilon,
            thresholds: Thresholds::Coercive,
            refine: false,
            connect: ConnectPolicy::default(),
            truncation_limit: 1 << 12,
            beta_lb: None,
        }
    }
}

/// Full record of the construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction<S> {
    pub epsilon: S,
    pub beta_lb: S,
    pub beta_abs_lb: S,
    pub beta_abs_ub: S,
    pub variation: S,
    pub i1: Symbol,
    pub hull1: AlphabetHull,
    pub min_f_a1: S,
    pub c1: S,
    pub c2: S,
    pub c: S,
    pub i2: Symbol,
    pub hull2: AlphabetHull,
    /// Certified bound for `sup_{j >= I2} sup f|[j]`.
    pub tail_sup: S,
    pub delta: S,
    pub thresholds: Thresholds,
    /// False only for unchecked user thresholds that failed verification.
    pub certified: bool,
    pub refined: bool,
    pub notes: Vec<String>,
}

impl<S: Scalar> Reduction<S> {
    pub fn i1_contains(&self, s: Symbol) -> bool {
        s < self.i1
    }
}

/// Heaviest cycle mean in the first truncation `{0, .., N-1}` that has a
/// cycle; any periodic orbit average bounds `β` from below.
pub fn truncation_lower_bound<S: Scalar>(p: &dyn Potential, ts: &dyn TransitionSystem, limit: u64) -> Result<S> {
    let mut n = 1u64;
    loop {
        let symbols: Vec<Symbol> = (0..n).map(Symbol).collect();
        if let Ok(wg) = lift(&restrict(ts, &symbols), p) {
            if let Ok(best) = max_mean_cycle(&wg.map_weights(S::from_rational)) {
                return Ok(best.value);
            }
        }
        if n >= limit {
            return Err(Error::Construction(format!(
                "no periodic orbit over symbols below {limit}"
            )));
        }
        n = (n * 2).min(limit);
    }
}

pub fn reduce<S: Scalar>(p: &dyn Potential, ts: &dyn TransitionSystem, opts: &ReduceOptions<S>) -> Result<Reduction<S>> {
    if !(opts.epsilon > S::zero()) {
        return Err(Error::Precondition("epsilon must be positive".into()));
    }
    let beta_lb = match &opts.beta_lb {
        Some(b) => b.clone(),
        None => truncation_lower_bound(p, ts, opts.truncation_limit)?,
    };
    let red = reduce_with_bound(p, ts, opts, beta_lb)?;
    if opts.refine {
        refine(p, ts, opts, &red)
    } else {
        Ok(red)
    }
}

/// Re-runs the construction with `β_lb` raised to the optimum on `A2`.
/// Never loosens the cuts; a second pass is a fixed point.
pub fn refine<S: Scalar>(
    p: &dyn Potential,
    ts: &dyn TransitionSystem,
    opts: &ReduceOptions<S>,
    red: &Reduction<S>,
) -> Result<Reduction<S>> {
    let wg = lift(&restrict(ts, &red.hull2.symbols), p)?.map_weights(S::from_rational);
    let beta = max_mean_cycle(&wg)?.value;
    let lb = S::max_of(beta, red.beta_lb.clone());
    let mut refined = reduce_with_bound(p, ts, opts, lb)?;
    refined.refined = true;
    Ok(refined)
}

pub fn reduce_with_bound<S: Scalar>(
    p: &dyn Potential,
    ts: &dyn TransitionSystem,
    opts: &ReduceOptions<S>,
    beta_lb: S,
) -> Result<Reduction<S>> {
    let eps = opts.epsilon.clone();
    if !(eps > S::zero()) {
        return Err(Error::Precondition("epsilon must be positive".into()));
    }
    let mut notes = Vec::new();
    let mut certified = true;
    let global_sup = S::from_rational(&p.global_sup());
    let beta_abs_ub = S::max_of(beta_lb.abs(), global_sup.abs());
    let beta_abs_lb = S::max_of(S::max_of(S::zero(), beta_lb.clone()), -global_sup);
    let first_threshold = beta_lb.clone() - eps.clone();

    let i1 = match opts.thresholds {
        Thresholds::Coercive => find_i1(p, &beta_lb, &eps)?,
        Thresholds::User { i1, i2, unchecked } => {
            if i1 == 0 || i2 < i1 {
                return Err(Error::Precondition(format!(
                    "user cuts need 0 < I1 <= I2, got I1 = {i1}, I2 = {i2}"
                )));
            }
            match least_certified_cut(p, &first_threshold) {
                Ok((least, _)) if least.0 <= i1 => {}
                outcome => {
                    let msg = match outcome {
                        Ok((least, _)) => format!(
                            "user I1 = {i1} is below the least certified first cut {least} for threshold {first_threshold}"
                        ),
                        Err(e) => format!("user I1 = {i1} cannot be certified: {e}"),
                    };
                    if !unchecked {
                        return Err(Error::Certification(msg));
                    }
                    notes.push(msg);
                    certified = false;
                }
            }
            Symbol(i1)
        }
    };

    let hull1 = build_hull(ts, i1, &opts.connect)?;
    if !hull1.dropped.is_empty() {
        notes.push(format!(
            "first cut: symbols {:?} lie on no cycle and were left out",
            hull1.dropped.iter().map(|s| s.0).collect::<Vec<_>>()
        ));
    }
    let k = compute_constants(p, ts, &hull1, &beta_lb, (&beta_abs_lb, &beta_abs_ub), &eps)?;

    let (i2, tail_from) = match opts.thresholds {
        Thresholds::Coercive => {
            let (least, tail_from) = least_certified_cut(p, &k.c)?;
            let i2 = least.max(i1);
            (i2, tail_from.max(i2))
        }
        Thresholds::User { i2, unchecked, .. } => {
            let i2 = Symbol(i2);
            match least_certified_cut(p, &k.c) {
                Ok((least, tail_from)) if least <= i2 => (i2, tail_from.max(i2)),
                outcome => {
                    let msg = match outcome {
                        Ok((least, _)) => format!(
                            "user I2 = {i2} is below the least certified second cut {least} for C = {}",
                            k.c
                        ),
                        Err(e) => format!("user I2 = {i2} cannot be certified: {e}"),
                    };
                    if !unchecked {
                        return Err(Error::Certification(msg));
                    }
                    notes.push(msg);
                    certified = false;
                    (i2, i2.max(p.tail_start()))
                }
            }
        }
    };

    let sup_beyond = S::from_rational(&tail_sup(p, i2, tail_from));
    let delta = k.c.clone() - sup_beyond.clone();
    if certified && !(delta > S::zero()) {
        return Err(Error::Construction(format!(
            "internal invariant violated: delta = {delta} is not positive"
        )));
    }
    if !certified {
        notes.push(format!("delta = {delta} is not certified"));
    }

    let hull2 = extend_hull(ts, build_hull(ts, i2, &opts.connect)?, &hull1)?;
    if !hull2.dropped.is_empty() {
        notes.push(format!(
            "second cut: symbols {:?} lie on no cycle and were left out",
            hull2.dropped.iter().map(|s| s.0).collect::<Vec<_>>()
        ));
    }

    Ok(Reduction {
        epsilon: eps,
        beta_lb,
        beta_abs_lb,
        beta_abs_ub,
        variation: S::from_rational(&p.total_variation()),
        i1,
        hull1,
        min_f_a1: k.min_f,
        c1: k.c1,
        c2: k.c2,
        c: k.c,
        i2,
        hull2,
        tail_sup: sup_beyond,
        delta,
        thresholds: opts.thresholds,
        certified,
        refined: false,
        notes,
    })
}
