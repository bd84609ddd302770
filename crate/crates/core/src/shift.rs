//! Countable transition structures and their finite restrictions.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Symbol, Word};

/// A 0/1 matrix on `ℕ × ℕ`, presented as a predicate plus an ordered
/// successor enumerator.
pub trait TransitionSystem: Send + Sync + fmt::Debug {
    fn allowed(&self, i: Symbol, j: Symbol) -> bool;

    /// `{ j : allowed(i, j) }` in strictly increasing order. May be infinite.
    fn successors<'a>(&'a self, i: Symbol) -> Box<dyn Iterator<Item = Symbol> + 'a>;

    /// The caller's declaration that the countable system is irreducible.
    /// Only finite restrictions are ever verified.
    fn irreducible_asserted(&self) -> bool {
        true
    }

    fn describe(&self) -> String;
}

/// Every transition allowed.
#[derive(Debug, Clone, Copy, Default)]
pub struct FullShift;

impl TransitionSystem for FullShift {
    fn allowed(&self, _i: Symbol, _j: Symbol) -> bool {
        true
    }

    fn successors<'a>(&'a self, _i: Symbol) -> Box<dyn Iterator<Item = Symbol> + 'a> {
        Box::new((0u64..).map(Symbol))
    }

    fn describe(&self) -> String {
        "full".into()
    }
}

/// `A(i, 0) = A(i, i + 1) = 1`, everything else forbidden.
#[derive(Debug, Clone, Copy, Default)]
pub struct Renewal;

impl TransitionSystem for Renewal {
    fn allowed(&self, i: Symbol, j: Symbol) -> bool {
        j.0 == 0 || j.0 == i.0 + 1
    }

    fn successors<'a>(&'a self, i: Symbol) -> Box<dyn Iterator<Item = Symbol> + 'a> {
        Box::new(std::iter::once(Symbol(0)).chain(std::iter::once(Symbol(i.0 + 1))))
    }

    fn describe(&self) -> String {
        "renewal".into()
    }
}

/// `A(i, j) = 1` iff `|i - j| <= width`.
#[derive(Debug, Clone, Copy)]
pub struct Band {
    width: u64,
}

impl Band {
    pub fn new(width: u64) -> Self {
        Band { width }
    }
}

impl TransitionSystem for Band {
    fn allowed(&self, i: Symbol, j: Symbol) -> bool {
        i.0.abs_diff(j.0) <= self.width
    }

    fn successors<'a>(&'a self, i: Symbol) -> Box<dyn Iterator<Item = Symbol> + 'a> {
        Box::new((i.0.saturating_sub(self.width)..=i.0 + self.width).map(Symbol))
    }

    // Width zero leaves every symbol isolated.
    fn irreducible_asserted(&self) -> bool {
        self.width > 0
    }

    fn describe(&self) -> String {
        format!("band:{}", self.width)
    }
}

/// Named rule used beyond the support of an explicit edge list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailRule {
    None,
    Full,
    Renewal,
    Band(u64),
}

impl TailRule {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(TailRule::None),
            "full" => Ok(TailRule::Full),
            "renewal" => Ok(TailRule::Renewal),
            other => match other.strip_prefix("band:").map(str::parse::<u64>) {
                Some(Ok(b)) => Ok(TailRule::Band(b)),
                _ => Err(Error::Config(format!("unknown tail rule `{other}`"))),
            },
        }
    }

    fn system(self) -> Option<Box<dyn TransitionSystem>> {
        match self {
            TailRule::None => None,
            TailRule::Full => Some(Box::new(FullShift)),
            TailRule::Renewal => Some(Box::new(Renewal)),
            TailRule::Band(b) => Some(Box::new(Band::new(b))),
        }
    }
}

impl fmt::Display for TailRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailRule::None => f.write_str("none"),
            TailRule::Full => f.write_str("full"),
            TailRule::Renewal => f.write_str("renewal"),
            TailRule::Band(b) => write!(f, "band:{b}"),
        }
    }
}

/// Explicit edges on `{0, .., support_max}`; any pair with a symbol above
/// `support_max` follows the tail rule.
#[derive(Debug)]
pub struct ExplicitShift {
    edges: BTreeMap<Symbol, BTreeSet<Symbol>>,
    support_max: Symbol,
    tail_rule: TailRule,
    tail: Option<Box<dyn TransitionSystem>>,
    irreducible: bool,
}

impl ExplicitShift {
    pub fn new(pairs: impl IntoIterator<Item = (Symbol, Symbol)>, tail_rule: TailRule, irreducible: bool) -> Self {
        let mut edges: BTreeMap<Symbol, BTreeSet<Symbol>> = BTreeMap::new();
        let mut support_max = Symbol(0);
        for (i, j) in pairs {
            support_max = support_max.max(i).max(j);
            edges.entry(i).or_default().insert(j);
        }
        ExplicitShift {
            edges,
            support_max,
            tail_rule,
            tail: tail_rule.system(),
            irreducible,
        }
    }

    /// One `i j` pair per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str, tail_rule: TailRule, irreducible: bool) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<u64>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(i)), Some(Ok(j)), None) => pairs.push((Symbol(i), Symbol(j))),
                _ => {
                    return Err(Error::Config(format!(
                        "adjacency line {}: expected `i j`, got `{line}`",
                        lineno + 1
                    )))
                }
            }
        }
        if pairs.is_empty() {
            return Err(Error::Config("adjacency file lists no edges".into()));
        }
        Ok(Self::new(pairs, tail_rule, irreducible))
    }

    pub fn from_file(path: &Path, tail_rule: TailRule, irreducible: bool) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, tail_rule, irreducible)
    }
}

impl TransitionSystem for ExplicitShift {
    fn allowed(&self, i: Symbol, j: Symbol) -> bool {
        if i <= self.support_max && j <= self.support_max {
            self.edges.get(&i).is_some_and(|s| s.contains(&j))
        } else {
            self.tail.as_ref().is_some_and(|t| t.allowed(i, j))
        }
    }

    fn successors<'a>(&'a self, i: Symbol) -> Box<dyn Iterator<Item = Symbol> + 'a> {
        let max = self.support_max;
        let tail = self.tail.as_deref();
        if i <= max {
            let listed = self.edges.get(&i).into_iter().flat_map(|s| s.iter().copied());
            let beyond = tail.into_iter().flat_map(move |t| t.successors(i).filter(move |&j| j > max));
            Box::new(listed.chain(beyond))
        } else {
            match tail {
                Some(t) => t.successors(i),
                None => Box::new(std::iter::empty()),
            }
        }
    }

    fn irreducible_asserted(&self) -> bool {
        self.irreducible
    }

    fn describe(&self) -> String {
        let n: usize = self.edges.values().map(BTreeSet::len).sum();
        format!("adjacency-file: {n} edges on 0..={}, tail {}", self.support_max, self.tail_rule)
    }
}

/// Induced subgraph on a finite symbol set, with strongly connected
/// components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGraph {
    vertices: Vec<Symbol>,
    adjacency: Vec<Vec<usize>>,
    scc: Vec<usize>,
    scc_count: usize,
}

impl FiniteGraph {
    pub fn vertices(&self) -> &[Symbol] {
        &self.vertices
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn index_of(&self, s: Symbol) -> Option<usize> {
        self.vertices.binary_search(&s).ok()
    }

    pub fn edges(&self) -> Vec<(Symbol, Symbol)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, out)| out.iter().map(move |&v| (self.vertices[u], self.vertices[v])))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, i: Symbol, j: Symbol) -> bool {
        match (self.index_of(i), self.index_of(j)) {
            (Some(u), Some(v)) => self.adjacency[u].binary_search(&v).is_ok(),
            _ => false,
        }
    }

    /// Component label of every vertex, labels in `0..scc_count()`.
    pub fn scc_labels(&self) -> &[usize] {
        &self.scc
    }

    pub fn scc_count(&self) -> usize {
        self.scc_count
    }

    /// One strongly connected component covering every vertex and carrying
    /// at least one cycle. Aperiodicity is not required.
    pub fn is_irreducible(&self) -> bool {
        !self.vertices.is_empty() && self.scc_count == 1 && self.edge_count() > 0
    }
}

/// Restricts `ts` to the finite symbol set `symbols`.
pub fn restrict(ts: &dyn TransitionSystem, symbols: &[Symbol]) -> FiniteGraph {
    let mut vertices = symbols.to_vec();
    vertices.sort_unstable();
    vertices.dedup();
    let adjacency: Vec<Vec<usize>> = vertices
        .iter()
        .map(|&i| {
            vertices
                .iter()
                .enumerate()
                .filter(|&(_, &j)| ts.allowed(i, j))
                .map(|(v, _)| v)
                .collect()
        })
        .collect();
    let (scc, scc_count) = strongly_connected(&adjacency);
    FiniteGraph {
        vertices,
        adjacency,
        scc,
        scc_count,
    }
}

/// Iterative Tarjan. Returns the component label of every vertex and the
/// number of components; labels are assigned in reverse topological order.
pub fn strongly_connected(adjacency: &[Vec<usize>]) -> (Vec<usize>, usize) {
    const UNSEEN: usize = usize::MAX;
    let n = adjacency.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut label = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut next_index = 0usize;
    let mut count = 0usize;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        // (vertex, position in its adjacency list)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&w) = adjacency[v].get(*pos) {
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        label[w] = count;
                        if w == v {
                            break;
                        }
                    }
                    count += 1;
                }
            }
        }
    }
    (label, count)
}

/// Limits for the connecting-word search over a countable graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectPolicy {
    /// Largest symbol the search may route through.
    pub max_symbol: u64,
    /// Longest connecting word accepted.
    pub max_len: usize,
}

impl Default for ConnectPolicy {
    fn default() -> Self {
        ConnectPolicy {
            max_symbol: 1 << 16,
            max_len: 1 << 16,
        }
    }
}

/// Canonical word `w` with `i·w·j` allowable: least maximal symbol first,
/// then shortest, then lexicographically least. Empty iff `A(i, j) = 1`.
pub fn connect(ts: &dyn TransitionSystem, i: Symbol, j: Symbol, policy: &ConnectPolicy) -> Result<Word> {
    if !ts.irreducible_asserted() {
        return Err(Error::Precondition(format!(
            "connect needs an irreducible system, {} is not declared irreducible",
            ts.describe()
        )));
    }
    if ts.allowed(i, j) {
        return Ok(Word::empty());
    }
    let budget_error = || Error::Budget {
        from: i,
        to: j,
        budget: policy.max_symbol,
    };

    // Path existence is monotone in the ceiling: double, then bisect.
    let mut hi = 0u64;
    let found = loop {
        if let Some(w) = shortest_under_ceiling(ts, i, j, hi) {
            break w;
        }
        if hi >= policy.max_symbol {
            return Err(budget_error());
        }
        hi = (hi.saturating_mul(2).max(1)).min(policy.max_symbol);
    };
    let mut best = found;
    // ceilings below `lo` are known to fail, `top` succeeds
    let mut lo = if hi == 0 { 0 } else { hi / 2 + 1 };
    let mut top = hi;
    while lo < top {
        let mid = lo + (top - lo) / 2;
        match shortest_under_ceiling(ts, i, j, mid) {
            Some(w) => {
                best = w;
                top = mid;
            }
            None => lo = mid + 1,
        }
    }
    if best.len() > policy.max_len {
        return Err(budget_error());
    }
    debug_assert!(crate::types::is_allowable(
        &[&[i][..], best.symbols(), &[j][..]].concat(),
        ts
    ));
    Ok(best)
}

/// Shortest, then lexicographically least, nonempty interior path from `i`
/// to `j` through symbols `<= ceiling`.
fn shortest_under_ceiling(ts: &dyn TransitionSystem, i: Symbol, j: Symbol, ceiling: u64) -> Option<Word> {
    let n = ceiling as usize + 1;
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            ts.successors(Symbol(v as u64))
                .take_while(|s| s.0 <= ceiling)
                .map(|s| s.0 as usize)
                .collect()
        })
        .collect();
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, out) in succ.iter().enumerate() {
        for &w in out {
            pred[w].push(v);
        }
    }
    // edges from v to j
    const INF: usize = usize::MAX;
    let mut dist = vec![INF; n];
    let mut queue = VecDeque::new();
    for v in 0..n {
        if ts.allowed(Symbol(v as u64), j) {
            dist[v] = 1;
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &u in &pred[v] {
            if dist[u] == INF {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    let first: Vec<usize> = ts
        .successors(i)
        .take_while(|s| s.0 <= ceiling)
        .map(|s| s.0 as usize)
        .collect();
    let best_len = first.iter().map(|&v| dist[v]).min().filter(|&d| d != INF)?;
    let mut word = Vec::with_capacity(best_len);
    let mut remaining = best_len;
    let mut choices = first;
    loop {
        let v = *choices.iter().find(|&&v| dist[v] == remaining)?;
        word.push(Symbol(v as u64));
        remaining -= 1;
        if remaining == 0 {
            break;
        }
        choices = succ[v].clone();
    }
    Some(Word::new(word))
}
