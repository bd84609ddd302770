//! Weighted digraphs and the lift of a finite subshift with a finite-memory
//! potential.
//!
//! For memory `k` the vertices are the allowable `k`-words over the finite
//! alphabet, an edge joins `u` to `v` when `v` is `u` shifted by one symbol,
//! and the edge carries `f(u)`. Directed cycles then spell exactly the
//! cyclically allowable periodic words, and a cycle's mean weight is the
//! orbit average of the word it spells.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::numeric::{Rational, Scalar};
use crate::potential::Potential;
use crate::shift::FiniteGraph;
use crate::types::{Symbol, Word};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph<S> {
    labels: Vec<Word>,
    out: Vec<Vec<(usize, S)>>,
}

impl<S: Scalar> WeightedGraph<S> {
    /// Parallel edges collapse to the heaviest one; adjacency lists are
    /// sorted by target.
    pub fn new(labels: Vec<Word>, edges: impl IntoIterator<Item = (usize, usize, S)>) -> Self {
        let n = labels.len();
        let mut merged: Vec<BTreeMap<usize, S>> = vec![BTreeMap::new(); n];
        for (u, v, w) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) outside {n} vertices");
            let slot = merged[u].entry(v).or_insert_with(|| w.clone());
            if w > *slot {
                *slot = w;
            }
        }
        WeightedGraph {
            labels,
            out: merged.into_iter().map(|m| m.into_iter().collect()).collect(),
        }
    }

    /// Vertices labelled by their own index.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, S)>) -> Self {
        let labels = (0..n as u64).map(|i| Word::new(vec![Symbol(i)])).collect();
        Self::new(labels, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn label(&self, v: usize) -> &Word {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[Word] {
        &self.labels
    }

    pub fn out_edges(&self, v: usize) -> &[(usize, S)] {
        &self.out[v]
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<&S> {
        self.out[u]
            .binary_search_by_key(&v, |(t, _)| *t)
            .ok()
            .map(|i| &self.out[u][i].1)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &S)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, es)| es.iter().map(move |(v, w)| (u, *v, w)))
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        self.out.iter().map(|es| es.iter().map(|(v, _)| *v).collect()).collect()
    }

    pub fn map_weights<T: Scalar>(&self, f: impl Fn(&S) -> T) -> WeightedGraph<T> {
        WeightedGraph {
            labels: self.labels.clone(),
            out: self
                .out
                .iter()
                .map(|es| es.iter().map(|(v, w)| (*v, f(w))).collect())
                .collect(),
        }
    }

    /// Mean weight of the closed walk `cycle[0] -> cycle[1] -> .. -> cycle[0]`,
    /// or `None` if some edge is missing.
    pub fn cycle_mean(&self, cycle: &[usize]) -> Option<S> {
        if cycle.is_empty() {
            return None;
        }
        let mut total = S::zero();
        for (i, &u) in cycle.iter().enumerate() {
            let v = cycle[(i + 1) % cycle.len()];
            total = total + self.weight(u, v)?.clone();
        }
        Some(total / S::from_int(cycle.len() as i64))
    }

    /// The periodic word spelled by a cycle of the lift: first symbol of each
    /// vertex label.
    pub fn spell(&self, cycle: &[usize]) -> Vec<Symbol> {
        cycle.iter().map(|&v| self.labels[v].symbols()[0]).collect()
    }
}

impl WeightedGraph<Rational> {
    pub fn to_float(&self) -> WeightedGraph<f64> {
        self.map_weights(<f64 as Scalar>::from_rational)
    }
}

/// Lift of the finite restriction `g` under a potential of memory `k`.
pub fn lift(g: &FiniteGraph, p: &dyn Potential) -> Result<WeightedGraph<Rational>> {
    let k = p.memory();
    if k == 0 {
        return Err(Error::Precondition("potential memory must be positive".into()));
    }
    if g.vertices().is_empty() {
        return Err(Error::Precondition("cannot lift an empty graph".into()));
    }
    // allowable k-words as vertex-index paths, generated in lexicographic order
    let adj = g.adjacency();
    let mut words: Vec<Vec<usize>> = (0..g.vertices().len()).map(|v| vec![v]).collect();
    for _ in 1..k {
        words = words
            .into_iter()
            .flat_map(|w| {
                let last = *w.last().unwrap();
                adj[last].iter().map(move |&v| {
                    let mut next = w.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    if words.is_empty() {
        return Err(Error::Construction(format!(
            "restriction to {:?} has no allowable word of length {k}",
            g.vertices()
        )));
    }
    let index: BTreeMap<&[usize], usize> = words.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect();
    let labels: Vec<Word> = words
        .iter()
        .map(|w| Word::new(w.iter().map(|&v| g.vertices()[v]).collect()))
        .collect();
    let mut edges = Vec::new();
    for (u, w) in words.iter().enumerate() {
        let weight = p.eval(labels[u].symbols());
        let last = *w.last().unwrap();
        for &s in &adj[last] {
            let mut next: Vec<usize> = w[1..].to_vec();
            next.push(s);
            if let Some(&v) = index.get(next.as_slice()) {
                edges.push((u, v, weight.clone()));
            }
        }
    }
    Ok(WeightedGraph::new(labels, edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::int;
    use crate::potential::{CappedDifference, Constant, Linear};
    use crate::shift::{restrict, FullShift, Renewal};
    use crate::types::{orbit_average, PeriodicOrbit};

    fn syms(v: &[u64]) -> Vec<Symbol> {
        v.iter().copied().map(Symbol).collect()
    }

    #[test]
    fn renewal_zero_lifts_to_a_weightless_loop() {
        let wg = lift(&restrict(&Renewal, &syms(&[0])), &Linear::negated_index()).unwrap();
        assert_eq!(wg.vertex_count(), 1);
        assert_eq!(wg.weight(0, 0), Some(&int(0)));
    }

    #[test]
    fn f2_lift_on_two_symbols() {
        let wg = lift(&restrict(&FullShift, &syms(&[0, 1])), &CappedDifference::f2()).unwrap();
        assert_eq!(wg.vertex_count(), 4);
        assert_eq!(wg.edge_count(), 8);
        let from = wg.labels().iter().position(|l| l == &Word::from_indices(&[0, 1])).unwrap();
        let to = wg.labels().iter().position(|l| l == &Word::from_indices(&[1, 1])).unwrap();
        assert_eq!(wg.weight(from, to), Some(&int(-1)));
    }

    #[test]
    fn constant_potential_gives_constant_weights() {
        let wg = lift(&restrict(&Renewal, &syms(&[0, 1, 2, 3])), &Constant::new(int(3))).unwrap();
        assert!(wg.edges().all(|(_, _, w)| *w == int(3)));
    }

    #[test]
    fn lifting_an_edgeless_graph_with_memory_two_fails() {
        let g = restrict(&Renewal, &syms(&[2]));
        assert!(matches!(lift(&g, &CappedDifference::f2()), Err(Error::Construction(_))));
    }

    #[test]
    fn cycle_means_match_orbit_averages() {
        let f = CappedDifference::f2();
        let wg = lift(&restrict(&FullShift, &syms(&[0, 1, 3])), &f).unwrap();
        let find = |w: &[u64]| wg.labels().iter().position(|l| l == &Word::from_indices(w)).unwrap();
        // cycle 0 -> 3 -> 1 -> 0 in symbol space
        let cycle = [find(&[0, 3]), find(&[3, 1]), find(&[1, 0])];
        let mean = wg.cycle_mean(&cycle).unwrap();
        let orbit = PeriodicOrbit::new(Word::new(wg.spell(&cycle)), &FullShift).unwrap();
        assert_eq!(mean, orbit_average(&f, &orbit));
    }
}
