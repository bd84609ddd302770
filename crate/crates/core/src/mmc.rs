//! Maximum cycle mean.
//!
//! Karp's characterisation, run on every strongly connected component:
//! with `D_k(v)` the heaviest walk of exactly `k` edges from a fixed source,
//!
//! ```text
//! λ* = max_v min_{0 <= k < n} (D_n(v) - D_k(v)) / (n - k)
//! ```
//!
//! The attaining cycle is read off the subgraph of edges that are tight for
//! longest-path potentials under the weights `w - λ*`; every cycle there has
//! mean exactly `λ*`.

use std::cmp::Ordering;
use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::lift::WeightedGraph;
use crate::numeric::Scalar;
use crate::shift::strongly_connected;

/// A cycle given as vertex indices, rotated to start at its least vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanCycle<S> {
    pub value: S,
    pub cycle: Vec<usize>,
}

impl<S: Scalar> MeanCycle<S> {
    /// Higher value first, then shorter, then lexicographically smaller.
    fn beats(&self, other: &Self) -> bool {
        match self.value.partial_cmp(&other.value) {
            Some(Ordering::Greater) => true,
            Some(Ordering::Less) => false,
            _ => (self.cycle.len(), &self.cycle) < (other.cycle.len(), &other.cycle),
        }
    }
}

pub fn max_mean_cycle<S: Scalar>(wg: &WeightedGraph<S>) -> Result<MeanCycle<S>> {
    let adjacency = wg.adjacency();
    let (label, count) = strongly_connected(&adjacency);
    let mut components: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (v, &c) in label.iter().enumerate() {
        components[c].push(v);
    }
    let mut best: Option<MeanCycle<S>> = None;
    for members in components {
        let cyclic = members.len() > 1 || wg.weight(members[0], members[0]).is_some();
        if !cyclic {
            continue;
        }
        let candidate = component_max_mean(wg, &members, &label);
        if best.as_ref().is_none_or(|b| candidate.beats(b)) {
            best = Some(candidate);
        }
    }
    best.ok_or(Error::NoCycle)
}

fn component_max_mean<S: Scalar>(wg: &WeightedGraph<S>, members: &[usize], label: &[usize]) -> MeanCycle<S> {
    let comp = label[members[0]];
    let n = members.len();
    let local = |v: usize| members.binary_search(&v).expect("vertex in component");
    let inner: Vec<Vec<(usize, S)>> = members
        .iter()
        .map(|&u| {
            wg.out_edges(u)
                .iter()
                .filter(|(v, _)| label[*v] == comp)
                .map(|(v, w)| (local(*v), w.clone()))
                .collect()
        })
        .collect();

    // D_k(v) for k = 0..=n from local source 0
    let mut d: Vec<Vec<Option<S>>> = vec![vec![None; n]; n + 1];
    d[0][0] = Some(S::zero());
    for k in 0..n {
        let (head, tail) = d.split_at_mut(k + 1);
        let (cur, next) = (&head[k], &mut tail[0]);
        for (u, es) in inner.iter().enumerate() {
            let Some(du) = &cur[u] else { continue };
            for (v, w) in es {
                let cand = du.clone() + w.clone();
                if next[*v].as_ref().is_none_or(|x| cand > *x) {
                    next[*v] = Some(cand);
                }
            }
        }
    }
    let mut lambda: Option<S> = None;
    for v in 0..n {
        let Some(dn) = &d[n][v] else { continue };
        let worst = (0..n)
            .filter_map(|k| {
                d[k][v]
                    .as_ref()
                    .map(|dk| (dn.clone() - dk.clone()) / S::from_int((n - k) as i64))
            })
            .reduce(S::min_of);
        if let Some(m) = worst {
            if lambda.as_ref().is_none_or(|l| m > *l) {
                lambda = Some(m);
            }
        }
    }
    let lambda = lambda.expect("strongly connected component with an edge has a closed walk of length n");

    // longest-path potentials for w - λ; no positive cycles remain
    let mut pi: Vec<Option<S>> = vec![None; n];
    pi[0] = Some(S::zero());
    for _ in 0..n {
        let mut changed = false;
        for (u, es) in inner.iter().enumerate() {
            let Some(pu) = pi[u].clone() else { continue };
            for (v, w) in es {
                let cand = pu.clone() + w.clone() - lambda.clone();
                let improves = match &pi[*v] {
                    None => true,
                    Some(x) => cand > *x && !(cand.clone() - x.clone()).is_negligible(&scale(x, w, &lambda)),
                };
                if improves {
                    pi[*v] = Some(cand);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let tight: Vec<Vec<usize>> = inner
        .iter()
        .enumerate()
        .map(|(u, es)| {
            let pu = pi[u].clone().expect("reachable");
            es.iter()
                .filter(|(v, w)| {
                    let pv = pi[*v].clone().expect("reachable");
                    let slack = pv.clone() - (pu.clone() + w.clone() - lambda.clone());
                    slack.is_negligible(&scale(&pv, w, &lambda))
                })
                .map(|(v, _)| *v)
                .collect()
        })
        .collect();
    let local_cycle = least_shortest_cycle(&tight).expect("tight subgraph contains every maximum-mean cycle");
    let cycle: Vec<usize> = local_cycle.into_iter().map(|v| members[v]).collect();
    MeanCycle { value: lambda, cycle }
}

fn scale<S: Scalar>(a: &S, b: &S, c: &S) -> S {
    S::max_of(S::max_of(a.abs(), b.abs()), c.abs())
}

/// Shortest cycle, ties broken by the lexicographically least vertex
/// sequence starting at the cycle's minimum vertex.
fn least_shortest_cycle(adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (u, out) in adj.iter().enumerate() {
        for &v in out {
            rev[v].push(u);
        }
    }
    let mut best: Option<(usize, usize, Vec<usize>)> = None; // (len, start, dist)
    for s in 0..n {
        // distance from every vertex >= s to s inside the subgraph on {s, ..}
        let mut dist = vec![usize::MAX; n];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &u in &rev[v] {
                if u >= s && dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        let len = adj[s]
            .iter()
            .filter(|&&u| u >= s && dist[u] != usize::MAX)
            .map(|&u| dist[u] + 1)
            .min();
        if let Some(len) = len {
            if best.as_ref().is_none_or(|(l, _, _)| len < *l) {
                best = Some((len, s, dist));
            }
        }
    }
    let (len, s, dist) = best?;
    let mut cycle = vec![s];
    let mut cur = s;
    for remaining in (1..len).rev() {
        cur = *adj[cur].iter().filter(|&&u| u > s).find(|&&u| dist[u] == remaining)?;
        cycle.push(cur);
    }
    Some(cycle)
}

/// Exhaustive oracle over simple cycles of length `<= max_len`, with the same
/// tie-breaking as [`max_mean_cycle`].
pub fn brute_force_mmc<S: Scalar>(wg: &WeightedGraph<S>, max_len: usize) -> Result<MeanCycle<S>> {
    if max_len == 0 {
        return Err(Error::Precondition("cycle length bound must be at least one".into()));
    }
    let n = wg.vertex_count();
    let mut best: Option<MeanCycle<S>> = None;
    let mut path = Vec::new();
    let mut on_path = vec![false; n];
    for s in 0..n {
        path.push(s);
        on_path[s] = true;
        dfs(wg, s, S::zero(), max_len, &mut path, &mut on_path, &mut best);
        on_path[s] = false;
        path.pop();
    }
    best.ok_or(Error::NoCycle)
}

fn dfs<S: Scalar>(
    wg: &WeightedGraph<S>,
    start: usize,
    sum: S,
    max_len: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    best: &mut Option<MeanCycle<S>>,
) {
    let u = *path.last().unwrap();
    for (v, w) in wg.out_edges(u) {
        let total = sum.clone() + w.clone();
        if *v == start {
            let cand = MeanCycle {
                value: total / S::from_int(path.len() as i64),
                cycle: path.clone(),
            };
            if best.as_ref().is_none_or(|b| cand.beats(b)) {
                *best = Some(cand);
            }
        } else if *v > start && !on_path[*v] && path.len() < max_len {
            path.push(*v);
            on_path[*v] = true;
            dfs(wg, start, total, max_len, path, on_path, best);
            on_path[*v] = false;
            path.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat, Rational};

    fn g(n: usize, edges: &[(usize, usize, i64)]) -> WeightedGraph<Rational> {
        WeightedGraph::from_edges(n, edges.iter().map(|&(u, v, w)| (u, v, int(w))))
    }

    #[test]
    fn single_loop() {
        let wg = g(1, &[(0, 0, 0)]);
        let m = max_mean_cycle(&wg).unwrap();
        assert_eq!((m.value, m.cycle), (int(0), vec![0]));
    }

    #[test]
    fn loop_beats_two_cycle() {
        let wg = g(2, &[(0, 0, 0), (0, 1, 2), (1, 0, -3)]);
        let m = max_mean_cycle(&wg).unwrap();
        assert_eq!((m.value, m.cycle), (int(0), vec![0]));
        assert_eq!(brute_force_mmc(&wg, 2).unwrap().value, int(0));
    }

    #[test]
    fn two_cycle_beats_loop() {
        let wg = g(2, &[(0, 0, 2), (0, 1, 5), (1, 0, 1)]);
        let m = max_mean_cycle(&wg).unwrap();
        assert_eq!((m.value.clone(), m.cycle.clone()), (int(3), vec![0, 1]));
        assert_eq!(brute_force_mmc(&wg, 2).unwrap(), m);
    }

    #[test]
    fn ties_prefer_short_then_lexicographic() {
        // loops at 1 and 2 with mean 1, triangle 0 -> 1 -> 2 -> 0 with mean 1
        let wg = g(3, &[(0, 1, 1), (1, 2, 1), (2, 0, 1), (2, 2, 1), (1, 1, 1)]);
        let m = max_mean_cycle(&wg).unwrap();
        assert_eq!(m.cycle, vec![1]);
        assert_eq!(brute_force_mmc(&wg, 3).unwrap().cycle, vec![1]);
    }

    #[test]
    fn components_are_solved_separately() {
        // component {0,1} mean -1/2, component {2} mean -1/3 via ... loop
        let wg = WeightedGraph::from_edges(
            4,
            vec![(0, 1, int(0)), (1, 0, int(-1)), (1, 2, int(100)), (2, 3, int(0)), (3, 2, rat(-2, 3))],
        );
        let m = max_mean_cycle(&wg).unwrap();
        assert_eq!(m.value, rat(-1, 3));
        assert_eq!(m.cycle, vec![2, 3]);
    }

    #[test]
    fn acyclic_graphs_have_no_cycle() {
        let wg = g(3, &[(0, 1, 1), (1, 2, 1)]);
        assert_eq!(max_mean_cycle(&wg), Err(Error::NoCycle));
        assert_eq!(brute_force_mmc(&wg, 3), Err(Error::NoCycle));
        assert!(brute_force_mmc(&wg, 0).is_err());
    }

    #[test]
    fn brute_force_respects_length_bound() {
        let wg = g(3, &[(0, 1, 9), (1, 2, 9), (2, 0, 9), (0, 0, -1)]);
        assert_eq!(brute_force_mmc(&wg, 2).unwrap().value, int(-1));
        assert_eq!(brute_force_mmc(&wg, 3).unwrap().value, int(9));
    }

    #[test]
    fn float_mode_agrees() {
        let wg = WeightedGraph::from_edges(3, vec![(0, 1, rat(1, 3)), (1, 2, rat(-2, 7)), (2, 0, rat(5, 11)), (1, 1, rat(1, 9))]);
        let exact = max_mean_cycle(&wg).unwrap();
        let approx = max_mean_cycle(&wg.to_float()).unwrap();
        assert!((approx.value - <f64 as Scalar>::from_rational(&exact.value)).abs() < 1e-12);
        assert_eq!(approx.cycle, exact.cycle);
    }
}
