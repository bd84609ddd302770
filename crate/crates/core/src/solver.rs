//! β and a maximizing periodic measure on the reduced subshift.

use crate::error::{Error, Result};
use crate::lift::{lift, WeightedGraph};
use crate::mmc::{brute_force_mmc, max_mean_cycle, MeanCycle};
use crate::numeric::{Mode, Rational, Scalar};
use crate::potential::Potential;
use crate::reduction::{reduce, ReduceOptions, Reduction};
use crate::shift::{restrict, TransitionSystem};
use crate::types::{orbit_average, PeriodicMeasure, PeriodicOrbit, Word};

/// Lifts with at most this many vertices are cross-checked by brute force.
pub const ORACLE_VERTEX_LIMIT: usize = 10;

/// Checks performed on a solution after the fact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub lift_vertices: usize,
    pub lift_edges: usize,
    /// The orbit average, computed exactly from the potential, equals β.
    pub orbit_average_matches: bool,
    pub support_contained: bool,
    /// `None` when the lift was too large for the brute-force oracle.
    pub oracle_matches: Option<bool>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.orbit_average_matches && self.support_contained && self.oracle_matches != Some(false)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution<S> {
    pub beta: S,
    pub optimal_orbit: PeriodicOrbit,
    pub measure: PeriodicMeasure,
    /// Vertex labels of the optimal cycle in the lift.
    pub cycle: Vec<Word>,
    pub reduction: Reduction<S>,
    pub certificate: Certificate,
}

impl<S: Scalar> Solution<S> {
    pub fn mode(&self) -> Mode {
        S::MODE
    }
}

pub fn integrate(measure: &PeriodicMeasure, p: &dyn Potential) -> Rational {
    measure.integrate(p)
}

/// The weighted lift of the reduced alphabet `A2`.
pub fn reduced_lift<S: Scalar>(p: &dyn Potential, ts: &dyn TransitionSystem, red: &Reduction<S>) -> Result<WeightedGraph<S>> {
    Ok(lift(&restrict(ts, &red.hull2.symbols), p)?.map_weights(S::from_rational))
}

pub fn solve<S: Scalar>(p: &dyn Potential, ts: &dyn TransitionSystem, opts: &ReduceOptions<S>) -> Result<Solution<S>> {
    let red = reduce(p, ts, opts)?;
    solve_reduced(p, ts, red)
}

/// Solves on the alphabet of an existing reduction.
pub fn solve_reduced<S: Scalar>(p: &dyn Potential, ts: &dyn TransitionSystem, red: Reduction<S>) -> Result<Solution<S>> {
    let wg = reduced_lift(p, ts, &red)?;
    let best = max_mean_cycle(&wg)?;
    let optimal_orbit = PeriodicOrbit::new(Word::new(wg.spell(&best.cycle)), ts)?;
    let average = S::from_rational(&orbit_average(p, &optimal_orbit));
    let oracle_matches = (wg.vertex_count() <= ORACLE_VERTEX_LIMIT)
        .then(|| brute_force_mmc(&wg, wg.vertex_count()))
        .map(|r| r.is_ok_and(|b: MeanCycle<S>| agrees(&b.value, &best.value)));
    let certificate = Certificate {
        lift_vertices: wg.vertex_count(),
        lift_edges: wg.edge_count(),
        orbit_average_matches: agrees(&average, &best.value),
        support_contained: optimal_orbit.contains_only(&red.hull2.symbols),
        oracle_matches,
    };
    if !certificate.orbit_average_matches {
        return Err(Error::Construction(format!(
            "cycle mean {} disagrees with the orbit average {average} of {optimal_orbit}",
            best.value
        )));
    }
    Ok(Solution {
        beta: best.value,
        measure: PeriodicMeasure::new(optimal_orbit.clone()),
        optimal_orbit,
        cycle: best.cycle.iter().map(|&v| wg.label(v).clone()).collect(),
        reduction: red,
        certificate,
    })
}

/// Exact equality in rational mode, relative tolerance in float mode.
pub fn agrees<S: Scalar>(a: &S, b: &S) -> bool {
    (a.clone() - b.clone()).abs().is_negligible(&S::max_of(a.abs(), b.abs()))
}
