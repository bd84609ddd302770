//! Maximizing periodic measures for coercive potentials on countable Markov
//! shifts, via reduction to a finite alphabet and an exact max-mean-cycle
//! search on the lifted graph.

// `!(x > 0)` is meant to reject NaN in float mode.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Graph loops index several per-vertex tables at once.
#![allow(clippy::needless_range_loop)]

pub mod campaign;
pub mod error;
pub mod lift;
pub mod mmc;
pub mod numeric;
pub mod orbits;
pub mod potential;
pub mod real_shift;
pub mod reduction;
pub mod report;
pub mod shift;
pub mod solver;
pub mod surgery;
pub mod types;

pub use error::{Error, Result};
pub use numeric::{Mode, Rational, Scalar};
pub use types::{PeriodicMeasure, PeriodicOrbit, Symbol, Word};
