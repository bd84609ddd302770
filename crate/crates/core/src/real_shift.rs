//! The full shift over the non-negative reals.
//!
//! Thresholds are real numbers here: `I1` is the infimum beyond which every
//! cylinder sup is below `β_lb - ε`, and `I2` is the infimum beyond which
//! cylinder sups are below `min f on Σ([0, I1]) - V`, pushed out by a
//! declared margin so that the strict inequality holds at `I2` itself.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::lift::lift;
use crate::mmc::max_mean_cycle;
use crate::numeric::{format_fraction, int, rat, Rational};
use crate::potential::Potential;
use crate::shift::{restrict, FullShift};
use crate::types::{PeriodicOrbit, Symbol, Word};

pub trait RealPotential: Send + Sync + fmt::Debug {
    fn memory(&self) -> usize;

    /// Value on a `memory()`-tuple of non-negative reals.
    fn eval(&self, xs: &[Rational]) -> Rational;

    /// `sup f` over points whose first coordinate is `t`.
    fn cylinder_sup(&self, t: &Rational) -> Rational;

    /// `sup_{s >= t}` of [`RealPotential::cylinder_sup`].
    fn tail_sup(&self, t: &Rational) -> Rational;

    /// Least `t* >= 0` with `cylinder_sup(s) < threshold` for every `s > t*`,
    /// or `None` when no such point exists.
    fn tail_threshold(&self, threshold: &Rational) -> Option<Rational>;

    /// Exact minimum over `[0, hi]^k` when available in closed form.
    fn min_on_box(&self, _hi: &Rational) -> Option<Rational> {
        None
    }

    /// Lipschitz constant for the max-norm on tuples.
    fn lipschitz(&self) -> Rational;

    fn total_variation(&self) -> Rational;

    fn global_sup(&self) -> Rational;

    fn describe(&self) -> String;
}

/// `f(x) = -scale · |x_0 - center|`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsDistance {
    pub center: Rational,
    pub scale: Rational,
}

impl AbsDistance {
    pub fn new(center: Rational, scale: Rational) -> Result<Self> {
        if center.is_negative() || scale.is_negative() {
            return Err(Error::Config("center and scale must be non-negative".into()));
        }
        Ok(AbsDistance { center, scale })
    }
}

impl RealPotential for AbsDistance {
    fn memory(&self) -> usize {
        1
    }

    fn eval(&self, xs: &[Rational]) -> Rational {
        -(&self.scale * (&xs[0] - &self.center).abs())
    }

    fn cylinder_sup(&self, t: &Rational) -> Rational {
        self.eval(std::slice::from_ref(t))
    }

    fn tail_sup(&self, t: &Rational) -> Rational {
        if *t >= self.center {
            self.cylinder_sup(t)
        } else {
            Rational::zero()
        }
    }

    fn tail_threshold(&self, threshold: &Rational) -> Option<Rational> {
        if threshold.is_positive() {
            Some(Rational::zero())
        } else if self.scale.is_zero() {
            None
        } else {
            Some(&self.center - threshold / &self.scale)
        }
    }

    fn min_on_box(&self, hi: &Rational) -> Option<Rational> {
        // concave in x_0: the minimum sits at an endpoint
        let a = self.eval(&[Rational::zero()]);
        let b = self.eval(std::slice::from_ref(hi));
        Some(if a < b { a } else { b })
    }

    fn lipschitz(&self) -> Rational {
        self.scale.clone()
    }

    fn total_variation(&self) -> Rational {
        Rational::zero()
    }

    fn global_sup(&self) -> Rational {
        Rational::zero()
    }

    fn describe(&self) -> String {
        format!(
            "abs-distance: f(x) = -{} * |x0 - {}|",
            format_fraction(&self.scale),
            format_fraction(&self.center)
        )
    }
}

/// `f(x) = intercept - slope · x_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealLinear {
    pub slope: Rational,
    pub intercept: Rational,
}

impl RealLinear {
    pub fn new(slope: Rational, intercept: Rational) -> Result<Self> {
        if slope.is_negative() {
            return Err(Error::Config("slope must be non-negative".into()));
        }
        Ok(RealLinear { slope, intercept })
    }
}

impl RealPotential for RealLinear {
    fn memory(&self) -> usize {
        1
    }

    fn eval(&self, xs: &[Rational]) -> Rational {
        &self.intercept - &self.slope * &xs[0]
    }

    fn cylinder_sup(&self, t: &Rational) -> Rational {
        self.eval(std::slice::from_ref(t))
    }

    fn tail_sup(&self, t: &Rational) -> Rational {
        self.cylinder_sup(t)
    }

    fn tail_threshold(&self, threshold: &Rational) -> Option<Rational> {
        if self.slope.is_zero() {
            return (self.intercept < *threshold).then(Rational::zero);
        }
        let t = (&self.intercept - threshold) / &self.slope;
        Some(if t.is_negative() { Rational::zero() } else { t })
    }

    fn min_on_box(&self, hi: &Rational) -> Option<Rational> {
        Some(self.eval(std::slice::from_ref(hi)))
    }

    fn lipschitz(&self) -> Rational {
        self.slope.clone()
    }

    fn total_variation(&self) -> Rational {
        Rational::zero()
    }

    fn global_sup(&self) -> Rational {
        self.intercept.clone()
    }

    fn describe(&self) -> String {
        format!(
            "linear: f(x) = {} - {} * x0",
            format_fraction(&self.intercept),
            format_fraction(&self.slope)
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealConstant {
    pub value: Rational,
}

impl RealPotential for RealConstant {
    fn memory(&self) -> usize {
        1
    }

    fn eval(&self, _xs: &[Rational]) -> Rational {
        self.value.clone()
    }

    fn cylinder_sup(&self, _t: &Rational) -> Rational {
        self.value.clone()
    }

    fn tail_sup(&self, _t: &Rational) -> Rational {
        self.value.clone()
    }

    fn tail_threshold(&self, threshold: &Rational) -> Option<Rational> {
        (self.value < *threshold).then(Rational::zero)
    }

    fn min_on_box(&self, _hi: &Rational) -> Option<Rational> {
        Some(self.value.clone())
    }

    fn lipschitz(&self) -> Rational {
        Rational::zero()
    }

    fn total_variation(&self) -> Rational {
        Rational::zero()
    }

    fn global_sup(&self) -> Rational {
        self.value.clone()
    }

    fn describe(&self) -> String {
        format!("constant: f(x) = {}", format_fraction(&self.value))
    }
}

/// Default relative margin pushing `I2` past its infimum.
pub fn default_margin() -> Rational {
    rat(1, 1000)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealReduction {
    pub epsilon: Rational,
    pub beta_lb: Rational,
    pub i1: Rational,
    /// Lower bound for `min f` on `Σ([0, I1])`.
    pub min_f: Rational,
    /// Whether `min_f` is the exact minimum or a grid-certified bound.
    pub min_exact: bool,
    pub variation: Rational,
    pub i2_infimum: Rational,
    pub margin: Rational,
    pub i2: Rational,
    /// `min_f - V - sup_{t >= I2} sup f|[t]`.
    pub delta: Rational,
}

/// Largest value at the constant sequences `t̄` for the given `t`, a valid
/// lower bound for `β`.
pub fn fixed_point_lower_bound(p: &dyn RealPotential, candidates: &[Rational]) -> Result<Rational> {
    candidates
        .iter()
        .map(|t| p.eval(&vec![t.clone(); p.memory()]))
        .max()
        .ok_or_else(|| Error::Precondition("no fixed point to evaluate".into()))
}

/// Certified lower bound for `min f` on `[0, hi]^k` from a grid and the
/// Lipschitz constant.
pub fn grid_minimum(p: &dyn RealPotential, hi: &Rational, per_axis: usize) -> Rational {
    let k = p.memory();
    let n = per_axis.max(2);
    let points: Vec<Rational> = (0..n).map(|i| hi * int(i as i64) / int(n as i64 - 1)).collect();
    let mut idx = vec![0usize; k];
    let mut best: Option<Rational> = None;
    loop {
        let xs: Vec<Rational> = idx.iter().map(|&i| points[i].clone()).collect();
        let v = p.eval(&xs);
        if best.as_ref().is_none_or(|b| v < *b) {
            best = Some(v);
        }
        let Some(pos) = idx.iter().rposition(|&i| i + 1 < n) else {
            break;
        };
        idx[pos] += 1;
        idx[pos + 1..].iter_mut().for_each(|i| *i = 0);
    }
    best.expect("grid is non-empty") - p.lipschitz() * hi / int(2 * (n as i64 - 1))
}

pub fn reduce_real(p: &dyn RealPotential, epsilon: &Rational, beta_lb: &Rational, margin: &Rational) -> Result<RealReduction> {
    if !epsilon.is_positive() {
        return Err(Error::Precondition("epsilon must be positive".into()));
    }
    if margin.is_negative() {
        return Err(Error::Precondition("margin must be non-negative".into()));
    }
    let first = beta_lb - epsilon;
    let i1 = p.tail_threshold(&first).ok_or_else(|| {
        Error::Certification(format!("{} never drops below {}", p.describe(), format_fraction(&first)))
    })?;
    let (min_f, min_exact) = match p.min_on_box(&i1) {
        Some(v) => (v, true),
        None => (grid_minimum(p, &i1, per_axis(p.memory())), false),
    };
    let variation = p.total_variation();
    let second = &min_f - &variation;
    let i2_infimum = p
        .tail_threshold(&second)
        .ok_or_else(|| {
            Error::Certification(format!("{} never drops below {}", p.describe(), format_fraction(&second)))
        })?
        .max(i1.clone());
    let margin = margin * i2_infimum.clone().max(int(1));
    let i2 = &i2_infimum + &margin;
    let delta = &second - p.tail_sup(&i2);
    if !delta.is_positive() {
        return Err(Error::Certification(format!(
            "margin {} leaves delta = {} non-positive",
            format_fraction(&margin),
            format_fraction(&delta)
        )));
    }
    Ok(RealReduction {
        epsilon: epsilon.clone(),
        beta_lb: beta_lb.clone(),
        i1,
        min_f,
        min_exact,
        variation,
        i2_infimum,
        margin,
        i2,
        delta,
    })
}

fn per_axis(k: usize) -> usize {
    match k {
        1 => 1025,
        2 => 65,
        _ => 9,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSolution {
    pub grid: Vec<Rational>,
    pub beta_hat: Rational,
    /// Periodic orbit over grid indices.
    pub orbit: PeriodicOrbit,
    pub points: Vec<Rational>,
    /// `L · I2 / (n - 1)`: how far `beta_hat` can sit below the optimum on
    /// `Σ([0, I2])`.
    pub error_bound: Rational,
}

/// A real potential read through a finite grid, so the symbolic lift and
/// mean-cycle machinery apply.
#[derive(Debug)]
struct OnGrid<'a> {
    inner: &'a dyn RealPotential,
    grid: &'a [Rational],
}

impl Potential for OnGrid<'_> {
    fn memory(&self) -> usize {
        self.inner.memory()
    }

    fn eval(&self, word: &[Symbol]) -> Rational {
        let xs: Vec<Rational> = word.iter().map(|s| self.grid[s.0 as usize].clone()).collect();
        self.inner.eval(&xs)
    }

    fn cylinder_sup(&self, i: Symbol) -> Option<Rational> {
        self.grid.get(i.0 as usize).map(|t| self.inner.cylinder_sup(t))
    }

    fn tail_certificate(&self, _i: Symbol) -> Rational {
        self.inner.global_sup()
    }

    fn tail_start(&self) -> Symbol {
        Symbol(self.grid.len() as u64)
    }

    fn variation_bounds(&self) -> Vec<Rational> {
        Vec::new()
    }

    fn global_sup(&self) -> Rational {
        self.inner.global_sup()
    }

    fn describe(&self) -> String {
        format!("{} on a {}-point grid", self.inner.describe(), self.grid.len())
    }
}

/// Best periodic orbit through `n` equispaced points of `[0, i2]`.
pub fn grid_solve(p: &dyn RealPotential, i2: &Rational, n: usize) -> Result<GridSolution> {
    if n < 2 {
        return Err(Error::Precondition("grid needs at least two points".into()));
    }
    if i2.is_negative() {
        return Err(Error::Precondition("grid bound must be non-negative".into()));
    }
    let grid: Vec<Rational> = (0..n).map(|i| i2 * int(i as i64) / int(n as i64 - 1)).collect();
    let adapter = OnGrid { inner: p, grid: &grid };
    let symbols: Vec<Symbol> = (0..n as u64).map(Symbol).collect();
    let wg = lift(&restrict(&FullShift, &symbols), &adapter)?;
    let best = max_mean_cycle(&wg)?;
    let orbit = PeriodicOrbit::new(Word::new(wg.spell(&best.cycle)), &FullShift)?;
    let points = orbit.symbols().iter().map(|s| grid[s.0 as usize].clone()).collect();
    let error_bound = p.lipschitz() * i2 / int(n as i64 - 1);
    Ok(GridSolution {
        grid,
        beta_hat: best.value,
        orbit,
        points,
        error_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abs_one() -> AbsDistance {
        AbsDistance::new(int(1), int(1)).unwrap()
    }

    #[test]
    fn abs_distance_thresholds() {
        let red = reduce_real(&abs_one(), &rat(1, 2), &int(0), &default_margin()).unwrap();
        assert_eq!(red.i1, rat(3, 2));
        assert_eq!(red.min_f, int(-1));
        assert!(red.min_exact);
        assert_eq!(red.i2_infimum, int(2));
        assert_eq!(red.margin, rat(2, 1000));
        assert_eq!(red.i2, rat(1001, 500));
        assert_eq!(red.delta, rat(1, 500));
    }

    #[test]
    fn linear_thresholds() {
        let f = RealLinear::new(int(1), int(0)).unwrap();
        let red = reduce_real(&f, &int(1), &int(0), &default_margin()).unwrap();
        assert_eq!(red.i1, int(1));
        assert_eq!(red.min_f, int(-1));
        assert_eq!(red.i2_infimum, int(1));
        assert_eq!(red.i2, rat(1001, 1000));
    }

    #[test]
    fn constant_is_not_coercive() {
        let f = RealConstant { value: int(0) };
        assert!(matches!(
            reduce_real(&f, &rat(1, 2), &int(0), &default_margin()),
            Err(Error::Certification(_))
        ));
    }

    #[test]
    fn zero_margin_is_rejected_at_the_infimum() {
        assert!(matches!(
            reduce_real(&abs_one(), &rat(1, 2), &int(0), &int(0)),
            Err(Error::Certification(_))
        ));
    }

    #[test]
    fn grid_minimum_is_a_lower_bound() {
        let f = abs_one();
        let lb = grid_minimum(&f, &rat(3, 2), 7);
        assert!(lb <= int(-1));
        assert!(lb >= int(-1) - rat(3, 2) / int(12));
    }

    #[test]
    fn fixed_point_bound() {
        let cands: Vec<Rational> = (0..4).map(int).collect();
        assert_eq!(fixed_point_lower_bound(&abs_one(), &cands).unwrap(), int(0));
    }

    #[test]
    fn grid_examples() {
        let g = grid_solve(&abs_one(), &int(2), 5).unwrap();
        assert_eq!(g.beta_hat, int(0));
        assert_eq!(g.points, vec![int(1)]);
        let g = grid_solve(&RealConstant { value: rat(-3, 4) }, &int(7), 4).unwrap();
        assert_eq!(g.beta_hat, rat(-3, 4));
        let g = grid_solve(&RealLinear::new(int(1), int(0)).unwrap(), &int(1), 2).unwrap();
        assert_eq!(g.beta_hat, int(0));
        assert_eq!(g.points, vec![int(0)]);
        assert!(grid_solve(&abs_one(), &int(2), 1).is_err());
    }

    #[test]
    fn nested_grids_are_monotone() {
        let f = abs_one();
        let top = rat(1001, 500);
        let mut prev: Option<Rational> = None;
        for n in [3, 5, 9, 17] {
            let g = grid_solve(&f, &top, n).unwrap();
            assert!(g.beta_hat <= f.global_sup());
            assert!(g.beta_hat >= -g.error_bound.clone());
            if let Some(p) = prev {
                assert!(p <= g.beta_hat);
            }
            prev = Some(g.beta_hat);
        }
    }
}
