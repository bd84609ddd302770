//! Finite-memory potentials with certified cylinder bounds.
//!
//! A potential with memory `k` depends on `x_0 .. x_{k-1}` only, so its
//! variations `V_j` vanish for `j >= k` and the total variation is the sum of
//! the first `k - 1` bounds. Cylinder suprema cannot be computed from the
//! evaluator (they range over infinitely many continuations), so every family
//! supplies them, together with a nonincreasing tail certificate that witnesses
//! coercivity.

use std::fmt;
use std::sync::Arc;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::numeric::{format_fraction, int, Rational};
use crate::shift::TransitionSystem;
use crate::types::{Symbol, Word};

pub trait Potential: Send + Sync + fmt::Debug {
    /// Number of leading coordinates the potential reads (`k >= 1`).
    fn memory(&self) -> usize;

    /// Value on the cylinder fixed by `word`, which has exactly `memory()`
    /// symbols and is allowable.
    fn eval(&self, word: &[Symbol]) -> Rational;

    /// Upper bound for `sup f|[i]`. Must be `Some` for every `i` below
    /// [`Potential::tail_start`].
    fn cylinder_sup(&self, i: Symbol) -> Option<Rational>;

    /// Nonincreasing on `i >= tail_start()`, dominating `cylinder_sup` there.
    fn tail_certificate(&self, i: Symbol) -> Rational;

    fn tail_start(&self) -> Symbol {
        Symbol(0)
    }

    /// Upper bounds for `V_1 .. V_{k-1}`.
    fn variation_bounds(&self) -> Vec<Rational>;

    fn global_sup(&self) -> Rational;

    fn exact_values(&self) -> bool {
        true
    }

    fn describe(&self) -> String;

    fn total_variation(&self) -> Rational {
        self.variation_bounds().into_iter().sum()
    }
}

/// Evaluates `p` on the cylinder given by the first `memory()` symbols of `w`.
pub fn eval_potential(p: &dyn Potential, ts: &dyn TransitionSystem, w: &Word) -> Result<Rational> {
    let k = p.memory();
    if w.len() < k {
        return Err(Error::Precondition(format!(
            "word {w} is shorter than the potential memory {k}"
        )));
    }
    let prefix = Word::new(w.symbols()[..k].to_vec());
    prefix.check_allowable(ts)?;
    Ok(p.eval(prefix.symbols()))
}

/// Certified upper bound for `sup f|[i]`.
pub fn cylinder_sup_query(p: &dyn Potential, i: Symbol) -> Rational {
    p.cylinder_sup(i).unwrap_or_else(|| p.tail_certificate(i))
}

fn sym(i: Symbol) -> Rational {
    int(i.0 as i64)
}

/// `f(x) = intercept - slope * x_0` with `slope >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub slope: Rational,
    pub intercept: Rational,
}

impl Linear {
    pub fn new(slope: Rational, intercept: Rational) -> Result<Self> {
        if slope.is_negative() {
            return Err(Error::Config("linear potential needs a non-negative slope".into()));
        }
        Ok(Linear { slope, intercept })
    }

    /// `f(x) = -x_0`.
    pub fn negated_index() -> Self {
        Linear {
            slope: int(1),
            intercept: int(0),
        }
    }

    fn at(&self, i: Symbol) -> Rational {
        &self.intercept - &self.slope * sym(i)
    }
}

impl Potential for Linear {
    fn memory(&self) -> usize {
        1
    }

    fn eval(&self, word: &[Symbol]) -> Rational {
        self.at(word[0])
    }

    fn cylinder_sup(&self, i: Symbol) -> Option<Rational> {
        Some(self.at(i))
    }

    fn tail_certificate(&self, i: Symbol) -> Rational {
        self.at(i)
    }

    fn variation_bounds(&self) -> Vec<Rational> {
        Vec::new()
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

/// `f(x) = intercept - slope * x_0 - penalty * min(|x_0 - x_1|, cap)`.
///
/// With unit slope, penalty and cap this is the two-symbol test potential
/// used throughout the test suite.
#[derive(Debug, Clone, PartialEq)]
pub struct CappedDifference {
    pub slope: Rational,
    pub intercept: Rational,
    pub penalty: Rational,
    pub cap: Rational,
}

impl CappedDifference {
    pub fn new(slope: Rational, intercept: Rational, penalty: Rational, cap: Rational) -> Result<Self> {
        if slope.is_negative() || penalty.is_negative() || cap.is_negative() {
            return Err(Error::Config(
                "capped-difference potential needs non-negative slope, penalty and cap".into(),
            ));
        }
        Ok(CappedDifference {
            slope,
            intercept,
            penalty,
            cap,
        })
    }

    pub fn f2() -> Self {
        CappedDifference {
            slope: int(1),
            intercept: int(0),
            penalty: int(1),
            cap: int(1),
        }
    }

    fn head(&self, i: Symbol) -> Rational {
        &self.intercept - &self.slope * sym(i)
    }
}

impl Potential for CappedDifference {
    fn memory(&self) -> usize {
        2
    }

    fn eval(&self, word: &[Symbol]) -> Rational {
        let gap = int(word[0].0.abs_diff(word[1].0) as i64);
        let capped = if gap < self.cap { gap } else { self.cap.clone() };
        self.head(word[0]) - &self.penalty * capped
    }

    // Attained at x_1 = x_0 whenever A(i, i) = 1, an upper bound otherwise.
    fn cylinder_sup(&self, i: Symbol) -> Option<Rational> {
        Some(self.head(i))
    }

    fn tail_certificate(&self, i: Symbol) -> Rational {
        self.head(i)
    }

    fn variation_bounds(&self) -> Vec<Rational> {
        vec![&self.penalty * &self.cap]
    }

    fn global_sup(&self) -> Rational {
        self.intercept.clone()
    }

    fn describe(&self) -> String {
        format!(
            "capped-difference: f(x) = {} - {} * x0 - {} * min(|x0 - x1|, {})",
            format_fraction(&self.intercept),
            format_fraction(&self.slope),
            format_fraction(&self.penalty),
            format_fraction(&self.cap)
        )
    }
}

/// `f ≡ c`. Not coercive: its tail never drops below any threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Constant {
    pub value: Rational,
}

impl Constant {
    pub fn new(value: Rational) -> Self {
        Constant { value }
    }
}

impl Potential for Constant {
    fn memory(&self) -> usize {
        1
    }

    fn eval(&self, _word: &[Symbol]) -> Rational {
        self.value.clone()
    }

    fn cylinder_sup(&self, _i: Symbol) -> Option<Rational> {
        Some(self.value.clone())
    }

    fn tail_certificate(&self, _i: Symbol) -> Rational {
        self.value.clone()
    }

    fn variation_bounds(&self) -> Vec<Rational> {
        Vec::new()
    }

    fn global_sup(&self) -> Rational {
        self.value.clone()
    }

    fn describe(&self) -> String {
        format!("constant: f(x) = {}", format_fraction(&self.value))
    }
}

/// Memory-one potential given by an explicit table on `{0, .., n-1}` and a
/// declared linear tail `tail_intercept - tail_slope * i` for `i >= n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    values: Vec<Rational>,
    tail_slope: Rational,
    tail_intercept: Rational,
}

impl Table {
    pub fn new(values: Vec<Rational>, tail_slope: Rational, tail_intercept: Rational) -> Result<Self> {
        if tail_slope.is_negative() {
            return Err(Error::Config("table tail slope must be non-negative".into()));
        }
        Ok(Table {
            values,
            tail_slope,
            tail_intercept,
        })
    }

    fn tail(&self, i: Symbol) -> Rational {
        &self.tail_intercept - &self.tail_slope * sym(i)
    }

    fn at(&self, i: Symbol) -> Rational {
        match self.values.get(i.0 as usize) {
            Some(v) => v.clone(),
            None => self.tail(i),
        }
    }
}

impl Potential for Table {
    fn memory(&self) -> usize {
        1
    }

    fn eval(&self, word: &[Symbol]) -> Rational {
        self.at(word[0])
    }

    fn cylinder_sup(&self, i: Symbol) -> Option<Rational> {
        Some(self.at(i))
    }

    fn tail_certificate(&self, i: Symbol) -> Rational {
        self.tail(Symbol(i.0.max(self.values.len() as u64)))
    }

    fn tail_start(&self) -> Symbol {
        Symbol(self.values.len() as u64)
    }

    fn variation_bounds(&self) -> Vec<Rational> {
        Vec::new()
    }

    fn global_sup(&self) -> Rational {
        let tail = self.tail(self.tail_start());
        self.values.iter().cloned().fold(tail, |a, b| if b > a { b } else { a })
    }

    fn describe(&self) -> String {
        let vals: Vec<String> = self.values.iter().map(format_fraction).collect();
        format!(
            "table: [{}], tail f(i) = {} - {} * i",
            vals.join(", "),
            format_fraction(&self.tail_intercept),
            format_fraction(&self.tail_slope)
        )
    }
}

/// `f - offset`; shifting by `beta` normalizes the maximal average to zero.
#[derive(Debug, Clone)]
pub struct Shifted {
    inner: Arc<dyn Potential>,
    offset: Rational,
}

impl Shifted {
    pub fn new(inner: Arc<dyn Potential>, offset: Rational) -> Self {
        Shifted { inner, offset }
    }
}

impl Potential for Shifted {
    fn memory(&self) -> usize {
        self.inner.memory()
    }

    fn eval(&self, word: &[Symbol]) -> Rational {
        self.inner.eval(word) - &self.offset
    }

    fn cylinder_sup(&self, i: Symbol) -> Option<Rational> {
        self.inner.cylinder_sup(i).map(|v| v - &self.offset)
    }

    fn tail_certificate(&self, i: Symbol) -> Rational {
        self.inner.tail_certificate(i) - &self.offset
    }

    fn tail_start(&self) -> Symbol {
        self.inner.tail_start()
    }

    fn variation_bounds(&self) -> Vec<Rational> {
        self.inner.variation_bounds()
    }

    fn global_sup(&self) -> Rational {
        self.inner.global_sup() - &self.offset
    }

    fn exact_values(&self) -> bool {
        self.inner.exact_values()
    }

    fn describe(&self) -> String {
        format!("({}) - {}", self.inner.describe(), format_fraction(&self.offset))
    }
}

/// Whether every variation bound is non-negative.
pub fn variation_bounds_valid(p: &dyn Potential) -> bool {
    p.variation_bounds().iter().all(|v| !v.is_negative()) && p.variation_bounds().len() + 1 >= p.memory()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;
    use crate::shift::{Band, FullShift, Renewal};
    use proptest::prelude::*;

    #[test]
    fn evaluates_fixture_values() {
        let r = Linear::negated_index();
        assert_eq!(eval_potential(&r, &Renewal, &Word::from_indices(&[3])).unwrap(), int(-3));
        let f2 = CappedDifference::f2();
        assert_eq!(eval_potential(&f2, &FullShift, &Word::from_indices(&[0, 2])).unwrap(), int(-1));
        assert_eq!(eval_potential(&f2, &FullShift, &Word::from_indices(&[1, 0])).unwrap(), int(-2));
        let c = Constant::new(rat(5, 2));
        assert_eq!(eval_potential(&c, &Renewal, &Word::from_indices(&[4, 0])).unwrap(), rat(5, 2));
    }

    #[test]
    fn eval_rejects_short_and_forbidden_words() {
        let f2 = CappedDifference::f2();
        assert!(matches!(
            eval_potential(&f2, &FullShift, &Word::from_indices(&[0])),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            eval_potential(&f2, &Renewal, &Word::from_indices(&[0, 2])),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn cylinder_sups() {
        assert_eq!(cylinder_sup_query(&Linear::negated_index(), Symbol(3)), int(-3));
        assert_eq!(cylinder_sup_query(&CappedDifference::f2(), Symbol(5)), int(-5));
        assert_eq!(cylinder_sup_query(&Constant::new(int(4)), Symbol(99)), int(4));
        assert_eq!(CappedDifference::f2().total_variation(), int(1));
    }

    #[test]
    fn table_switches_to_declared_tail() {
        let t = Table::new(vec![int(1), int(-5), int(2)], int(2), int(0)).unwrap();
        assert_eq!(t.eval(&[Symbol(2)]), int(2));
        assert_eq!(t.eval(&[Symbol(4)]), int(-8));
        assert_eq!(t.tail_start(), Symbol(3));
        assert_eq!(t.tail_certificate(Symbol(0)), int(-6));
        assert_eq!(t.global_sup(), int(2));
    }

    #[test]
    fn shifted_moves_every_bound() {
        let s = Shifted::new(Arc::new(CappedDifference::f2()), rat(1, 3));
        assert_eq!(s.eval(&[Symbol(0), Symbol(0)]), rat(-1, 3));
        assert_eq!(s.global_sup(), rat(-1, 3));
        assert_eq!(s.tail_certificate(Symbol(2)), rat(-7, 3));
        assert!(variation_bounds_valid(&s));
    }

    proptest! {
        #[test]
        fn values_never_exceed_cylinder_sup(a in 0u64..40, b in 0u64..40, slope in 0i64..5, pen in 0i64..5, cap in 0i64..4) {
            let f = CappedDifference::new(int(slope), int(1), int(pen), int(cap)).unwrap();
            let w = [Symbol(a), Symbol(b)];
            prop_assert!(f.eval(&w) <= cylinder_sup_query(&f, Symbol(a)));
            prop_assert!(f.eval(&w) <= f.global_sup());
            // variation bound: same first symbol, any second symbol
            let w2 = [Symbol(a), Symbol((b * 7 + 3) % 40)];
            prop_assert!((f.eval(&w) - f.eval(&w2)).abs() <= f.total_variation());
        }

        #[test]
        fn tail_certificates_are_nonincreasing(i in 0u64..1000) {
            let fams: Vec<Box<dyn Potential>> = vec![
                Box::new(Linear::negated_index()),
                Box::new(CappedDifference::f2()),
                Box::new(Table::new(vec![int(3), int(-1)], int(1), int(2)).unwrap()),
            ];
            for f in &fams {
                prop_assert!(f.tail_certificate(Symbol(i + 1)) <= f.tail_certificate(Symbol(i)));
                if Symbol(i) >= f.tail_start() {
                    prop_assert!(f.tail_certificate(Symbol(i)) >= cylinder_sup_query(f.as_ref(), Symbol(i)));
                }
            }
        }

        #[test]
        fn f2_sup_is_attained_on_band_shift(i in 0u64..50) {
            let f = CappedDifference::f2();
            let attained = eval_potential(&f, &Band::new(1), &Word::from_indices(&[i, i])).unwrap();
            prop_assert_eq!(attained, cylinder_sup_query(&f, Symbol(i)));
        }
    }
}
