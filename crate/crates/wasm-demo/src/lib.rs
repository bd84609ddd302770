//! Browser bindings: solve a built-in shift and potential, and the two
//! half-line operations. Every export returns a JSON report string.

use cms_ergodic::numeric::parse_rational;
use cms_ergodic::potential::{CappedDifference, Constant, Linear, Potential, Table};
use cms_ergodic::real_shift::{grid_solve, reduce_real, AbsDistance};
use cms_ergodic::reduction::ReduceOptions;
use cms_ergodic::report::{grid_report, lift_dot, real_reduction_report, render, solution_report};
use cms_ergodic::shift::{Band, FullShift, Renewal, TransitionSystem};
use cms_ergodic::solver::{reduced_lift, solve};
use cms_ergodic::{Error, Rational, Scalar};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn rational(s: &str) -> Result<Rational, Error> {
    parse_rational(s)
}

fn rationals(s: &str) -> Result<Vec<Rational>, Error> {
    s.split(',').map(|t| rational(t.trim())).collect()
}

/// `full`, `renewal` or `band:b`.
pub fn parse_shift(s: &str) -> Result<Box<dyn TransitionSystem>, Error> {
    match s.trim() {
        "full" => Ok(Box::new(FullShift)),
        "renewal" => Ok(Box::new(Renewal)),
        other => match other.strip_prefix("band:").map(str::parse::<u64>) {
            Some(Ok(b)) => Ok(Box::new(Band::new(b))),
            _ => Err(Error::Config(format!("unknown shift `{other}`"))),
        },
    }
}

/// `f2`, `linear:slope,intercept`, `constant:c` or
/// `table:v0,v1,..;tail_slope,tail_intercept`.
pub fn parse_potential(s: &str) -> Result<Box<dyn Potential>, Error> {
    let s = s.trim();
    let (family, args) = s.split_once(':').unwrap_or((s, ""));
    let bad = || Error::Config(format!("cannot read potential `{s}`"));
    Ok(match family {
        "f2" => Box::new(CappedDifference::f2()),
        "linear" => match rationals(args)?.as_slice() {
            [a, b] => Box::new(Linear::new(a.clone(), b.clone())?),
            [a] => Box::new(Linear::new(a.clone(), Rational::from_integer(0.into()))?),
            _ => return Err(bad()),
        },
        "constant" => Box::new(Constant::new(rational(args)?)),
        "table" => {
            let (values, tail) = args.split_once(';').ok_or_else(bad)?;
            match rationals(tail)?.as_slice() {
                [slope, intercept] => Box::new(Table::new(rationals(values)?, slope.clone(), intercept.clone())?),
                _ => return Err(bad()),
            }
        }
        _ => return Err(bad()),
    })
}

fn solve_with<S: Scalar>(p: &dyn Potential, ts: &dyn TransitionSystem, epsilon: &Rational) -> Result<String, Error> {
    let sol = solve::<S>(p, ts, &ReduceOptions::new(S::from_rational(epsilon)))?;
    let dot = lift_dot(&reduced_lift(p, ts, &sol.reduction)?, &sol.cycle);
    Ok(render(&json!({ "schema": 1, "command": "solve", "result": solution_report(&sol), "dot": dot })))
}

pub fn solve_report(shift: &str, potential: &str, epsilon: &str, float_mode: bool) -> Result<String, Error> {
    let ts = parse_shift(shift)?;
    let p = parse_potential(potential)?;
    let eps = rational(epsilon)?;
    if float_mode {
        solve_with::<f64>(p.as_ref(), ts.as_ref(), &eps)
    } else {
        solve_with::<Rational>(p.as_ref(), ts.as_ref(), &eps)
    }
}

pub fn reduce_real_report(center: &str, scale: &str, epsilon: &str, beta_lb: &str, margin: &str) -> Result<String, Error> {
    let f = AbsDistance::new(rational(center)?, rational(scale)?)?;
    let red = reduce_real(&f, &rational(epsilon)?, &rational(beta_lb)?, &rational(margin)?)?;
    Ok(render(&json!({ "schema": 1, "command": "reduce-real", "result": real_reduction_report(&red) })))
}

pub fn grid_solve_report(center: &str, scale: &str, top: &str, points: usize) -> Result<String, Error> {
    let f = AbsDistance::new(rational(center)?, rational(scale)?)?;
    let g = grid_solve(&f, &rational(top)?, points)?;
    Ok(render(&json!({ "schema": 1, "command": "grid-solve", "result": grid_report(&g) })))
}

fn js(r: Result<String, Error>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = solve)]
pub fn solve_js(shift: &str, potential: &str, epsilon: &str, float_mode: bool) -> Result<String, JsError> {
    js(solve_report(shift, potential, epsilon, float_mode))
}

/// Thresholds for `f(x) = -scale · |x_0 - center|` on the half-line shift.
#[wasm_bindgen(js_name = reduceReal)]
pub fn reduce_real_js(center: &str, scale: &str, epsilon: &str, beta_lb: &str, margin: &str) -> Result<String, JsError> {
    js(reduce_real_report(center, scale, epsilon, beta_lb, margin))
}

#[wasm_bindgen(js_name = gridSolve)]
pub fn grid_solve_js(center: &str, scale: &str, top: &str, points: usize) -> Result<String, JsError> {
    js(grid_solve_report(center, scale, top, points))
}
