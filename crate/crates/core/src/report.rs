//! JSON reports and Graphviz output.
//!
//! Every report is an object with `"schema": 1` and a `"command"` tag.
//! Exact quantities print as reduced fractions (`"-1/2"`, `"0/1"`), float-mode ones as
//! JSON numbers. Keys are sorted, so equal inputs give byte-equal output.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::lift::WeightedGraph;
use crate::numeric::{format_fraction, Rational, Scalar};
use crate::real_shift::{GridSolution, RealReduction};
use crate::reduction::{AlphabetHull, Reduction};
use crate::solver::Solution;
use crate::types::{PeriodicOrbit, Symbol, Word};

pub const SCHEMA: u32 = 1;

fn q(x: &Rational) -> Value {
    Value::String(format_fraction(x))
}

fn symbols(s: &[Symbol]) -> Value {
    json!(s.iter().map(|s| s.0).collect::<Vec<_>>())
}

fn orbit(o: &PeriodicOrbit) -> Value {
    json!({ "period": o.period(), "word": symbols(o.symbols()), "display": o.to_string() })
}

/// Wraps a payload with the schema version and command name.
pub fn envelope(command: &str, input: Value, result: Value) -> Value {
    json!({ "schema": SCHEMA, "command": command, "input": input, "result": result })
}

/// Pretty JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values always serialize");
    s.push('\n');
    s
}

pub fn hull_report(h: &AlphabetHull) -> Value {
    let table: Vec<Value> = h
        .connect_table
        .iter()
        .map(|((a, b), w)| json!({ "from": a.0, "to": b.0, "word": symbols(w.symbols()) }))
        .collect();
    json!({
        "cut": h.cut.0,
        "symbols": symbols(&h.symbols),
        "base": symbols(&h.base_cut),
        "dropped": symbols(&h.dropped),
        "added": symbols(&h.extra_symbols),
        "p0": h.p0,
        "connect": table,
    })
}

pub fn reduction_report<S: Scalar>(r: &Reduction<S>) -> Value {
    json!({
        "mode": S::MODE,
        "epsilon": r.epsilon.to_report(),
        "beta_lower_bound": r.beta_lb.to_report(),
        "beta_abs_bounds": [r.beta_abs_lb.to_report(), r.beta_abs_ub.to_report()],
        "variation": r.variation.to_report(),
        "thresholds": r.thresholds,
        "i1": r.i1.0,
        "a1": hull_report(&r.hull1),
        "min_f_a1": r.min_f_a1.to_report(),
        "c1": r.c1.to_report(),
        "c2": r.c2.to_report(),
        "c": r.c.to_report(),
        "i2": r.i2.0,
        "a2": hull_report(&r.hull2),
        "tail_sup": r.tail_sup.to_report(),
        "delta": r.delta.to_report(),
        "certified": r.certified,
        "refined": r.refined,
        "notes": r.notes,
    })
}

pub fn solution_report<S: Scalar>(s: &Solution<S>) -> Value {
    let c = &s.certificate;
    json!({
        "mode": S::MODE,
        "beta": s.beta.to_report(),
        "orbit": orbit(&s.optimal_orbit),
        "cycle": s.cycle.iter().map(|w| symbols(w.symbols())).collect::<Vec<_>>(),
        "measure": s.measure.weights().iter().map(|(w, p)| json!({ "shift": w, "weight": q(p) })).collect::<Vec<_>>(),
        "certificate": {
            "lift_vertices": c.lift_vertices,
            "lift_edges": c.lift_edges,
            "orbit_average_matches": c.orbit_average_matches,
            "support_contained": c.support_contained,
            "oracle_matches": c.oracle_matches,
            "passed": c.passed(),
        },
        "reduction": reduction_report(&s.reduction),
    })
}

pub fn real_reduction_report(r: &RealReduction) -> Value {
    json!({
        "epsilon": q(&r.epsilon),
        "beta_lower_bound": q(&r.beta_lb),
        "i1": q(&r.i1),
        "min_f": q(&r.min_f),
        "min_exact": r.min_exact,
        "variation": q(&r.variation),
        "i2_infimum": q(&r.i2_infimum),
        "margin": q(&r.margin),
        "i2": q(&r.i2),
        "delta": q(&r.delta),
    })
}

pub fn grid_report(g: &GridSolution) -> Value {
    json!({
        "grid_points": g.grid.len(),
        "grid_step": if g.grid.len() > 1 { q(&(&g.grid[1] - &g.grid[0])) } else { Value::Null },
        "beta_hat": q(&g.beta_hat),
        "orbit_indices": orbit(&g.orbit),
        "orbit_points": g.points.iter().map(q).collect::<Vec<_>>(),
        "error_bound": q(&g.error_bound),
    })
}

fn dot_label(w: &Word) -> String {
    w.symbols().iter().map(|s| s.0.to_string()).collect::<Vec<_>>().join(" ")
}

/// The lift as a DOT digraph; vertices and edges of `cycle` (given by vertex
/// labels, in order) are drawn bold red.
pub fn lift_dot<S: Scalar>(wg: &WeightedGraph<S>, cycle: &[Word]) -> String {
    let index = |w: &Word| wg.labels().iter().position(|l| l == w);
    let on: Vec<usize> = cycle.iter().filter_map(index).collect();
    let vertices: BTreeSet<usize> = on.iter().copied().collect();
    let edges: BTreeSet<(usize, usize)> = (0..on.len()).map(|i| (on[i], on[(i + 1) % on.len()])).collect();
    let mut out = String::from("digraph lift {\n  rankdir=LR;\n  node [shape=box, fontname=monospace];\n");
    for (v, label) in wg.labels().iter().enumerate() {
        let style = if vertices.contains(&v) { ", color=red, penwidth=2" } else { "" };
        let _ = writeln!(out, "  v{v} [label=\"{}\"{style}];", dot_label(label));
    }
    for (u, v, w) in wg.edges() {
        let style = if edges.contains(&(u, v)) { ", color=red, penwidth=2" } else { "" };
        let weight = match w.to_report() {
            Value::String(s) => s,
            other => other.to_string(),
        };
        let _ = writeln!(out, "  v{u} -> v{v} [label=\"{weight}\"{style}];");
    }
    out.push_str("}\n");
    out
}
