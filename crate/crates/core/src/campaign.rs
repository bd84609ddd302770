//! Randomized and exhaustive checks of the surgery inequalities and of the
//! solver against brute force. Every check is exact.

use std::sync::Arc;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lift::WeightedGraph;
use crate::mmc::{brute_force_mmc, max_mean_cycle, MeanCycle};
use crate::numeric::{format_fraction, int, Rational};
use crate::orbits::{enumerate_orbits, random_graph, OrbitSampler};
use crate::potential::{Potential, Shifted};
use crate::reduction::{reduce, ReduceOptions, Reduction};
use crate::shift::TransitionSystem;
use crate::solver::{reduced_lift, solve, Solution};
use crate::surgery::{find_maximal_word, improve_prefix, splice};
use crate::types::{orbit_average, starts_in, PeriodicOrbit, Symbol};

/// Counterexamples kept per property.
const KEEP: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub cases: usize,
    pub seed: u64,
    /// Symbols up to `I2 + budget` are drawn.
    pub budget: u64,
    pub max_period: usize,
    pub bias: f64,
    /// Multiplies `δ` before checking; for exercising the failure path.
    pub delta_scale: Option<Rational>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            cases: 1000,
            seed: 1,
            budget: 5,
            max_period: 24,
            bias: 0.85,
            delta_scale: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub name: String,
    pub checked: usize,
    pub passed: usize,
    pub failed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub counterexamples: Vec<Value>,
}

impl PropertyReport {
    fn new(name: &str) -> Self {
        PropertyReport {
            name: name.to_string(),
            checked: 0,
            passed: 0,
            failed: 0,
            note: None,
            counterexamples: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, case: impl FnOnce() -> Value) {
        self.checked += 1;
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            if self.counterexamples.len() < KEEP {
                self.counterexamples.push(case());
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub beta: String,
    pub orbit_cases: usize,
    pub orbit_attempts: usize,
    pub prefix_cases: usize,
    pub prefix_attempts: usize,
    pub properties: Vec<PropertyReport>,
}

impl CampaignReport {
    pub fn failures(&self) -> usize {
        self.properties.iter().map(|p| p.failed).sum()
    }

    pub fn property(&self, name: &str) -> Option<&PropertyReport> {
        self.properties.iter().find(|p| p.name == name)
    }
}

fn q(x: &Rational) -> Value {
    Value::String(format_fraction(x))
}

fn scaled(mut red: Reduction<Rational>, scale: &Option<Rational>) -> Reduction<Rational> {
    if let Some(s) = scale {
        red.delta = &red.delta * s;
    }
    red
}

/// Orbits that start below `I1`, leave `A2`, visit a symbol `>= I2` and
/// average at least `β - ε`.
pub fn qualifying_orbit(p: &dyn Potential, x: &PeriodicOrbit, red: &Reduction<Rational>, floor: &Rational) -> bool {
    starts_in(x) < red.i1
        && !x.contains_only(&red.hull2.symbols)
        && x.symbols().iter().any(|&s| s >= red.i2)
        && orbit_average(p, x) >= *floor
}

/// Maximal-word, splice-gap and prefix-exchange inequalities on sampled
/// orbits and prefixes.
pub fn verify(
    p: Arc<dyn Potential>,
    ts: &dyn TransitionSystem,
    opts: &ReduceOptions<Rational>,
    cfg: &CampaignConfig,
) -> Result<CampaignReport> {
    let sol = solve(p.as_ref(), ts, opts)?;
    let red = scaled(sol.reduction.clone(), &cfg.delta_scale);
    let beta = sol.beta.clone();
    let floor = &beta - &red.epsilon;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sampler = OrbitSampler {
        max_symbol: red.i2.0 + cfg.budget,
        max_period: cfg.max_period.max(1),
        bias: cfg.bias,
    };
    let attempt_limit = cfg.cases.saturating_mul(1000);

    let mut dominates = PropertyReport::new("kappa-dominates-average");
    let mut kappa_r = PropertyReport::new("kappa-below-kappa-r");
    let mut gap = PropertyReport::new("splice-gap");
    let mut closure = PropertyReport::new("splice-closure");
    let starts: Vec<Symbol> = red.hull1.base_cut.clone();
    let (mut orbit_cases, mut orbit_attempts) = (0, 0);
    while orbit_cases < cfg.cases && orbit_attempts < attempt_limit {
        orbit_attempts += 1;
        let start = starts[rng.gen_range(0..starts.len())];
        let Some(x) = sampler.sample(ts, &mut rng, start) else {
            continue;
        };
        if !qualifying_orbit(p.as_ref(), &x, &red, &floor) {
            continue;
        }
        orbit_cases += 1;
        let avg = orbit_average(p.as_ref(), &x);
        let mw = find_maximal_word(p.as_ref(), &x, &red)?;
        let case = || json!({"x": x.to_string(), "beta_x": q(&avg), "ell": mw.ell, "m": mw.m, "r": mw.r,
                             "kappa": q(&mw.kappa), "kappa_r": q(&mw.kappa_r)});
        dominates.record(mw.dominates_average, case);
        if mw.dominates_average {
            kappa_r.record(mw.kappa <= mw.kappa_r, case);
        }
        match splice(p.as_ref(), ts, &x, &red) {
            Ok(s) => {
                closure.record(true, Value::default);
                let gained = orbit_average(p.as_ref(), &s.z);
                let need = &avg + &s.gap;
                gap.record(gained >= need, || {
                    json!({"x": x.to_string(), "beta_x": q(&avg), "z": s.z.to_string(), "beta_z": q(&gained),
                           "gap": q(&s.gap), "r": s.word.r})
                });
            }
            Err(e) => closure.record(false, || json!({"x": x.to_string(), "error": e.to_string()})),
        }
    }

    // prefix exchanges are stated for f normalized to β = 0
    let normalized: Arc<dyn Potential> = Arc::new(Shifted::new(p.clone(), beta.clone()));
    let mut nopts = opts.clone();
    nopts.beta_lb = opts.beta_lb.as_ref().map(|b| b - &beta);
    let nred = scaled(reduce(normalized.as_ref(), ts, &nopts)?, &cfg.delta_scale);
    let mut exchange = PropertyReport::new("exchange-gain");
    let mut endgame = PropertyReport::new("endgame-sum-bound");
    let mut small = PropertyReport::new("endgame-small-sum");
    let half_delta = &nred.delta / int(2);
    let (mut prefix_cases, mut prefix_attempts) = (0, 0);
    let nstarts = nred.hull1.base_cut.clone();
    while prefix_cases < cfg.cases && prefix_attempts < attempt_limit {
        prefix_attempts += 1;
        let start = nstarts[rng.gen_range(0..nstarts.len())];
        let Some(w) = sampler.sample_prefix(ts, &mut rng, start) else {
            continue;
        };
        let r = match improve_prefix(normalized.as_ref(), ts, &w, &nred) {
            Ok(r) => r,
            Err(Error::NotApplicable(_)) => continue,
            Err(e) => return Err(e),
        };
        prefix_cases += 1;
        for ex in &r.exchanges {
            exchange.record(ex.new_sum >= &ex.original_sum + &nred.delta, || {
                json!({"prefix": w.to_string(), "b": ex.b, "a": ex.a, "connector": ex.connector.to_string(),
                       "original_sum": q(&ex.original_sum), "new_sum": q(&ex.new_sum)})
            });
        }
        let case = || {
            json!({"prefix": w.to_string(), "m": r.m, "z": r.z_word.to_string(), "prefix_sum": q(&r.prefix_sum),
                   "z_sum": q(&r.z_sum), "sum_bound": q(&r.sum_bound), "exchanges": r.exchanges.len()})
        };
        endgame.record(r.z_sum >= r.sum_bound, case);
        if r.prefix_sum.abs() <= half_delta {
            small.record(r.z_sum >= half_delta, case);
        }
    }
    if small.checked == 0 {
        small.note = Some(format!(
            "no sampled prefix has |S_m f| <= delta/2 = {}; the hypothesis is vacuous on these cases",
            format_fraction(&half_delta)
        ));
    }
    Ok(CampaignReport {
        beta: format_fraction(&beta),
        orbit_cases,
        orbit_attempts,
        prefix_cases,
        prefix_attempts,
        properties: vec![dominates, kappa_r, gap, closure, exchange, endgame, small],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub graphs: usize,
    pub max_vertices: usize,
    pub density: f64,
    pub seed: u64,
    pub budgets: u64,
    pub max_period: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            graphs: 200,
            max_vertices: 6,
            density: 0.35,
            seed: 1,
            budgets: 5,
            max_period: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetReport {
    pub budget: u64,
    pub orbits: usize,
    /// Orbits outside `A2` averaging at least `β - ε`.
    pub near_optimal_outside: usize,
    pub best_average: String,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub beta: String,
    pub reduced_brute_force: String,
    pub reduced_equal: bool,
    pub graphs: usize,
    pub graphs_equal: usize,
    pub graphs_acyclic: usize,
    pub mismatches: Vec<Value>,
    pub no_beat: Vec<BudgetReport>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.reduced_equal
            && self.graphs_equal == self.graphs
            && self.no_beat.iter().all(|b| b.violations.is_empty())
    }
}

/// Whether Karp and brute force agree on `g`, including on acyclic graphs.
pub fn karp_matches_brute_force(g: &WeightedGraph<Rational>) -> std::result::Result<bool, Value> {
    let karp = max_mean_cycle(g);
    let brute = brute_force_mmc(g, g.vertex_count().max(1));
    let attains = |m: &MeanCycle<Rational>| g.cycle_mean(&m.cycle).as_ref() == Some(&m.value);
    match (karp, brute) {
        (Err(Error::NoCycle), Err(Error::NoCycle)) => Ok(false),
        (Ok(a), Ok(b)) if a.value == b.value && attains(&a) && attains(&b) => Ok(true),
        (a, b) => Err(json!({
            "edges": g.edges().map(|(u, v, w)| json!([u, v, format_fraction(w)])).collect::<Vec<_>>(),
            "karp": a.map(|m| format_fraction(&m.value)).map_err(|e| e.to_string()).unwrap_or_else(|e| e),
            "brute_force": b.map(|m| format_fraction(&m.value)).map_err(|e| e.to_string()).unwrap_or_else(|e| e),
        })),
    }
}

/// Karp against brute force on the reduced lift and on random graphs, and
/// the truncation sweep: no periodic orbit over `I2 + B` symbols beats β,
/// and those outside `A2` within `ε` of β fall strictly short.
pub fn oracle(
    p: &dyn Potential,
    ts: &dyn TransitionSystem,
    opts: &ReduceOptions<Rational>,
    cfg: &OracleConfig,
) -> Result<OracleReport> {
    let sol: Solution<Rational> = solve(p, ts, opts)?;
    let red = &sol.reduction;
    let wg = reduced_lift(p, ts, red)?;
    let brute = brute_force_mmc(&wg, wg.vertex_count())?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut equal, mut acyclic, mut mismatches) = (0, 0, Vec::new());
    for _ in 0..cfg.graphs {
        let n = rng.gen_range(1..=cfg.max_vertices.max(1));
        let g = random_graph(&mut rng, n, cfg.density);
        match karp_matches_brute_force(&g) {
            Ok(cyclic) => {
                equal += 1;
                if !cyclic {
                    acyclic += 1;
                }
            }
            Err(dump) => mismatches.push(dump),
        }
    }

    let floor = &sol.beta - &red.epsilon;
    let top = red.i2.0 + cfg.budgets;
    let all = enumerate_orbits(ts, top, cfg.max_period);
    let mut no_beat = Vec::new();
    for b in 1..=cfg.budgets {
        let limit = Symbol(red.i2.0 + b);
        let mut report = BudgetReport {
            budget: b,
            orbits: 0,
            near_optimal_outside: 0,
            best_average: String::new(),
            violations: Vec::new(),
        };
        let mut best: Option<Rational> = None;
        for x in all.iter().filter(|x| x.symbols().iter().all(|&s| s <= limit)) {
            report.orbits += 1;
            let avg = orbit_average(p, x);
            let outside = !x.contains_only(&red.hull2.symbols);
            let near = outside && avg >= floor;
            if near {
                report.near_optimal_outside += 1;
            }
            if avg > sol.beta || (near && avg >= sol.beta) {
                report.violations.push(format!("{x} averages {}", format_fraction(&avg)));
            }
            if best.as_ref().is_none_or(|v| avg > *v) {
                best = Some(avg);
            }
        }
        report.best_average = best.as_ref().map(format_fraction).unwrap_or_default();
        no_beat.push(report);
    }
    Ok(OracleReport {
        beta: format_fraction(&sol.beta),
        reduced_brute_force: format_fraction(&brute.value),
        reduced_equal: brute.value == sol.beta,
        graphs: cfg.graphs,
        graphs_equal: equal,
        graphs_acyclic: acyclic,
        mismatches,
        no_beat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;
    use crate::potential::{CappedDifference, Linear};
    use crate::shift::{FullShift, Renewal};

    fn small() -> CampaignConfig {
        CampaignConfig {
            cases: 60,
            ..CampaignConfig::default()
        }
    }

    #[test]
    fn renewal_campaign_passes() {
        let r = verify(Arc::new(Linear::negated_index()), &Renewal, &ReduceOptions::new(rat(1, 2)), &small()).unwrap();
        assert_eq!(r.failures(), 0, "{r:#?}");
        assert_eq!(r.orbit_cases, 60);
        assert_eq!(r.prefix_cases, 60);
        assert!(r.property("splice-gap").unwrap().checked == 60);
    }

    #[test]
    fn zero_cases_pass_vacuously() {
        let cfg = CampaignConfig {
            cases: 0,
            ..CampaignConfig::default()
        };
        let r = verify(Arc::new(Linear::negated_index()), &Renewal, &ReduceOptions::new(rat(1, 2)), &cfg).unwrap();
        assert_eq!(r.failures(), 0);
        assert!(r.properties.iter().all(|p| p.checked == 0));
    }

    #[test]
    fn inflated_delta_breaks_the_gap() {
        let cfg = CampaignConfig {
            delta_scale: Some(int(3)),
            ..small()
        };
        let r = verify(Arc::new(Linear::negated_index()), &Renewal, &ReduceOptions::new(rat(1, 2)), &cfg).unwrap();
        assert!(r.property("splice-gap").unwrap().failed > 0);
    }

    #[test]
    fn f2_campaign_passes() {
        let r = verify(Arc::new(CappedDifference::f2()), &FullShift, &ReduceOptions::new(rat(1, 2)), &small()).unwrap();
        assert_eq!(r.failures(), 0, "{r:#?}");
        assert_eq!(r.orbit_cases, 60);
    }

    #[test]
    fn oracle_on_renewal() {
        let cfg = OracleConfig {
            graphs: 40,
            budgets: 3,
            ..OracleConfig::default()
        };
        let r = oracle(&Linear::negated_index(), &Renewal, &ReduceOptions::new(rat(1, 2)), &cfg).unwrap();
        assert!(r.passed(), "{r:#?}");
        assert_eq!(r.beta, "0/1");
        assert_eq!(r.no_beat.len(), 3);
    }
}
