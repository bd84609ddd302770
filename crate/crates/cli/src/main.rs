//! `cms`: command-line front end for the reduction, solver and campaigns.
//!
//! Reports go to `--out` (or the config's `output`, or stdout); progress and
//! errors go to stderr. The exit status is the machine contract.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cms_ergodic::campaign::{oracle, verify};
use cms_ergodic::numeric::parse_rational;
use cms_ergodic::real_shift::{default_margin, fixed_point_lower_bound, grid_solve, reduce_real};
use cms_ergodic::reduction::reduce;
use cms_ergodic::report::{envelope, grid_report, lift_dot, real_reduction_report, reduction_report, render, solution_report};
use cms_ergodic::solver::{reduced_lift, solve};
use cms_ergodic::{Error, Mode, Rational, Scalar};
use serde_json::{json, Value};

use config::{Frac, RunConfig};

#[derive(Parser)]
#[command(name = "cms", version, about = "Maximizing periodic measures for coercive potentials on countable Markov shifts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce to a finite alphabet and find β with a maximizing orbit.
    Solve(Common),
    /// Compute the thresholds, hulls and constants only.
    Reduce(Common),
    /// Thresholds for a potential on the full shift over the half-line.
    ReduceReal(Common),
    /// Grid approximation of β on the compact part of the half-line shift.
    GridSolve(Common),
    /// Property campaign on sampled orbits and prefixes.
    Verify(Common),
    /// Cross-check the cycle solver and sweep truncations for better orbits.
    Oracle(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Write the reduced lift as Graphviz DOT (solve, reduce).
    #[arg(long, value_name = "PATH")]
    dot: Option<PathBuf>,
    /// Testing hook, e.g. `delta-scale=2` for verify. Repeatable.
    #[arg(long = "debug-inject", value_name = "KEY=VALUE")]
    debug_inject: Vec<String>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "rational" => Ok(Mode::Rational),
        "float" => Ok(Mode::Float),
        _ => Err(format!("expected `rational` or `float`, got `{s}`")),
    }
}

const EXIT_FAILED: u8 = 1;
const EXIT_CERTIFICATION: u8 = 2;
const EXIT_CONSTRUCTION: u8 = 3;
const EXIT_BUDGET: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Certification(_) => EXIT_CERTIFICATION,
        Error::Budget { .. } => EXIT_BUDGET,
        _ => EXIT_CONSTRUCTION,
    }
}

#[derive(Debug, Default)]
struct Injections {
    delta_scale: Option<Rational>,
}

fn parse_injections(items: &[String]) -> Result<Injections, Error> {
    let mut inj = Injections::default();
    for item in items {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--debug-inject expects key=value, got `{item}`")))?;
        match key {
            "delta-scale" => inj.delta_scale = Some(parse_rational(value)?),
            _ => return Err(Error::Config(format!("unknown debug injection `{key}`"))),
        }
    }
    Ok(inj)
}

/// What a command hands back: a report and whether its checks passed.
struct Outcome {
    report: Value,
    passed: bool,
}

fn ok(report: Value) -> Outcome {
    Outcome { report, passed: true }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONSTRUCTION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let (name, common) = match &cli.command {
        Command::Solve(c) => ("solve", c),
        Command::Reduce(c) => ("reduce", c),
        Command::ReduceReal(c) => ("reduce-real", c),
        Command::GridSolve(c) => ("grid-solve", c),
        Command::Verify(c) => ("verify", c),
        Command::Oracle(c) => ("oracle", c),
    };
    match run(name, common) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("cms {name}: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(name: &str, args: &Common) -> Result<ExitCode, Error> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(m) = args.mode {
        cfg.mode = m;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let inj = parse_injections(&args.debug_inject)?;
    if inj.delta_scale.is_some() && name != "verify" {
        return Err(Error::Config("delta-scale only applies to verify".into()));
    }
    if args.dot.is_some() && !matches!(name, "solve" | "reduce") {
        return Err(Error::Config("--dot only applies to solve and reduce".into()));
    }
    let exact_only = matches!(name, "reduce-real" | "grid-solve" | "verify" | "oracle");
    if exact_only && cfg.mode == Mode::Float {
        return Err(Error::Config(format!("{name} runs in rational mode only")));
    }

    let outcome = match (name, cfg.mode) {
        ("solve", Mode::Rational) => cmd_solve::<Rational>(&cfg, args.dot.as_deref())?,
        ("solve", Mode::Float) => cmd_solve::<f64>(&cfg, args.dot.as_deref())?,
        ("reduce", Mode::Rational) => cmd_reduce::<Rational>(&cfg, args.dot.as_deref())?,
        ("reduce", Mode::Float) => cmd_reduce::<f64>(&cfg, args.dot.as_deref())?,
        ("reduce-real", _) => cmd_reduce_real(&cfg)?,
        ("grid-solve", _) => cmd_grid_solve(&cfg)?,
        ("verify", _) => cmd_verify(&cfg, &inj)?,
        ("oracle", _) => cmd_oracle(&cfg)?,
        _ => unreachable!("subcommands are fixed"),
    };

    let mut input = serde_json::to_value(&cfg).expect("config serializes");
    if let Some(s) = &inj.delta_scale {
        input["debug_inject"] = json!({ "delta-scale": Frac(s.clone()) });
    }
    let text = render(&envelope(name, input, outcome.report));
    match args.out.as_ref().or(cfg.output.as_ref()) {
        Some(path) => {
            write(path, &text)?;
            eprintln!("cms {name}: report written to {}", path.display());
        }
        None => print!("{text}"),
    }
    if outcome.passed {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("cms {name}: checks failed, see the report");
        Ok(ExitCode::from(EXIT_FAILED))
    }
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

fn cmd_solve<S: Scalar>(cfg: &RunConfig, dot: Option<&Path>) -> Result<Outcome, Error> {
    let ts = cfg.shift()?;
    let p = cfg.potential()?;
    let sol = solve::<S>(p.as_ref(), ts.as_ref(), &cfg.reduce_options())?;
    eprintln!(
        "cms solve: beta = {} on {} (A2 has {} symbols)",
        sol.beta.to_report(),
        sol.optimal_orbit,
        sol.reduction.hull2.symbols.len()
    );
    if let Some(path) = dot {
        let wg = reduced_lift(p.as_ref(), ts.as_ref(), &sol.reduction)?;
        write(path, &lift_dot(&wg, &sol.cycle))?;
    }
    if !sol.certificate.passed() {
        return Err(Error::Certification(format!("solution failed its own checks: {:?}", sol.certificate)));
    }
    Ok(ok(solution_report(&sol)))
}

fn cmd_reduce<S: Scalar>(cfg: &RunConfig, dot: Option<&Path>) -> Result<Outcome, Error> {
    let ts = cfg.shift()?;
    let p = cfg.potential()?;
    let red = reduce::<S>(p.as_ref(), ts.as_ref(), &cfg.reduce_options())?;
    eprintln!("cms reduce: I1 = {}, I2 = {}, delta = {}", red.i1, red.i2, red.delta.to_report());
    if let Some(path) = dot {
        let wg = reduced_lift(p.as_ref(), ts.as_ref(), &red)?;
        write(path, &lift_dot(&wg, &[]))?;
    }
    Ok(ok(reduction_report(&red)))
}

fn real_beta_lb(cfg: &RunConfig, p: &dyn cms_ergodic::real_shift::RealPotential) -> Result<Rational, Error> {
    match &cfg.beta_lb {
        Some(b) => Ok(b.0.clone()),
        None => fixed_point_lower_bound(p, &(0..=16).map(|i| Rational::new(i.into(), 4.into())).collect::<Vec<_>>()),
    }
}

fn cmd_reduce_real(cfg: &RunConfig) -> Result<Outcome, Error> {
    let p = cfg.real_potential()?;
    let beta_lb = real_beta_lb(cfg, p.as_ref())?;
    let margin = cfg.margin.as_ref().map_or_else(default_margin, |m| m.0.clone());
    let red = reduce_real(p.as_ref(), &cfg.epsilon.0, &beta_lb, &margin)?;
    eprintln!("cms reduce-real: I1 = {}, I2 = {}", red.i1, red.i2);
    Ok(ok(real_reduction_report(&red)))
}

fn cmd_grid_solve(cfg: &RunConfig) -> Result<Outcome, Error> {
    let p = cfg.real_potential()?;
    let (top, reduction) = match &cfg.grid_max {
        Some(t) => (t.0.clone(), Value::Null),
        None => {
            let beta_lb = real_beta_lb(cfg, p.as_ref())?;
            let margin = cfg.margin.as_ref().map_or_else(default_margin, |m| m.0.clone());
            let red = reduce_real(p.as_ref(), &cfg.epsilon.0, &beta_lb, &margin)?;
            (red.i2.clone(), real_reduction_report(&red))
        }
    };
    let g = grid_solve(p.as_ref(), &top, cfg.grid.unwrap_or(17))?;
    eprintln!("cms grid-solve: beta_hat = {} on {} points", g.beta_hat, g.grid.len());
    let mut report = grid_report(&g);
    report["reduction"] = reduction;
    Ok(ok(report))
}

fn cmd_verify(cfg: &RunConfig, inj: &Injections) -> Result<Outcome, Error> {
    let ts = cfg.shift()?;
    let p = cfg.potential()?;
    let mut campaign = cfg.campaign();
    campaign.delta_scale = inj.delta_scale.clone();
    let report = verify(p, ts.as_ref(), &cfg.reduce_options(), &campaign)?;
    for prop in &report.properties {
        eprintln!("cms verify: {:<24} {:>5} checked {:>5} failed", prop.name, prop.checked, prop.failed);
    }
    Ok(Outcome {
        passed: report.failures() == 0,
        report: serde_json::to_value(&report).expect("report serializes"),
    })
}

fn cmd_oracle(cfg: &RunConfig) -> Result<Outcome, Error> {
    let ts = cfg.shift()?;
    let p = cfg.potential()?;
    let report = oracle(p.as_ref(), ts.as_ref(), &cfg.reduce_options(), &cfg.oracle())?;
    eprintln!(
        "cms oracle: reduced lift {}, {}/{} random graphs agree",
        if report.reduced_equal { "agrees" } else { "DISAGREES" },
        report.graphs_equal,
        report.graphs
    );
    Ok(Outcome {
        passed: report.passed(),
        report: serde_json::to_value(&report).expect("report serializes"),
    })
}
