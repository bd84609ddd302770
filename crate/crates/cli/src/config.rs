//! Run configuration and the family registry.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use cms_ergodic::campaign::{CampaignConfig, OracleConfig};
use cms_ergodic::numeric::{format_fraction, parse_rational};
use cms_ergodic::potential::{CappedDifference, Constant, Linear, Potential, Table};
use cms_ergodic::real_shift::{AbsDistance, RealConstant, RealLinear, RealPotential};
use cms_ergodic::reduction::{ReduceOptions, Thresholds};
use cms_ergodic::shift::{Band, ConnectPolicy, ExplicitShift, FullShift, Renewal, TailRule, TransitionSystem};
use cms_ergodic::{Error, Mode, Rational, Result, Scalar};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// An exact rational written as `"p/q"`, a decimal string, or a JSON integer.
#[derive(Debug, Clone, PartialEq)]
pub struct Frac(pub Rational);

impl Serialize for Frac {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_fraction(&self.0))
    }
}

impl<'de> Deserialize<'de> for Frac {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Frac;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational as \"p/q\", a decimal string or an integer")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Frac, E> {
                parse_rational(v).map(Frac).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Frac, E> {
                Ok(Frac(Rational::from_integer(v.into())))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Frac, E> {
                Ok(Frac(Rational::from_integer(v.into())))
            }
        }
        d.deserialize_any(V)
    }
}

fn frac(n: i64) -> Frac {
    Frac(Rational::from_integer(n.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ShiftSpec {
    Full,
    Renewal,
    Band {
        width: u64,
    },
    AdjacencyFile {
        path: PathBuf,
        /// `none`, `full`, `renewal` or `band:b`.
        #[serde(default = "tail_none")]
        tail: String,
        #[serde(default = "yes")]
        irreducible: bool,
    },
}

fn tail_none() -> String {
    "none".into()
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `intercept - slope · x_0`.
    Linear {
        #[serde(default = "one")]
        slope: Frac,
        #[serde(default = "zero")]
        intercept: Frac,
    },
    CappedDifference {
        #[serde(default = "one")]
        slope: Frac,
        #[serde(default = "zero")]
        intercept: Frac,
        #[serde(default = "one")]
        penalty: Frac,
        #[serde(default = "one")]
        cap: Frac,
    },
    F2,
    Constant {
        value: Frac,
    },
    /// Values on `0..len`, then `tail_intercept - tail_slope · i`.
    Table {
        values: Vec<Frac>,
        tail_slope: Frac,
        tail_intercept: Frac,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RealPotentialSpec {
    /// `-scale · |x_0 - center|`.
    AbsDistance {
        center: Frac,
        #[serde(default = "one")]
        scale: Frac,
    },
    Linear {
        #[serde(default = "one")]
        slope: Frac,
        #[serde(default = "zero")]
        intercept: Frac,
    },
    Constant {
        value: Frac,
    },
}

fn one() -> Frac {
    frac(1)
}

fn zero() -> Frac {
    frac(0)
}

/// Search and test limits; absent fields keep the library defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connect_max_symbol: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connect_max_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_limit: Option<u64>,
    /// Generated cases per campaign property.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cases: Option<usize>,
    /// Symbols beyond `I2` the generators and the no-beat sweep may use.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol_budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_period: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_graphs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_max_vertices: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<ShiftSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real_potential: Option<RealPotentialSpec>,
    pub epsilon: Frac,
    #[serde(default = "rational_mode")]
    pub mode: Mode,
    #[serde(default = "coercive")]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub refine: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_lb: Option<Frac>,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default = "seed_one")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Strictness margin added to the real-shift `I2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<Frac>,
    /// Grid points for `grid-solve`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    /// Right end of the grid; the certified `I2` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_max: Option<Frac>,
}

fn rational_mode() -> Mode {
    Mode::Rational
}

fn coercive() -> Thresholds {
    Thresholds::Coercive
}

fn seed_one() -> u64 {
    1
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = self;
        if cfg.epsilon.0 <= Rational::from_integer(0.into()) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        let b = &cfg.budgets;
        let positive = [
            b.connect_max_symbol.map(|v| v as usize),
            b.connect_max_len,
            b.truncation_limit.map(|v| v as usize),
            b.max_period,
            b.oracle_max_vertices,
        ];
        if positive.iter().flatten().any(|&v| v == 0) {
            return Err(Error::Config("budgets must be positive".into()));
        }
        if cfg.grid.is_some_and(|n| n < 2) {
            return Err(Error::Config("grid needs at least 2 points".into()));
        }
        Ok(())
    }

    /// Relative adjacency-file paths resolve against the config's directory.
    pub fn resolve_paths(&mut self, base: &Path) {
        if let Some(ShiftSpec::AdjacencyFile { path, .. }) = &mut self.shift {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }

    pub fn shift(&self) -> Result<Box<dyn TransitionSystem>> {
        let spec = self.shift.as_ref().ok_or_else(|| Error::Config("`shift` is required".into()))?;
        Ok(match spec {
            ShiftSpec::Full => Box::new(FullShift),
            ShiftSpec::Renewal => Box::new(Renewal),
            ShiftSpec::Band { width } => Box::new(Band::new(*width)),
            ShiftSpec::AdjacencyFile { path, tail, irreducible } => {
                Box::new(ExplicitShift::from_file(path, TailRule::parse(tail)?, *irreducible)?)
            }
        })
    }

    pub fn potential(&self) -> Result<Arc<dyn Potential>> {
        let spec = self.potential.as_ref().ok_or_else(|| Error::Config("`potential` is required".into()))?;
        Ok(match spec {
            PotentialSpec::Linear { slope, intercept } => Arc::new(Linear::new(slope.0.clone(), intercept.0.clone())?),
            PotentialSpec::CappedDifference {
                slope,
                intercept,
                penalty,
                cap,
            } => Arc::new(CappedDifference::new(
                slope.0.clone(),
                intercept.0.clone(),
                penalty.0.clone(),
                cap.0.clone(),
            )?),
            PotentialSpec::F2 => Arc::new(CappedDifference::f2()),
            PotentialSpec::Constant { value } => Arc::new(Constant::new(value.0.clone())),
            PotentialSpec::Table {
                values,
                tail_slope,
                tail_intercept,
            } => Arc::new(Table::new(
                values.iter().map(|v| v.0.clone()).collect(),
                tail_slope.0.clone(),
                tail_intercept.0.clone(),
            )?),
        })
    }

    pub fn real_potential(&self) -> Result<Box<dyn RealPotential>> {
        let spec = self
            .real_potential
            .as_ref()
            .ok_or_else(|| Error::Config("`real_potential` is required".into()))?;
        Ok(match spec {
            RealPotentialSpec::AbsDistance { center, scale } => Box::new(AbsDistance::new(center.0.clone(), scale.0.clone())?),
            RealPotentialSpec::Linear { slope, intercept } => Box::new(RealLinear::new(slope.0.clone(), intercept.0.clone())?),
            RealPotentialSpec::Constant { value } => Box::new(RealConstant { value: value.0.clone() }),
        })
    }

    pub fn reduce_options<S: Scalar>(&self) -> ReduceOptions<S> {
        let mut o = ReduceOptions::new(S::from_rational(&self.epsilon.0));
        o.thresholds = self.thresholds;
        o.refine = self.refine;
        let default = ConnectPolicy::default();
        o.connect = ConnectPolicy {
            max_symbol: self.budgets.connect_max_symbol.unwrap_or(default.max_symbol),
            max_len: self.budgets.connect_max_len.unwrap_or(default.max_len),
        };
        if let Some(t) = self.budgets.truncation_limit {
            o.truncation_limit = t;
        }
        o.beta_lb = self.beta_lb.as_ref().map(|b| S::from_rational(&b.0));
        o
    }

    pub fn campaign(&self) -> CampaignConfig {
        let d = CampaignConfig::default();
        CampaignConfig {
            cases: self.budgets.cases.unwrap_or(d.cases),
            seed: self.seed,
            budget: self.budgets.symbol_budget.unwrap_or(d.budget),
            max_period: self.budgets.max_period.unwrap_or(d.max_period),
            ..d
        }
    }

    pub fn oracle(&self) -> OracleConfig {
        let d = OracleConfig::default();
        OracleConfig {
            graphs: self.budgets.oracle_graphs.unwrap_or(d.graphs),
            max_vertices: self.budgets.oracle_max_vertices.unwrap_or(d.max_vertices),
            seed: self.seed,
            budgets: self.budgets.symbol_budget.unwrap_or(d.budgets),
            max_period: self.budgets.max_period.unwrap_or(d.max_period),
            ..d
        }
    }
}
