//! Monte Carlo and exact-enumeration experiments comparing rescaled GW/GWI
//! objects with the CSBP/CSBPI kernels.
//!
//! Every experiment is a pure function of its config. Replicas draw from
//! `replica_rng(master, index)` and are collected in index order, so reports
//! do not depend on the size of the rayon pool.

pub mod config;
mod consistency;
mod gwi;
mod occupation;
mod size_biased;
pub mod stats;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::Serialize;

pub use consistency::{
    check_extinction_condition, verify_extinction, verify_self_consistency, ExtinctionConfig,
    SelfConsistencyConfig,
};
pub use gwi::{
    fixed_law_targets, simulate_gwi_marginal, stable_domain_law, verify_ray_knight,
    verify_strong_gwi, Immigrants, MarginalRun, RayKnightConfig, StrongGwiConfig,
};
pub use occupation::{occupation_estimator, verify_local_time, LocalTimeConfig, StepPath};
pub use size_biased::{size_biased_tv, verify_size_biased, SizeBiasedConfig, TvPoint};

use crate::error::{Error, Result};
use crate::mechanisms::{split_literal, Pairs};

/// How γ_p grows with p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ScalingRule {
    /// γ_p = round(factor · p).
    Linear { factor: f64 },
    /// γ_p = round(p^exponent).
    Power { exponent: f64 },
}

impl ScalingRule {
    pub fn gamma(&self, p: u64) -> u64 {
        let g = match *self {
            ScalingRule::Linear { factor } => factor * p as f64,
            ScalingRule::Power { exponent } => (p as f64).powf(exponent),
        };
        (g.round() as u64).max(1)
    }
}

impl Default for ScalingRule {
    fn default() -> Self {
        ScalingRule::Linear { factor: 1.0 }
    }
}

impl fmt::Display for ScalingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalingRule::Linear { factor } => write!(f, "linear:factor={factor}"),
            ScalingRule::Power { exponent } => write!(f, "power:exponent={exponent}"),
        }
    }
}

impl FromStr for ScalingRule {
    type Err = Error;

    /// `linear[:factor=<f>]` or `power:exponent=<f>`.
    fn from_str(s: &str) -> Result<Self> {
        let (family, pairs) = split_literal(s)?;
        let mut p = Pairs::new(s, pairs);
        let rule = match family {
            "linear" => ScalingRule::Linear {
                factor: p.float("factor")?.unwrap_or(1.0),
            },
            "power" => ScalingRule::Power {
                exponent: p.required("exponent")?,
            },
            other => return Err(Error::literal(s, format!("unknown scaling rule `{other}`"))),
        };
        p.finish()?;
        let ok = match rule {
            ScalingRule::Linear { factor } => factor > 0.0 && factor.is_finite(),
            ScalingRule::Power { exponent } => exponent >= 0.0 && exponent.is_finite(),
        };
        if !ok {
            return Err(Error::literal(s, "scaling rule must be nondecreasing in p"));
        }
        Ok(rule)
    }
}

/// Mass scale p and time scale γ_p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingScheme {
    pub p: u64,
    pub gamma_p: u64,
    pub rule: ScalingRule,
}

impl ScalingScheme {
    pub fn new(p: u64, rule: ScalingRule) -> Result<Self> {
        if p == 0 {
            return Err(Error::param("mass scale p must be >= 1"));
        }
        Ok(Self {
            p,
            gamma_p: rule.gamma(p),
            rule,
        })
    }

    /// γ_p = p.
    pub fn identity(p: u64) -> Result<Self> {
        Self::new(p, ScalingRule::default())
    }

    /// The same rule at another mass scale.
    pub fn at(&self, p: u64) -> Result<Self> {
        Self::new(p, self.rule)
    }

    /// [γ_p t]. A relative slack of 1e-12 absorbs decimal round-off such as
    /// 0.3 · 10 = 2.9999999999999996.
    pub fn generations(&self, t: f64) -> u64 {
        (self.gamma_p as f64 * t * (1.0 + 1e-12)).floor() as u64
    }

    /// [p x].
    pub fn initial_population(&self, x: f64) -> u64 {
        (self.p as f64 * x * (1.0 + 1e-12)).floor() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub label: String,
    /// λ, level or index the estimate belongs to.
    pub param: f64,
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
    pub target: Option<f64>,
}

/// A distance between two named comparands, with its pass threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distance {
    pub name: String,
    pub between: [String; 2],
    pub value: f64,
    pub tolerance: f64,
    /// `value <= tolerance`, or `value >= tolerance` for lower bounds.
    pub lower_bound: bool,
    pub passed: bool,
}

impl Distance {
    pub fn at_most(name: &str, a: &str, b: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            between: [a.into(), b.into()],
            value,
            tolerance,
            lower_bound: false,
            passed: value <= tolerance,
        }
    }

    pub fn at_least(name: &str, a: &str, b: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            between: [a.into(), b.into()],
            value,
            tolerance,
            lower_bound: true,
            passed: value >= tolerance,
        }
    }
}

/// A zero-tolerance check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactCheck {
    pub name: String,
    pub checked: u64,
    pub violations: u64,
}

impl ExactCheck {
    pub fn new(name: &str, checked: u64, violations: u64) -> Self {
        Self {
            name: name.into(),
            checked,
            violations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    /// Fully resolved config, defaults included.
    pub config: serde_json::Value,
    pub estimates: Vec<Estimate>,
    pub distances: Vec<Distance>,
    pub exact_checks: Vec<ExactCheck>,
    pub notes: Vec<String>,
    pub passed: bool,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl ExperimentReport {
    pub fn new(experiment: &str, config: &impl Serialize) -> Self {
        Self {
            experiment: experiment.into(),
            config: serde_json::to_value(config).expect("configs serialize"),
            estimates: Vec::new(),
            distances: Vec::new(),
            exact_checks: Vec::new(),
            notes: Vec::new(),
            passed: false,
            wall_time: Duration::ZERO,
        }
    }

    /// Sets `passed` from the distances and exact checks.
    pub fn finalize(mut self, started: std::time::Instant) -> Self {
        self.passed = self.distances.iter().all(|d| d.passed)
            && self.exact_checks.iter().all(|c| c.violations == 0);
        self.wall_time = started.elapsed();
        self
    }

    pub fn distance(&self, name: &str) -> Option<&Distance> {
        self.distances.iter().find(|d| d.name == name)
    }

    pub fn exact_check(&self, name: &str) -> Option<&ExactCheck> {
        self.exact_checks.iter().find(|c| c.name == name)
    }

    /// Estimates as CSV rows `label,param,value,target,stderr,n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,param,value,target,stderr,n\n");
        for e in &self.estimates {
            let target = e.target.map(|t| t.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                e.label, e.param, e.value, target, e.stderr, e.n
            ));
        }
        out
    }
}

/// Runs `f(i)` for i in 0..n on the rayon pool, results in index order.
pub(crate) fn par_replicas<T: Send>(n: usize, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..n as u64).into_par_iter().map(f).collect()
}
