//! Cross-resolution self-consistency of rescaled left height processes and
//! the extinction condition on the generating functions.

use std::time::Instant;

use serde::Serialize;

use super::config::Section;
use super::gwi::require_uv_continuity;
use super::stats::ks_two_sample;
use super::{par_replicas, Distance, Estimate, ExactCheck, ExperimentReport, ScalingRule, ScalingScheme};
use crate::error::{Error, Result};
use crate::rng::{mix, replica_rng};
use crate::trees::{gf_iterate, proximity_violations, sample_left_height, DispatchingLaw, OffspringLaw};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfConsistencyConfig {
    pub mu: String,
    pub r: String,
    pub p1: u64,
    pub p2: u64,
    pub rule: ScalingRule,
    pub t_grid: Vec<f64>,
    pub replicas: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for SelfConsistencyConfig {
    fn default() -> Self {
        Self {
            mu: "geometric:q=0.5".into(),
            r: "sizebiased".into(),
            p1: 50,
            p2: 100,
            rule: ScalingRule::default(),
            t_grid: vec![1.0],
            replicas: 10_000,
            seed: 4,
            tolerance: 0.05,
        }
    }
}

impl SelfConsistencyConfig {
    pub fn from_section(section: &Section) -> Result<Self> {
        let d = Self::default();
        let mut r = section.reader();
        let rule = match r.string("rule") {
            None => d.rule,
            Some(s) => s.parse()?,
        };
        let cfg = Self {
            mu: r.string_or("mu", &d.mu),
            r: r.string_or("r", &d.r),
            p1: r.u64_or("p1", d.p1)?,
            p2: r.u64_or("p2", d.p2)?,
            rule,
            t_grid: r.list_or("t_grid", &d.t_grid, "a list of numbers")?,
            replicas: r.usize_or("replicas", d.replicas)?,
            seed: r.u64_or("seed", d.seed)?,
            tolerance: r.f64_or("tolerance", d.tolerance)?,
        };
        r.finish()?;
        Ok(cfg)
    }
}

/// γ_p⁻¹ ←H_{[p γ_p t]} for each t, and the proximity violation count of
/// the sampled prefix.
fn one_path(
    mu: &OffspringLaw,
    r: &DispatchingLaw,
    scheme: &ScalingScheme,
    t_grid: &[f64],
    seed: u64,
) -> (Vec<f64>, u64, u64) {
    let pg = scheme.p as f64 * scheme.gamma_p as f64;
    let index = |t: f64| (pg * t * (1.0 + 1e-12)).floor() as usize;
    let last = t_grid.iter().map(|&t| index(t)).max().unwrap_or(0);
    let mut rng = replica_rng(seed, 0);
    let h = sample_left_height(mu, r, last + 2, &mut rng);
    let values = t_grid
        .iter()
        .map(|&t| f64::from(h[index(t)]) / scheme.gamma_p as f64)
        .collect();
    (values, h.len().saturating_sub(2) as u64, proximity_violations(&h))
}

/// KS distance between the laws of γ_p⁻¹ ←H_{[p γ_p t]} at p1 and p2, with
/// the contour proximity bounds checked on every sampled path.
pub fn verify_self_consistency(cfg: &SelfConsistencyConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mu: OffspringLaw = cfg.mu.parse()?;
    let r = DispatchingLaw::parse(&cfg.r, &mu)?;
    require_uv_continuity(&r)?;
    if cfg.p1 >= cfg.p2 {
        return Err(Error::param(format!("need p1 < p2, got {} and {}", cfg.p1, cfg.p2)));
    }
    if cfg.t_grid.is_empty() || cfg.t_grid.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::param("t_grid must hold positive times"));
    }
    if cfg.replicas == 0 {
        return Err(Error::param("at least one replica is needed"));
    }
    let schemes = [
        ScalingScheme::new(cfg.p1, cfg.rule)?,
        ScalingScheme::new(cfg.p2, cfg.rule)?,
    ];
    let mut report = ExperimentReport::new("self-consistency", cfg);
    let mut samples: Vec<Vec<Vec<f64>>> = Vec::new();
    let (mut checked, mut bad) = (0u64, 0u64);
    for (s, scheme) in schemes.iter().enumerate() {
        let master = mix(cfg.seed, s as u64);
        let runs = par_replicas(cfg.replicas, |i| {
            one_path(&mu, &r, scheme, &cfg.t_grid, mix(master, i))
        });
        let mut per_t = vec![Vec::with_capacity(cfg.replicas); cfg.t_grid.len()];
        for (values, c, b) in runs {
            checked += c;
            bad += b;
            for (slot, v) in per_t.iter_mut().zip(values) {
                slot.push(v);
            }
        }
        samples.push(per_t);
    }
    let mut max_ks: f64 = 0.0;
    for (k, &t) in cfg.t_grid.iter().enumerate() {
        let ks = ks_two_sample(&samples[0][k], &samples[1][k]);
        max_ks = max_ks.max(ks);
        report.estimates.push(Estimate {
            label: "ks".into(),
            param: t,
            value: ks,
            stderr: 0.0,
            n: cfg.replicas,
            target: None,
        });
    }
    report.distances.push(Distance::at_most(
        "ks",
        &format!("rescaled left height at p={}", cfg.p1),
        &format!("rescaled left height at p={}", cfg.p2),
        max_ks,
        cfg.tolerance,
    ));
    report
        .exact_checks
        .push(ExactCheck::new("contour_proximity", checked, bad));
    Ok(report.finalize(started))
}

/// g_{[δ γ_p]}(0)^p, the probability that p independent trees are extinct
/// by generation [δ γ_p].
pub fn check_extinction_condition(mu: &OffspringLaw, scheme: &ScalingScheme, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param(format!("delta must be positive, got {delta}")));
    }
    let n = scheme.generations(delta) as usize;
    Ok(gf_iterate(mu, n, 0.0).powf(scheme.p as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtinctionConfig {
    pub mu: String,
    pub rule: ScalingRule,
    pub delta: f64,
    pub p_ladder: Vec<u64>,
    pub p_check: u64,
    pub target: f64,
    pub tolerance: f64,
}

impl Default for ExtinctionConfig {
    fn default() -> Self {
        Self {
            mu: "geometric:q=0.5".into(),
            rule: ScalingRule::default(),
            delta: 1.0,
            p_ladder: vec![10, 100, 1000, 10_000],
            p_check: 100,
            target: (-1.0f64).exp(),
            tolerance: 1e-2,
        }
    }
}

impl ExtinctionConfig {
    pub fn from_section(section: &Section) -> Result<Self> {
        let d = Self::default();
        let mut r = section.reader();
        let rule = match r.string("rule") {
            None => d.rule,
            Some(s) => s.parse()?,
        };
        let cfg = Self {
            mu: r.string_or("mu", &d.mu),
            rule,
            delta: r.f64_or("delta", d.delta)?,
            p_ladder: r.list_or("p_ladder", &d.p_ladder, "a list of positive integers")?,
            p_check: r.u64_or("p_check", d.p_check)?,
            target: r.f64_or("target", d.target)?,
            tolerance: r.f64_or("tolerance", d.tolerance)?,
        };
        r.finish()?;
        Ok(cfg)
    }
}

/// The extinction probability along a p ladder must stay positive, and at
/// p_check it must be within tolerance of the target.
pub fn verify_extinction(cfg: &ExtinctionConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mu: OffspringLaw = cfg.mu.parse()?;
    let mut report = ExperimentReport::new("extinction", cfg);
    let mut nonpositive = 0;
    for &p in &cfg.p_ladder {
        let v = check_extinction_condition(&mu, &ScalingScheme::new(p, cfg.rule)?, cfg.delta)?;
        if !(v > 0.0) {
            nonpositive += 1;
        }
        report.estimates.push(Estimate {
            label: "extinction".into(),
            param: p as f64,
            value: v,
            stderr: 0.0,
            n: 0,
            target: None,
        });
    }
    report.exact_checks.push(ExactCheck::new(
        "positive_along_ladder",
        cfg.p_ladder.len() as u64,
        nonpositive,
    ));
    let at = check_extinction_condition(&mu, &ScalingScheme::new(cfg.p_check, cfg.rule)?, cfg.delta)?;
    report.estimates.push(Estimate {
        label: "extinction_check".into(),
        param: cfg.p_check as f64,
        value: at,
        stderr: 0.0,
        n: 0,
        target: Some(cfg.target),
    });
    report.distances.push(Distance::at_most(
        "extinction_gap",
        &format!("g_[delta gamma_p](0)^p at p={}", cfg.p_check),
        "target",
        (at - cfg.target).abs(),
        cfg.tolerance,
    ));
    Ok(report.finalize(started))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geo() -> OffspringLaw {
        OffspringLaw::geometric(0.5).unwrap()
    }

    #[test]
    fn geometric_closed_form() {
        // g_n(0) = n/(n+1).
        for p in [1u64, 7, 100, 1000] {
            let s = ScalingScheme::identity(p).unwrap();
            let v = check_extinction_condition(&geo(), &s, 1.0).unwrap();
            let pf = p as f64;
            let exact = (pf / (pf + 1.0)).powf(pf);
            assert!((v - exact).abs() < 1e-9 * exact, "{p}");
        }
        let s = ScalingScheme::identity(100_000).unwrap();
        let v = check_extinction_condition(&geo(), &s, 2.0).unwrap();
        assert!((v - (-0.5f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn immediate_extinction() {
        let law = OffspringLaw::dirac(0);
        for p in [1, 10, 1000] {
            let s = ScalingScheme::identity(p).unwrap();
            assert_eq!(check_extinction_condition(&law, &s, 1.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn default_extinction_passes() {
        let rep = verify_extinction(&ExtinctionConfig::default()).unwrap();
        assert!(rep.passed);
        let v = rep.estimates.last().unwrap().value;
        assert!((v - (100.0f64 / 101.0).powi(100)).abs() < 1e-12);
    }

    #[test]
    fn self_consistency_rejects_bad_configs() {
        let bare = SelfConsistencyConfig {
            r: "spine".into(),
            ..Default::default()
        };
        assert!(matches!(verify_self_consistency(&bare), Err(Error::DegenerateConfig(_))));
        let order = SelfConsistencyConfig {
            p1: 100,
            p2: 50,
            ..Default::default()
        };
        assert!(verify_self_consistency(&order).is_err());
    }

    #[test]
    fn small_self_consistency_run() {
        let cfg = SelfConsistencyConfig {
            p1: 10,
            p2: 20,
            replicas: 2000,
            tolerance: 0.1,
            ..Default::default()
        };
        let rep = verify_self_consistency(&cfg).unwrap();
        assert_eq!(rep.exact_check("contour_proximity").unwrap().violations, 0);
        assert!(rep.passed, "{rep:#?}");
    }
}
