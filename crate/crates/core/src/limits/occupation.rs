//! ε-window occupation estimator of local times for step paths.

use std::time::Instant;

use serde::Serialize;

use super::config::Section;
use super::{par_replicas, ExactCheck, ExperimentReport, ScalingRule, ScalingScheme};
use crate::error::{Error, Result};
use crate::rng::replica_rng;
use crate::trees::{sample_left_height, DispatchingLaw, OffspringLaw};

/// Path equal to `values[i]` on [iδ, (i+1)δ).
#[derive(Debug, Clone, PartialEq)]
pub struct StepPath {
    pub values: Vec<f64>,
    pub delta: f64,
    /// Spacing of the value lattice, if every value is a multiple of it.
    pub lattice: Option<f64>,
}

impl StepPath {
    pub fn new(values: Vec<f64>, delta: f64) -> Self {
        Self {
            values,
            delta,
            lattice: None,
        }
    }

    /// s ↦ γ⁻¹ h_{[s/δ]}: values on γ⁻¹ℤ.
    pub fn from_heights(h: &[u32], gamma: u64, delta: f64) -> Self {
        let g = gamma as f64;
        Self {
            values: h.iter().map(|&x| f64::from(x) / g).collect(),
            delta,
            lattice: Some(1.0 / g),
        }
    }

    pub fn horizon(&self) -> f64 {
        self.values.len() as f64 * self.delta
    }
}

/// x/ℓ as a lattice index, snapping to the nearest integer when within 1e-9.
fn lattice_floor(x: f64, spacing: f64) -> i64 {
    let q = x / spacing;
    let r = q.round();
    if (q - r).abs() < 1e-9 {
        r as i64
    } else {
        q.floor() as i64
    }
}

/// ε⁻¹ ∫ 1{a < H_s ≤ a + ε} ds over the whole path.
///
/// On a lattice path the window is resolved in lattice units, so the result
/// is exactly (number of steps in the window) · δ/ε.
pub fn occupation_estimator(path: &StepPath, a: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::param(format!("eps must be positive, got {eps}")));
    }
    if !(path.delta > 0.0) {
        return Err(Error::param("time mesh must be positive"));
    }
    let count = match path.lattice {
        Some(spacing) => {
            if eps < spacing * (1.0 - 1e-9) {
                return Err(Error::DegenerateEpsilon {
                    eps,
                    resolution: spacing,
                });
            }
            let lo = lattice_floor(a, spacing);
            let hi = lattice_floor(a + eps, spacing);
            path.values
                .iter()
                .filter(|&&v| {
                    let k = (v / spacing).round() as i64;
                    lo < k && k <= hi
                })
                .count()
        }
        None => path.values.iter().filter(|&&v| a < v && v <= a + eps).count(),
    };
    Ok(count as f64 * path.delta / eps)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalTimeConfig {
    pub mu: String,
    pub r: String,
    pub p: u64,
    pub rule: ScalingRule,
    /// Horizon t: each path has [p γ_p t] steps.
    pub t: f64,
    pub paths: usize,
    /// Window widths in lattice units.
    pub widths: Vec<u64>,
    pub seed: u64,
}

impl Default for LocalTimeConfig {
    fn default() -> Self {
        Self {
            mu: "geometric:q=0.5".into(),
            r: "sizebiased".into(),
            p: 20,
            rule: ScalingRule::default(),
            t: 1.0,
            paths: 1000,
            widths: vec![1, 2, 3],
            seed: 6,
        }
    }
}

impl LocalTimeConfig {
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
            p: r.u64_or("p", d.p)?,
            rule,
            t: r.f64_or("t", d.t)?,
            paths: r.usize_or("paths", d.paths)?,
            widths: r.list_or("widths", &d.widths, "a list of positive integers")?,
            seed: r.u64_or("seed", d.seed)?,
        };
        r.finish()?;
        Ok(cfg)
    }
}

/// (levels checked, mismatches) on one path: at every level j and width w
/// the estimator must equal #{i : j < h_i ≤ j + w} · δγ/w.
fn lattice_check(h: &[u32], scheme: &ScalingScheme, widths: &[u64]) -> Result<(u64, u64)> {
    let g = scheme.gamma_p;
    let delta = 1.0 / (scheme.p as f64 * g as f64);
    let path = StepPath::from_heights(h, g, delta);
    let top = h.iter().copied().max().unwrap_or(0) as usize;
    let mut hist = vec![0u64; top + 2];
    for &x in h {
        hist[x as usize] += 1;
    }
    let (mut checked, mut bad) = (0, 0);
    for &w in widths {
        let eps = w as f64 / g as f64;
        for j in 0..=top {
            let a = j as f64 / g as f64;
            let expect: u64 = (j + 1..=(j + w as usize).min(top)).map(|l| hist[l]).sum();
            let got = occupation_estimator(&path, a, eps)?;
            checked += 1;
            if got != expect as f64 * delta / eps {
                bad += 1;
            }
        }
    }
    Ok((checked, bad))
}

/// Lattice exactness of the estimator on rescaled left height paths.
pub fn verify_local_time(cfg: &LocalTimeConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mu: OffspringLaw = cfg.mu.parse()?;
    let r = DispatchingLaw::parse(&cfg.r, &mu)?;
    let scheme = ScalingScheme::new(cfg.p, cfg.rule)?;
    if cfg.widths.contains(&0) {
        return Err(Error::param("window widths must be >= 1"));
    }
    let steps = (scheme.p as f64 * scheme.gamma_p as f64 * cfg.t).floor() as usize;
    let results = par_replicas(cfg.paths, |i| {
        let mut rng = replica_rng(cfg.seed, i);
        let h = sample_left_height(&mu, &r, steps.max(1), &mut rng);
        lattice_check(&h, &scheme, &cfg.widths)
    });
    let (mut checked, mut bad) = (0, 0);
    for res in results {
        let (c, b) = res?;
        checked += c;
        bad += b;
    }
    let mut report = ExperimentReport::new("local-time", cfg);
    report
        .exact_checks
        .push(ExactCheck::new("lattice_occupation_counts", checked, bad));
    report.notes.push(format!(
        "{} paths of {steps} steps, time mesh 1/(p gamma_p), value lattice 1/gamma_p",
        cfg.paths
    ));
    Ok(report.finalize(started))
}
