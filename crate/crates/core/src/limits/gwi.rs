//! Rescaled GWI population marginals: strong convergence to CSBPI kernels
//! and the discrete Ray-Knight skeleton.

use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use super::config::Section;
use super::stats::{chi_square_gof, empirical_laplace, mean_stderr};
use super::{par_replicas, Distance, Estimate, ExactCheck, ExperimentReport, ScalingRule, ScalingScheme};
use crate::csbp::CumulantSolver;
use crate::error::{Error, Result};
use crate::mechanisms::{parse_immigration, BivariateExponent, BranchingMechanism, ImmigrationMechanism};
use crate::rng::{mix, replica_rng};
use crate::trees::{
    proximity_violations, sample_gwi, spinal_decomposition, DispatchingLaw, OffspringLaw,
};

/// Individuals drawn one by one per replica before a run is aborted.
pub const DEFAULT_POPULATION_CAP: u64 = 10_000_000;
/// Populations above this are refused even with O(1) compound sums.
const HARD_POPULATION_CAP: u64 = 1 << 52;

/// Source of the immigrants added at each generation.
#[derive(Debug, Clone, Copy)]
pub enum Immigrants<'a> {
    None,
    /// ν given directly.
    Law(&'a OffspringLaw),
    /// k - 1 with (k, j) drawn from r, as on the spine of a GWI tree.
    Spine(&'a DispatchingLaw),
}

impl Immigrants<'_> {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            Immigrants::None => 0,
            Immigrants::Law(nu) => nu.sample(rng),
            Immigrants::Spine(r) => u64::from(r.sample(rng).0 - 1),
        }
    }
}

/// Replicas of p⁻¹ Y*_{[γ_p t]} for the recursion
/// Y*_{n+1} = Σ_{i ≤ Y*_n} ξ_i + ζ_n, Y*_0 = [p x].
#[derive(Debug, Clone)]
pub struct MarginalRun<'a> {
    pub mu: &'a OffspringLaw,
    pub immigrants: Immigrants<'a>,
    pub x: f64,
    pub scheme: ScalingScheme,
    pub t: f64,
    pub replicas: usize,
    pub seed: u64,
    pub pop_cap: u64,
}

impl MarginalRun<'_> {
    fn one(&self, index: u64) -> Result<f64> {
        let mut rng = replica_rng(self.seed, index);
        let mut z = self.scheme.initial_population(self.x);
        let mut drawn = 0u64;
        let per_individual = !self.mu.has_compound_sampler();
        for generation in 0..self.scheme.generations(self.t) as usize {
            if per_individual {
                drawn += z;
                if drawn > self.pop_cap {
                    return Err(Error::PopulationCapExceeded {
                        generation,
                        cap: self.pop_cap,
                    });
                }
            }
            if z > HARD_POPULATION_CAP {
                return Err(Error::PopulationCapExceeded {
                    generation,
                    cap: HARD_POPULATION_CAP,
                });
            }
            z = self.mu.sample_sum(z, &mut rng) + self.immigrants.sample(&mut rng);
        }
        Ok(z as f64 / self.scheme.p as f64)
    }

    pub fn sample(&self) -> Result<Vec<f64>> {
        if !(self.t >= 0.0 && self.x >= 0.0) {
            return Err(Error::param("t and x must be >= 0"));
        }
        if self.replicas == 0 {
            return Err(Error::param("at least one replica is needed"));
        }
        par_replicas(self.replicas, |i| self.one(i)).into_iter().collect()
    }
}

/// Samples of p⁻¹ Y*_{[γ_p t]} started from [p x], with the default cap.
pub fn simulate_gwi_marginal(
    mu: &OffspringLaw,
    immigrants: Immigrants<'_>,
    x: f64,
    scheme: ScalingScheme,
    t: f64,
    replicas: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    MarginalRun {
        mu,
        immigrants,
        x,
        scheme,
        t,
        replicas,
        seed,
        pop_cap: DEFAULT_POPULATION_CAP,
    }
    .sample()
}

/// Limit mechanisms of a fixed offspring law under a scheme:
/// α = γ_p(1 - μ̄), β = γ_p σ²/(2p), and immigrants of mean m_left + m_right
/// dispatched as Φ(λ, λ') = γ_p/p (m_left λ + m_right λ').
pub fn fixed_law_targets(
    mu: &OffspringLaw,
    mean_left: f64,
    mean_right: f64,
    scheme: &ScalingScheme,
) -> Result<(BranchingMechanism, ImmigrationMechanism)> {
    let (p, g) = (scheme.p as f64, scheme.gamma_p as f64);
    if mu.mean() > 1.0 + 1e-12 {
        return Err(Error::Unsupported(format!(
            "supercritical offspring mean {} has no CSBP target",
            mu.mean()
        )));
    }
    let alpha = (g * (1.0 - mu.mean())).max(0.0);
    let psi = BranchingMechanism::quadratic(alpha, g * mu.variance() / (2.0 * p))?;
    let phi = BivariateExponent::grid(g / p * mean_left, g / p * mean_right, Vec::new())?;
    Ok((psi, ImmigrationMechanism::from_exponent(phi)))
}

/// Critical law with g(s) = s + (1-s)^γ/γ, in the domain of attraction of
/// the γ-stable law, cut at `cutoff`. The tail mass is moved to the two
/// integers around its conditional mean so that the law stays critical.
///
/// With γ_p = p^{γ-1} the rescaled GW process converges to the CSBP with
/// ψ(λ) = λ^γ/γ.
pub fn stable_domain_law(gamma: f64, cutoff: usize) -> Result<OffspringLaw> {
    if !(gamma > 1.0 && gamma < 2.0) {
        return Err(Error::param(format!("stable index must be in (1,2), got {gamma}")));
    }
    if cutoff < 4 {
        return Err(Error::param("cutoff must be at least 4"));
    }
    let mut masses = vec![0.0; cutoff + 1];
    masses[0] = 1.0 / gamma;
    masses[2] = (gamma - 1.0) / 2.0;
    for k in 2..cutoff {
        masses[k + 1] = masses[k] * (k as f64 - gamma) / (k as f64 + 1.0);
    }
    let tail: f64 = 1.0 - masses.iter().sum::<f64>();
    let tail_mean: f64 = 1.0 - masses.iter().enumerate().map(|(k, p)| k as f64 * p).sum::<f64>();
    if tail > 0.0 && tail_mean > 0.0 {
        let star = tail_mean / tail;
        let lo = star.floor();
        let w_hi = star - lo;
        let lo = lo as usize;
        masses.resize(lo + 2, 0.0);
        masses[lo] += tail * (1.0 - w_hi);
        masses[lo + 1] += tail * w_hi;
    }
    let total: f64 = masses.iter().sum();
    for m in &mut masses {
        *m /= total;
    }
    OffspringLaw::finite(masses)
}

fn laplace_block(
    report: &mut ExperimentReport,
    samples: &[f64],
    lambdas: &[f64],
    target: impl Fn(f64) -> Result<f64>,
    tolerance: f64,
    target_name: &str,
) -> Result<()> {
    let mut gap: f64 = 0.0;
    let mut order: Vec<f64> = lambdas.to_vec();
    order.sort_by(f64::total_cmp);
    let mut prev = f64::INFINITY;
    let mut monotone_violations = 0;
    for &lambda in &order {
        let (value, stderr) = empirical_laplace(samples, lambda);
        let tgt = target(lambda)?;
        gap = gap.max((value - tgt).abs());
        if !(0.0..=1.0).contains(&value) || value > prev {
            monotone_violations += 1;
        }
        prev = value;
        report.estimates.push(Estimate {
            label: "laplace".into(),
            param: lambda,
            value,
            stderr,
            n: samples.len(),
            target: Some(tgt),
        });
    }
    report.distances.push(Distance::at_most(
        "laplace_sup_gap",
        "empirical Laplace transform",
        target_name,
        gap,
        tolerance,
    ));
    report.exact_checks.push(ExactCheck::new(
        "laplace_in_unit_interval_and_nonincreasing",
        order.len() as u64,
        monotone_violations,
    ));
    Ok(())
}

/// |mean - target| in units of the standard error, checked against 4.
fn mean_block(report: &mut ExperimentReport, samples: &[f64], target: f64) {
    let (mean, stderr) = mean_stderr(samples);
    report.estimates.push(Estimate {
        label: "mean".into(),
        param: 0.0,
        value: mean,
        stderr,
        n: samples.len(),
        target: Some(target),
    });
    let z = if stderr > 0.0 {
        (mean - target).abs() / stderr
    } else if mean == target {
        0.0
    } else {
        f64::INFINITY
    };
    report
        .distances
        .push(Distance::at_most("mean_z_score", "sample mean", "CSBPI mean", z, 4.0));
}

/// x e^{-αt} + φ'(0) ∫_0^t e^{-αs} ds.
fn csbpi_mean(psi: &BranchingMechanism, imm: &ImmigrationMechanism, x: f64, t: f64) -> f64 {
    let alpha = psi.alpha();
    let integral = if alpha == 0.0 {
        t
    } else {
        -(-alpha * t).exp_m1() / alpha
    };
    x * (-alpha * t).exp() + imm.mean_rate() * integral
}

fn parse_law(s: &str) -> Result<OffspringLaw> {
    s.parse()
}

fn parse_rule(r: &mut super::config::SectionReader<'_>) -> Result<ScalingRule> {
    match r.string("rule") {
        None => Ok(ScalingRule::default()),
        Some(s) => s.parse().map_err(|e: Error| Error::Config(e.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrongGwiConfig {
    pub mu: String,
    /// Immigration law ν, or `none`.
    pub nu: String,
    pub x: f64,
    pub p: u64,
    pub rule: ScalingRule,
    pub t: f64,
    pub lambdas: Vec<f64>,
    pub replicas: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub pop_cap: u64,
    /// Overrides the fixed-law ψ target.
    pub psi: Option<String>,
    /// Overrides the fixed-law φ target.
    pub phi: Option<String>,
}

impl Default for StrongGwiConfig {
    fn default() -> Self {
        Self {
            mu: "geometric:q=0.5".into(),
            nu: "poisson:m=1".into(),
            x: 0.0,
            p: 100,
            rule: ScalingRule::default(),
            t: 1.0,
            lambdas: vec![0.5, 1.0, 2.0, 4.0],
            replicas: 200_000,
            seed: 1,
            tolerance: 0.01,
            pop_cap: DEFAULT_POPULATION_CAP,
            psi: None,
            phi: None,
        }
    }
}

impl StrongGwiConfig {
    pub fn from_section(section: &Section) -> Result<Self> {
        let d = Self::default();
        let mut r = section.reader();
        let cfg = Self {
            mu: r.string_or("mu", &d.mu),
            nu: r.string_or("nu", &d.nu),
            x: r.f64_or("x", d.x)?,
            p: r.u64_or("p", d.p)?,
            rule: parse_rule(&mut r)?,
            t: r.f64_or("t", d.t)?,
            lambdas: r.list_or("lambdas", &d.lambdas, "a list of numbers")?,
            replicas: r.usize_or("replicas", d.replicas)?,
            seed: r.u64_or("seed", d.seed)?,
            tolerance: r.f64_or("tolerance", d.tolerance)?,
            pop_cap: r.u64_or("pop_cap", d.pop_cap)?,
            psi: r.string("psi"),
            phi: r.string("phi"),
        };
        r.finish()?;
        Ok(cfg)
    }
}

/// Empirical Laplace transform of p⁻¹ Y*_{[γ_p t]} against the CSBPI(ψ, φ)
/// kernel started at x, over a λ grid.
pub fn verify_strong_gwi(cfg: &StrongGwiConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mu = parse_law(&cfg.mu)?;
    let nu = match cfg.nu.as_str() {
        "none" => None,
        s => Some(parse_law(s)?),
    };
    let scheme = ScalingScheme::new(cfg.p, cfg.rule)?;
    let nu_mean = nu.as_ref().map_or(0.0, OffspringLaw::mean);
    let (derived_psi, derived_phi) = fixed_law_targets(&mu, nu_mean, 0.0, &scheme)?;
    let psi = match &cfg.psi {
        Some(s) => s.parse()?,
        None => derived_psi,
    };
    let phi = match &cfg.phi {
        Some(s) => parse_immigration(s, Some(&psi))?,
        None => derived_phi,
    };
    let immigrants = nu.as_ref().map_or(Immigrants::None, Immigrants::Law);
    let run = MarginalRun {
        mu: &mu,
        immigrants,
        x: cfg.x,
        scheme,
        t: cfg.t,
        replicas: cfg.replicas,
        seed: cfg.seed,
        pop_cap: cfg.pop_cap,
    };
    let samples = run.sample()?;

    let solver = CumulantSolver::new(psi.clone());
    let mut report = ExperimentReport::new("strong-gwi", cfg);
    report.notes.push(format!("target psi = {psi}"));
    laplace_block(
        &mut report,
        &samples,
        &cfg.lambdas,
        |l| Ok(solver.csbpi_laplace(&phi, cfg.t, l, cfg.x)?.value),
        cfg.tolerance,
        "CSBPI Laplace kernel",
    )?;
    mean_block(&mut report, &samples, csbpi_mean(&psi, &phi, cfg.x, cfg.t));
    Ok(report.finalize(started))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayKnightConfig {
    pub mu: String,
    pub r: String,
    pub p: u64,
    pub rule: ScalingRule,
    /// Level a; the marginal is taken at generation [γ_p a].
    pub a: f64,
    pub lambdas: Vec<f64>,
    pub replicas: usize,
    /// Fully materialized sin-trees for the exact checks.
    pub exact_trees: usize,
    pub exact_depth: usize,
    pub size_cap: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub pop_cap: u64,
}

impl Default for RayKnightConfig {
    fn default() -> Self {
        Self {
            mu: "geometric:q=0.5".into(),
            r: "sizebiased".into(),
            p: 100,
            rule: ScalingRule::default(),
            a: 1.0,
            lambdas: vec![0.5, 1.0, 2.0, 4.0],
            replicas: 100_000,
            exact_trees: 1000,
            exact_depth: 16,
            size_cap: 1_000_000,
            seed: 2,
            tolerance: 0.015,
            pop_cap: DEFAULT_POPULATION_CAP,
        }
    }
}

impl RayKnightConfig {
    pub fn from_section(section: &Section) -> Result<Self> {
        let d = Self::default();
        let mut r = section.reader();
        let cfg = Self {
            mu: r.string_or("mu", &d.mu),
            r: r.string_or("r", &d.r),
            p: r.u64_or("p", d.p)?,
            rule: parse_rule(&mut r)?,
            a: r.f64_or("a", d.a)?,
            lambdas: r.list_or("lambdas", &d.lambdas, "a list of numbers")?,
            replicas: r.usize_or("replicas", d.replicas)?,
            exact_trees: r.usize_or("exact_trees", d.exact_trees)?,
            exact_depth: r.usize_or("exact_depth", d.exact_depth)?,
            size_cap: r.usize_or("size_cap", d.size_cap)?,
            seed: r.u64_or("seed", d.seed)?,
            tolerance: r.f64_or("tolerance", d.tolerance)?,
            pop_cap: r.u64_or("pop_cap", d.pop_cap)?,
        };
        r.finish()?;
        Ok(cfg)
    }
}

/// Refuses dispatching laws whose limit exponent violates the continuity
/// condition: with a fixed law the limit Φ is pure drift, so both sides need
/// immigrants.
pub(crate) fn require_uv_continuity(r: &DispatchingLaw) -> Result<()> {
    if r.mean_left() * r.mean_right() == 0.0 {
        return Err(Error::DegenerateConfig(format!(
            "dispatching law has mean left/right immigration ({}, {}); the limiting exponent \
             fails the continuity condition",
            r.mean_left(),
            r.mean_right()
        )));
    }
    Ok(())
}

/// Counts on one sin-tree: (levels checked, occupation violations, steps
/// checked, spinal violations, proximity steps, proximity violations).
fn exact_counts(st: &crate::trees::SinTree) -> Result<[u64; 6]> {
    let m = st.depth();
    let y = st.generation_sizes();
    let (occ_l, occ_r) = st.occupation_counts();
    let occ_bad = (0..m).filter(|&n| occ_l[n] + occ_r[n] != y[n] + 2).count() as u64;

    let left = st.left_part_heights();
    let dec = spinal_decomposition(st, left.len())?;
    let rebuilt = dec.reconstruct();
    let spinal_bad = rebuilt.iter().zip(&left).filter(|(a, b)| a != b).count()
        + dec.sandwich_violations().len();

    let prox_steps = left.len().saturating_sub(2) as u64;
    let prox_bad = proximity_violations(&left);
    Ok([
        m as u64,
        occ_bad,
        left.len() as u64,
        spinal_bad as u64,
        prox_steps,
        prox_bad,
    ])
}

/// Exact occupation identity, spinal reconstruction and spine-mark law on
/// materialized sin-trees, plus the Y*-marginal against the CSBPI kernel.
pub fn verify_ray_knight(cfg: &RayKnightConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mu = parse_law(&cfg.mu)?;
    let r = DispatchingLaw::parse(&cfg.r, &mu)?;
    require_uv_continuity(&r)?;
    let scheme = ScalingScheme::new(cfg.p, cfg.rule)?;
    let mut report = ExperimentReport::new("ray-knight", cfg);

    // Exact part. A tree hitting the size cap is redrawn from the next seed.
    let exact_master = mix(cfg.seed, 0x5eed_0001);
    let trees = par_replicas(cfg.exact_trees, |i| -> Result<(crate::trees::SinTree, u64)> {
        let base = mix(exact_master, i);
        for attempt in 0..1000u64 {
            match sample_gwi(&mu, &r, cfg.exact_depth.max(1), mix(base, attempt), cfg.size_cap) {
                Ok(st) => return Ok((st, attempt)),
                Err(Error::SizeCapExceeded { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::SizeCapExceeded {
            partial_size: cfg.size_cap + 1,
            cap: cfg.size_cap,
        })
    });
    let trees: Vec<_> = trees.into_iter().collect::<Result<_>>()?;
    let redraws: u64 = trees.iter().map(|t| t.1).sum();
    let counts = par_replicas(trees.len(), |i| exact_counts(&trees[i as usize].0));
    let mut tot = [0u64; 6];
    for c in counts {
        for (acc, v) in tot.iter_mut().zip(c?) {
            *acc += v;
        }
    }
    report
        .exact_checks
        .push(ExactCheck::new("occupation_identity", tot[0], tot[1]));
    report
        .exact_checks
        .push(ExactCheck::new("spinal_reconstruction", tot[2], tot[3]));
    report
        .exact_checks
        .push(ExactCheck::new("contour_proximity", tot[4], tot[5]));
    report.notes.push(format!(
        "{} sin-trees of spine depth {}; {redraws} redraws after the size cap",
        trees.len(),
        cfg.exact_depth
    ));

    // Spine marks: (j-1, k-j) should follow r(m+m'+1, m+1).
    let mut cells: Vec<(u32, u32, f64)> = r
        .atoms()
        .iter()
        .map(|&(k, j, p)| (j - 1, k - j, p))
        .collect();
    cells.sort_by(|a, b| b.2.total_cmp(&a.2));
    let mut observed = vec![0u64; cells.len()];
    let mut marks = 0u64;
    for (st, _) in &trees {
        for rec in st.spine() {
            marks += 1;
            if let Some(pos) = cells.iter().position(|c| (c.0, c.1) == (rec.j - 1, rec.k - rec.j)) {
                observed[pos] += 1;
            }
        }
    }
    if marks > 0 {
        let probs: Vec<f64> = cells.iter().map(|c| c.2).collect();
        let chi = chi_square_gof(&observed, &probs);
        report.distances.push(Distance::at_least(
            "spine_mark_chi2_p_value",
            "spine marks (L(t), L(mirror t)) jumps",
            "r(m+m'+1, m+1)",
            chi.p_value,
            1e-3,
        ));
    }

    // Statistical part.
    let (psi, phi) = fixed_law_targets(&mu, r.mean_left(), r.mean_right(), &scheme)?;
    report.notes.push(format!(
        "target psi = {psi}, phi(lambda) = {} lambda",
        phi.mean_rate()
    ));
    let run = MarginalRun {
        mu: &mu,
        immigrants: Immigrants::Spine(&r),
        x: 0.0,
        scheme,
        t: cfg.a,
        replicas: cfg.replicas,
        seed: mix(cfg.seed, 0x5eed_0002),
        pop_cap: cfg.pop_cap,
    };
    let samples = run.sample()?;
    let solver = CumulantSolver::new(psi.clone());
    laplace_block(
        &mut report,
        &samples,
        &cfg.lambdas,
        |l| Ok(solver.csbpi_laplace(&phi, cfg.a, l, 0.0)?.value),
        cfg.tolerance,
        "CSBPI Laplace kernel started at 0",
    )?;
    mean_block(&mut report, &samples, csbpi_mean(&psi, &phi, 0.0, cfg.a));
    Ok(report.finalize(started))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn geo() -> OffspringLaw {
        OffspringLaw::geometric(0.5).unwrap()
    }

    #[test]
    fn deterministic_lineage() {
        let scheme = ScalingScheme::identity(10).unwrap();
        let s = simulate_gwi_marginal(&OffspringLaw::dirac(1), Immigrants::None, 1.0, scheme, 1.0, 5, 1)
            .unwrap();
        assert!(s.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn immigrants_die_next_step() {
        let scheme = ScalingScheme::identity(10).unwrap();
        let nu = OffspringLaw::dirac(1);
        let s = simulate_gwi_marginal(&OffspringLaw::dirac(0), Immigrants::Law(&nu), 0.0, scheme, 1.0, 5, 1)
            .unwrap();
        assert!(s.iter().all(|&v| v == 0.1));
    }

    #[test]
    fn mean_matches_mean_ode() {
        let scheme = ScalingScheme::identity(100).unwrap();
        let nu = OffspringLaw::poisson(1.0).unwrap();
        let s = simulate_gwi_marginal(&geo(), Immigrants::Law(&nu), 0.0, scheme, 1.0, 20_000, 7).unwrap();
        let (m, se) = mean_stderr(&s);
        assert!((m - 1.0).abs() < 3.0 * se, "{m} ± {se}");
    }

    #[test]
    fn results_do_not_depend_on_pool_size() {
        let scheme = ScalingScheme::identity(50).unwrap();
        let nu = OffspringLaw::poisson(1.0).unwrap();
        let run = || simulate_gwi_marginal(&geo(), Immigrants::Law(&nu), 0.5, scheme, 1.0, 2000, 3).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(run);
        assert_eq!(one, four);
    }

    #[test]
    fn population_cap() {
        let scheme = ScalingScheme::identity(100).unwrap();
        let sup = OffspringLaw::dirac(2);
        let err = MarginalRun {
            mu: &sup,
            immigrants: Immigrants::None,
            x: 1.0,
            scheme,
            t: 1.0,
            replicas: 1,
            seed: 0,
            pop_cap: 10_000,
        }
        .sample()
        .unwrap_err();
        assert!(matches!(err, Error::PopulationCapExceeded { cap: 10_000, .. }));
    }

    #[test]
    fn fixed_law_targets_for_geometric() {
        let scheme = ScalingScheme::identity(100).unwrap();
        let (psi, phi) = fixed_law_targets(&geo(), 1.0, 1.0, &scheme).unwrap();
        assert_eq!(psi.psi(2.0), 4.0);
        assert_eq!(phi.phi(3.0), 6.0);
    }

    #[test]
    fn bare_spine_is_rejected() {
        let cfg = RayKnightConfig {
            r: "spine".into(),
            ..Default::default()
        };
        assert!(matches!(verify_ray_knight(&cfg), Err(Error::DegenerateConfig(_))));
    }

    #[test]
    fn stable_domain_law_is_critical_with_stable_tail() {
        let gamma: f64 = 1.5;
        let law = stable_domain_law(gamma, 100_000).unwrap();
        assert!((law.mean() - 1.0).abs() < 1e-9);
        // p γ_p (g(1 - λ/p) - (1 - λ/p)) = λ^γ/γ for the untruncated law.
        let p: f64 = 400.0;
        let gp = p.powf(gamma - 1.0);
        for lambda in [0.5, 1.0, 2.0] {
            let s = 1.0 - lambda / p;
            let lhs = p * gp * (law.gf(s) - s);
            let rhs = lambda.powf(gamma) / gamma;
            assert!((lhs - rhs).abs() < 1e-3 * rhs, "{lambda}: {lhs} vs {rhs}");
        }
        let mut rng = rng_from_seed(1);
        let draws: u64 = (0..100_000).map(|_| law.sample(&mut rng)).filter(|&k| k == 0).count() as u64;
        assert!((draws as f64 / 1e5 - 1.0 / gamma).abs() < 0.01);
    }

    #[test]
    fn small_strong_gwi_run_passes() {
        let cfg = StrongGwiConfig {
            p: 50,
            replicas: 20_000,
            tolerance: 0.03,
            ..Default::default()
        };
        let rep = verify_strong_gwi(&cfg).unwrap();
        assert!(rep.passed, "{rep:#?}");
        assert_eq!(rep.estimates.len(), 5);
    }
}
