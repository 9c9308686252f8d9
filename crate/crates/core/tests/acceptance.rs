//! The eight acceptance criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test -p sinlab-core --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use sinlab::csbp::CumulantSolver;
use sinlab::limits::{
    check_extinction_condition, verify_local_time, verify_ray_knight, verify_self_consistency,
    verify_size_biased, verify_strong_gwi, ExperimentReport, LocalTimeConfig, RayKnightConfig,
    ScalingScheme, SelfConsistencyConfig, SizeBiasedConfig, StrongGwiConfig,
};
use sinlab::mechanisms::BranchingMechanism;
use sinlab::trees::{
    height_from_walk, parse_luk, parse_paren, sample_gw, to_luk, to_paren, OffspringLaw,
    OrderedTree,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn criterion(id: u32, title: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let started = Instant::now();
    let out = f();
    let took = started.elapsed();
    let in_budget = took <= budget;
    let passed = out.passed && in_budget;
    println!(
        "[{}] {id}. {title}: {} ({took:.2?}, budget {budget:.0?}{})",
        if passed { "PASS" } else { "FAIL" },
        out.detail,
        if in_budget { "" } else { ", over budget" }
    );
    passed
}

fn check(report: &ExperimentReport, name: &str) -> (bool, u64, u64) {
    let c = report.exact_check(name).expect("check present");
    (c.violations == 0, c.checked, c.violations)
}

fn gap(report: &ExperimentReport, name: &str) -> (bool, f64, f64) {
    let d = report.distance(name).expect("distance present");
    (d.passed, d.value, d.tolerance)
}

fn kernels() -> Outcome {
    let grid_a = [0.1, 1.0, 10.0];
    let grid_l = [0.01, 1.0, 100.0];
    type Closed = Box<dyn Fn(f64, f64) -> f64>;
    let cases: Vec<(String, BranchingMechanism, Closed)> = vec![
        (
            "quadratic".into(),
            BranchingMechanism::quadratic(0.0, 1.0).unwrap(),
            Box::new(|a, l| l / (1.0 + a * l)),
        ),
        (
            "quadratic+drift".into(),
            BranchingMechanism::quadratic(0.7, 1.3).unwrap(),
            Box::new(|a, l| {
                let (al, be) = (0.7f64, 1.3f64);
                al * l * (-al * a).exp() / (al + be * l * (1.0 - (-al * a).exp()))
            }),
        ),
        (
            "stable 1.2".into(),
            BranchingMechanism::stable(1.0, 1.2, 0.0).unwrap(),
            Box::new(|a, l| (l.powf(-0.2) + 0.2 * a).powf(-1.0 / 0.2)),
        ),
        (
            "stable 1.5".into(),
            BranchingMechanism::stable(1.0, 1.5, 0.0).unwrap(),
            Box::new(|a, l| (l.powf(-0.5) + 0.5 * a).powf(-2.0)),
        ),
        (
            "stable 2".into(),
            BranchingMechanism::stable(1.0, 2.0, 0.0).unwrap(),
            Box::new(|a, l| 1.0 / (1.0 / l + a)),
        ),
    ];
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for (name, mech, closed) in &cases {
        let solver = CumulantSolver::new(mech.clone());
        for &a in &grid_a {
            for &l in &grid_l {
                let exact = closed(a, l);
                match solver.u_numeric(a, l) {
                    Ok(kv) => {
                        let rel = (kv.value - exact).abs() / exact;
                        worst = worst.max(rel);
                        if rel > 1e-8 {
                            failures += 1;
                            eprintln!("  {name} a={a} λ={l}: {} vs {exact}", kv.value);
                        }
                    }
                    Err(e) => {
                        failures += 1;
                        eprintln!("  {name} a={a} λ={l}: {e}");
                    }
                }
            }
        }
    }
    Outcome {
        passed: failures == 0,
        detail: format!("max relative error {worst:.2e} over 45 points, tolerance 1e-8"),
    }
}

/// DFS heights from the child counts with an explicit stack of remaining
/// child slots.
fn dfs_heights(kids: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(kids.len());
    let mut open: Vec<u32> = Vec::new();
    for &k in kids {
        out.push(open.len() as u32);
        if k > 0 {
            open.push(k);
            continue;
        }
        while let Some(top) = open.last_mut() {
            *top -= 1;
            if *top > 0 {
                break;
            }
            open.pop();
        }
    }
    out
}

fn all_trees(n: usize) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, need: usize, left: usize, out: &mut Vec<Vec<u32>>) {
        if need == 0 {
            if left == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        if left == 0 {
            return;
        }
        for k in 0..left {
            let need2 = need - 1 + k;
            if need2 > left - 1 {
                break;
            }
            prefix.push(k as u32);
            rec(prefix, need2, left - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), 1, n, &mut out);
    out
}

fn tree_failures(t: &OrderedTree) -> u32 {
    let mut bad = 0;
    if height_from_walk(&t.lukasiewicz()).ok() != Some(dfs_heights(t.kids())) {
        bad += 1;
    }
    if t.mirror().mirror() != *t {
        bad += 1;
    }
    if parse_luk(&to_luk(t)).ok().as_ref() != Some(t) {
        bad += 1;
    }
    if parse_paren(&to_paren(t)).ok().as_ref() != Some(t) {
        bad += 1;
    }
    bad
}

fn codings() -> Outcome {
    let catalan = [1usize, 1, 2, 5, 14, 42, 132, 429];
    let mut checked = 0;
    let mut failures = 0;
    let mut count_ok = true;
    for n in 1..=8 {
        let trees = all_trees(n);
        count_ok &= trees.len() == catalan[n - 1];
        for kids in trees {
            failures += tree_failures(&OrderedTree::from_kids(kids).unwrap());
            checked += 1;
        }
    }
    let laws = [
        OffspringLaw::geometric(0.5).unwrap(),
        OffspringLaw::poisson(1.0).unwrap(),
        OffspringLaw::finite(vec![0.3, 0.3, 0.2, 0.2]).unwrap(),
    ];
    let mut random = 0;
    let mut seed = 0;
    while random < 10_000 {
        seed += 1;
        let law = &laws[seed as usize % laws.len()];
        if let Ok(t) = sample_gw(law, seed, 5_000) {
            failures += tree_failures(&t);
            random += 1;
        }
    }
    Outcome {
        passed: failures == 0 && count_ok,
        detail: format!(
            "{checked} exhaustive (Catalan counts {}) + {random} random trees, {failures} failures",
            if count_ok { "match" } else { "MISMATCH" }
        ),
    }
}

fn strong_gwi() -> Outcome {
    let report = verify_strong_gwi(&StrongGwiConfig::default()).expect("runs");
    let (ok, value, tol) = gap(&report, "laplace_sup_gap");
    Outcome {
        passed: ok,
        detail: format!("sup |Laplace gap| = {value:.5} <= {tol} at N=200000"),
    }
}

fn ray_knight() -> Outcome {
    let report = verify_ray_knight(&RayKnightConfig::default()).expect("runs");
    let (occ_ok, checked, bad) = check(&report, "occupation_identity");
    let (gap_ok, value, tol) = gap(&report, "laplace_sup_gap");
    Outcome {
        passed: occ_ok && gap_ok,
        detail: format!(
            "occupation identity {bad} violations on {checked} levels; \
             sup |Laplace gap| = {value:.5} <= {tol} at N=100000"
        ),
    }
}

fn size_biased() -> Outcome {
    let report = verify_size_biased(&SizeBiasedConfig::default()).expect("runs");
    let (dec_ok, _, _) = check(&report, "tv_strictly_decreasing");
    let (tv_ok, tv, tol) = gap(&report, "tv");
    let series: Vec<String> = report
        .estimates
        .iter()
        .map(|e| format!("{}:{:.5}", e.param, e.value))
        .collect();
    Outcome {
        passed: dec_ok && tv_ok,
        detail: format!(
            "TV {} strictly decreasing={dec_ok}; TV(50) = {tv:.5} <= {tol}; {}",
            series.join(" "),
            report.notes.join("; ")
        ),
    }
}

fn local_time() -> Outcome {
    let report = verify_local_time(&LocalTimeConfig::default()).expect("runs");
    let (ok, checked, bad) = check(&report, "lattice_occupation_counts");
    Outcome {
        passed: ok,
        detail: format!("{bad} mismatches over {checked} (path, level, width) triples on 1000 paths"),
    }
}

fn self_consistency() -> Outcome {
    let report = verify_self_consistency(&SelfConsistencyConfig::default()).expect("runs");
    let (prox_ok, checked, bad) = check(&report, "contour_proximity");
    let (ks_ok, ks, tol) = gap(&report, "ks");
    Outcome {
        passed: prox_ok && ks_ok,
        detail: format!(
            "proximity bounds {bad} violations over {checked} indices; KS(50 vs 100) = {ks:.4} <= {tol}"
        ),
    }
}

fn extinction() -> Outcome {
    let law = OffspringLaw::geometric(0.5).unwrap();
    let v = check_extinction_condition(&law, &ScalingScheme::identity(100).unwrap(), 1.0).unwrap();
    let target = (-1.0f64).exp();
    let closed = (100.0f64 / 101.0).powi(100);
    Outcome {
        passed: (v - target).abs() <= 1e-2 && (v - closed).abs() < 1e-12,
        detail: format!("g_100(0)^100 = {v:.6} (closed form {closed:.6}), |· - e^-1| = {:.2e}", (v - target).abs()),
    }
}

fn main() -> ExitCode {
    let results = [
        criterion(1, "kernel ODE vs closed forms", Duration::from_secs(1), kernels),
        criterion(2, "coding oracles", Duration::from_secs(10), codings),
        criterion(3, "strong GWI Laplace", Duration::from_secs(300), strong_gwi),
        criterion(4, "Ray-Knight skeleton", Duration::from_secs(600), ray_knight),
        criterion(5, "size-biased TV", Duration::from_secs(1), size_biased),
        criterion(6, "local-time lattice exactness", Duration::from_secs(5), local_time),
        criterion(7, "cross-resolution self-consistency", Duration::from_secs(600), self_consistency),
        criterion(8, "extinction condition", Duration::from_millis(1), extinction),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
