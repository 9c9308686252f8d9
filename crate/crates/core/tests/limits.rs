use std::path::PathBuf;

use proptest::prelude::*;

use sinlab::limits::config::Config;
use sinlab::limits::stats::{empirical_laplace, mean_stderr};
use sinlab::limits::{
    simulate_gwi_marginal, verify_strong_gwi, ExtinctionConfig, Immigrants, LocalTimeConfig,
    RayKnightConfig, ScalingScheme, SelfConsistencyConfig, SizeBiasedConfig, StrongGwiConfig,
};
use sinlab::trees::OffspringLaw;

fn pool(n: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let cfg = StrongGwiConfig {
        p: 40,
        replicas: 3000,
        tolerance: 0.05,
        ..Default::default()
    };
    let a = pool(1).install(|| verify_strong_gwi(&cfg).unwrap());
    let b = pool(5).install(|| verify_strong_gwi(&cfg).unwrap());
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn empirical_laplace_in_unit_interval_and_nonincreasing(seed in any::<u64>(), x in 0.0..2.0f64) {
        let mu = OffspringLaw::geometric(0.5).unwrap();
        let nu = OffspringLaw::poisson(1.0).unwrap();
        let s = simulate_gwi_marginal(&mu, Immigrants::Law(&nu), x, ScalingScheme::identity(20).unwrap(), 1.0, 200, seed).unwrap();
        let mut prev = 1.0;
        for l in [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let (v, _) = empirical_laplace(&s, l);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(v <= prev);
            prev = v;
        }
    }
}

#[test]
fn strong_gwi_from_unit_mass() {
    // Target e^{-λ/(1+λ)} (1+λ)^{-1}.
    let cfg = StrongGwiConfig {
        x: 1.0,
        replicas: 50_000,
        tolerance: 0.02,
        ..Default::default()
    };
    let rep = verify_strong_gwi(&cfg).unwrap();
    for e in &rep.estimates {
        if e.label == "laplace" {
            let l = e.param;
            let t = (-l / (1.0 + l)).exp() / (1.0 + l);
            assert!((e.target.unwrap() - t).abs() < 1e-12);
        }
    }
    assert!(rep.passed, "{rep:#?}");
}

#[test]
fn strong_gwi_without_immigration() {
    // Target e^{-x u(t, λ)} with u = λ/(1+λ).
    let cfg = StrongGwiConfig {
        nu: "none".into(),
        x: 1.0,
        replicas: 50_000,
        tolerance: 0.02,
        ..Default::default()
    };
    let rep = verify_strong_gwi(&cfg).unwrap();
    for e in rep.estimates.iter().filter(|e| e.label == "laplace") {
        let t = (-e.param / (1.0 + e.param)).exp();
        assert!((e.target.unwrap() - t).abs() < 1e-12);
    }
    assert!(rep.passed, "{rep:#?}");
}

#[test]
fn mean_consistency_for_critical_configs() {
    for (mu, nu, x) in [
        ("geometric:q=0.5", "poisson:m=1", 0.0),
        ("poisson:m=1", "poisson:m=0.5", 0.5),
        ("pmf:masses=0.25;0.5;0.25", "geometric:q=0.5", 1.0),
    ] {
        let cfg = StrongGwiConfig {
            mu: mu.into(),
            nu: nu.into(),
            x,
            p: 50,
            replicas: 20_000,
            tolerance: 1.0,
            ..Default::default()
        };
        let rep = verify_strong_gwi(&cfg).unwrap();
        let z = rep.distance("mean_z_score").unwrap();
        assert!(z.passed, "{mu} {nu} {x}: z = {}", z.value);
    }
}

#[test]
fn marginal_mean_matches_mean_ode() {
    let mu = OffspringLaw::geometric(0.5).unwrap();
    let nu = OffspringLaw::poisson(1.0).unwrap();
    let s = simulate_gwi_marginal(&mu, Immigrants::Law(&nu), 0.0, ScalingScheme::identity(100).unwrap(), 1.0, 20_000, 11).unwrap();
    let (m, se) = mean_stderr(&s);
    assert!((m - 1.0).abs() <= 3.0 * se, "{m} ± {se}");
}

#[test]
fn committed_configs_resolve() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let read = |name: &str| -> Config {
        std::fs::read_to_string(dir.join(name)).unwrap().parse().unwrap()
    };
    let c = read("strong-gwi.cfg");
    assert_eq!(
        StrongGwiConfig::from_section(c.section("strong-gwi").unwrap()).unwrap(),
        StrongGwiConfig::default()
    );
    let c = read("ray-knight.cfg");
    assert_eq!(
        RayKnightConfig::from_section(c.section("ray-knight").unwrap()).unwrap(),
        RayKnightConfig::default()
    );
    let c = read("self-consistency.cfg");
    assert_eq!(
        SelfConsistencyConfig::from_section(c.section("self-consistency").unwrap()).unwrap(),
        SelfConsistencyConfig::default()
    );
    let c = read("exact.cfg");
    assert_eq!(
        SizeBiasedConfig::from_section(c.section("size-biased").unwrap()).unwrap(),
        SizeBiasedConfig::default()
    );
    assert_eq!(
        ExtinctionConfig::from_section(c.section("extinction").unwrap()).unwrap(),
        ExtinctionConfig::default()
    );
    assert_eq!(
        LocalTimeConfig::from_section(c.section("local-time").unwrap()).unwrap(),
        LocalTimeConfig::default()
    );
}
