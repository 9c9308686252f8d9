use proptest::prelude::*;

use sinlab::mechanisms::{
    check_conditions, eval_phi2, eval_psi, parse_bivariate, BivariateExponent, BranchingMechanism,
    ImmigrationMechanism,
};

fn mechanism() -> impl Strategy<Value = BranchingMechanism> {
    prop_oneof![
        (0.0..3.0f64, 0.01..3.0f64).prop_map(|(a, b)| BranchingMechanism::quadratic(a, b).unwrap()),
        (0.0..3.0f64, 0.1..3.0f64, 1.05..1.99f64)
            .prop_map(|(a, c, g)| BranchingMechanism::stable(c, g, a).unwrap()),
        (
            0.0..2.0f64,
            0.0..2.0f64,
            prop::collection::vec((0.05..5.0f64, 0.01..3.0f64), 1..4)
        )
            .prop_map(|(a, b, atoms)| BranchingMechanism::finite_jumps(a, b, atoms).unwrap()),
    ]
}

proptest! {
    #[test]
    fn psi_is_nondecreasing_and_vanishes_at_zero(m in mechanism(), l1 in 0.0..200.0f64, l2 in 0.0..200.0f64) {
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        prop_assert_eq!(eval_psi(&m, 0.0), 0.0);
        prop_assert!(eval_psi(&m, lo) <= eval_psi(&m, hi) * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn size_biased_phi_is_symmetric(m in mechanism(), p in 0.0..100.0f64, q in 0.0..100.0f64) {
        let b = BivariateExponent::size_biased(m);
        let (x, y) = (eval_phi2(&b, p, q), eval_phi2(&b, q, p));
        prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
    }

    #[test]
    fn phi_is_continuous_at_the_diagonal(m in mechanism(), p in 0.01..100.0f64) {
        let b = BivariateExponent::size_biased(m);
        let on = eval_phi2(&b, p, p);
        let off = eval_phi2(&b, p, p + 1e-6);
        prop_assert!((off - on).abs() <= 1e-4 * (1.0 + on));
    }

    #[test]
    fn grid_phi_is_continuous_at_the_diagonal(
        d in 0.0..3.0f64,
        dp in 0.0..3.0f64,
        atoms in prop::collection::vec((0.0..3.0f64, 0.0..3.0f64, 0.01..2.0f64), 0..4),
        p in 0.01..100.0f64,
    ) {
        let atoms: Vec<_> = atoms.into_iter().filter(|a| a.0 + a.1 > 0.0).collect();
        let b = BivariateExponent::grid(d, dp, atoms).unwrap();
        let on = eval_phi2(&b, p, p);
        prop_assert!((eval_phi2(&b, p, p + 1e-6) - on).abs() <= 1e-4 * (1.0 + on));
    }

    #[test]
    fn derived_immigration_is_the_diagonal(m in mechanism(), l in 0.0..100.0f64) {
        let b = BivariateExponent::size_biased(m);
        let imm = ImmigrationMechanism::from_exponent(b.clone());
        prop_assert_eq!(imm.phi(l), eval_phi2(&b, l, l));
    }
}

#[test]
fn size_biased_diagonal_is_psi_prime_minus_alpha() {
    let m = BranchingMechanism::quadratic(0.5, 1.0).unwrap();
    let b = BivariateExponent::size_biased(m);
    // ψ'(λ) - α = 2βλ.
    for l in [0.1, 1.0, 3.0] {
        assert!((eval_phi2(&b, l, l) - 2.0 * l).abs() < 1e-12);
    }
}

#[test]
fn brownian_size_biased_conditions() {
    let m: BranchingMechanism = "quadratic:beta=1".parse().unwrap();
    let b = parse_bivariate("sizebiased", Some(&m)).unwrap();
    let r = check_conditions(&m, &b);
    assert!(r.subcritical && r.conservative && r.grey && r.uv_continuous);
}

#[test]
fn literals_round_trip_through_display() {
    for s in [
        "quadratic:beta=1.5,alpha=0.25",
        "stable:c=2,gamma=1.5,alpha=0",
    ] {
        let m: BranchingMechanism = s.parse().unwrap();
        let again: BranchingMechanism = m.to_string().parse().unwrap();
        assert_eq!(m, again, "{s}");
    }
}
