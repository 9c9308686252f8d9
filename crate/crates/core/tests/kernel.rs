use proptest::prelude::*;

use sinlab::csbp::CumulantSolver;
use sinlab::mechanisms::{parse_immigration, BranchingMechanism, ImmigrationMechanism};

fn mechanism() -> impl Strategy<Value = BranchingMechanism> {
    prop_oneof![
        (0.0..2.0f64, 0.1..2.0f64).prop_map(|(a, b)| BranchingMechanism::quadratic(a, b).unwrap()),
        (0.1..2.0f64, 1.1..1.95f64).prop_map(|(c, g)| BranchingMechanism::stable(c, g, 0.0).unwrap()),
        (0.0..1.0f64, 0.1..1.0f64, 0.1..3.0f64, 0.1..2.0f64).prop_map(|(a, b, r, m)| {
            BranchingMechanism::finite_jumps(a, b, vec![(r, m)]).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flow_property(m in mechanism(), a in 0.0..5.0f64, b in 0.0..5.0f64, l in 0.01..100.0f64) {
        let s = CumulantSolver::new(m);
        let direct = s.u(a + b, l).unwrap();
        let composed = s.u(a, s.u(b, l).unwrap()).unwrap();
        prop_assert!((direct - composed).abs() <= 1e-8 * (1.0 + l), "{} vs {}", direct, composed);
    }

    #[test]
    fn u_is_monotone(m in mechanism(), a in 0.0..5.0f64, da in 0.0..2.0f64, l in 0.01..50.0f64, dl in 0.0..50.0f64) {
        let s = CumulantSolver::new(m);
        let u = s.u(a, l).unwrap();
        prop_assert!(u >= 0.0 && u <= l * (1.0 + 1e-12));
        prop_assert!(s.u(a, l + dl).unwrap() >= u * (1.0 - 1e-9));
        prop_assert!(s.u(a + da, l).unwrap() <= u * (1.0 + 1e-9));
    }

    #[test]
    fn csbpi_laplace_range_and_lambda_monotone(
        m in mechanism(),
        a in 0.0..3.0f64,
        l in 0.0..20.0f64,
        dl in 0.0..20.0f64,
        x0 in 0.0..3.0f64,
        rate in 0.0..3.0f64,
    ) {
        let s = CumulantSolver::new(m);
        let imm = ImmigrationMechanism::linear(rate).unwrap();
        let lo = s.csbpi_laplace(&imm, a, l, x0).unwrap().value;
        let hi = s.csbpi_laplace(&imm, a, l + dl, x0).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!(hi <= lo * (1.0 + 1e-8) + 1e-15);
    }

    #[test]
    fn numeric_path_matches_closed_form(m in mechanism(), a in 0.05..10.0f64, l in 0.01..100.0f64) {
        let s = CumulantSolver::new(m);
        let closed = s.u(a, l).unwrap();
        let numeric = s.u_numeric(a, l).unwrap().value;
        prop_assert!((closed - numeric).abs() <= 1e-8 * closed.max(1e-300));
    }
}

fn quad(beta: f64, alpha: f64) -> CumulantSolver {
    CumulantSolver::new(BranchingMechanism::quadratic(alpha, beta).unwrap())
}

#[test]
fn u_examples() {
    assert_eq!(quad(1.0, 0.0).u(1.0, 1.0).unwrap(), 0.5);
    let stable = CumulantSolver::new(BranchingMechanism::stable(1.0, 1.5, 0.0).unwrap());
    assert_eq!(stable.u(0.0, 7.0).unwrap(), 7.0);
    assert!((stable.v(2.0).unwrap().value - 1.0).abs() < 1e-12);
}

#[test]
fn v_examples() {
    assert!((quad(1.0, 0.0).v(2.0).unwrap().value - 0.5).abs() < 1e-14);
    let e = std::f64::consts::E;
    assert!((quad(1.0, 1.0).v(1.0).unwrap().value - 1.0 / (e - 1.0)).abs() < 1e-12);
    let gamma2 = CumulantSolver::new(BranchingMechanism::stable(1.0, 2.0, 0.0).unwrap());
    assert!((gamma2.v(3.0).unwrap().value - 1.0 / 3.0).abs() < 1e-14);
}

#[test]
fn numeric_v_matches_closed_form() {
    let s = quad(1.0, 0.0);
    let v = s.v_numeric(2.0).unwrap().value;
    assert!((v - 0.5).abs() < 1e-7, "{v}");
}

#[test]
fn laplace_examples() {
    let s = quad(1.0, 0.0);
    let v = s.csbp_laplace(1.0, 1.0, 1.0).unwrap().value;
    assert!((v - (-0.5f64).exp()).abs() < 1e-15);
    assert_eq!(s.csbp_laplace(3.0, 2.0, 0.0).unwrap().value, 1.0);
    assert_eq!(s.csbp_laplace(3.0, 0.0, 2.0).unwrap().value, 1.0);

    let m1 = ImmigrationMechanism::linear(1.0).unwrap();
    assert!((s.csbpi_laplace(&m1, 1.0, 1.0, 0.0).unwrap().value - 0.5).abs() < 1e-15);
    assert!((s.csbpi_laplace(&m1, 0.0, 2.0, 1.5).unwrap().value - (-3.0f64).exp()).abs() < 1e-15);
    let m2 = ImmigrationMechanism::linear(2.0).unwrap();
    let v = s.csbpi_laplace(&m2, 1.0, 3.0, 1.0).unwrap().value;
    assert!((v - (-0.75f64).exp() / 16.0).abs() < 1e-15);
}

#[test]
fn quadrature_route_matches_closed_form() {
    // A jump part forces the ODE and the quadrature of φ(u(s, λ)).
    let m = BranchingMechanism::finite_jumps(0.0, 1.0, vec![(1.0, 1e-12)]).unwrap();
    let s = CumulantSolver::new(m);
    let imm = parse_immigration("linear:m=1", None).unwrap();
    for l in [0.5, 1.0, 4.0] {
        let v = s.csbpi_laplace(&imm, 1.0, l, 0.0).unwrap().value;
        assert!((v - 1.0 / (1.0 + l)).abs() < 1e-8, "{l}: {v}");
    }
}
