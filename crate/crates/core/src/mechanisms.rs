//! Branching mechanisms ψ, bivariate exponents Φ and immigration mechanisms φ.
//!
//! ψ(λ) = αλ + βλ² + ∫ π(dr) (e^{-λr} - 1 + λr) with α, β ≥ 0, where the Lévy
//! measure π is restricted to a few parametric families so that the Grey and
//! conservativity conditions can be decided analytically.
//!
//! Φ(p, q) = d p + d' q + ∫ R(dx dy) (1 - e^{-px-qy}) is either given by a
//! finite grid of atoms or is the size-biased exponent
//! (ψ*(p) - ψ*(q)) / (p - q) with ψ*(λ) = ψ(λ) - αλ.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Below this relative separation the size-biased exponent switches from the
/// difference quotient to the analytic derivative.
pub const DIAGONAL_SWITCH: f64 = 1e-8;

/// `e^{-x} - 1 + x` without cancellation for small `x`.
pub(crate) fn exp_m1_plus(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        x2 * (0.5 - x / 6.0 + x2 / 24.0 - x2 * x / 120.0 + x2 * x2 / 720.0)
    } else {
        (-x).exp_m1() + x
    }
}

/// `1 - e^{-x}`.
pub(crate) fn one_minus_exp(x: f64) -> f64 {
    -(-x).exp_m1()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Jumps {
    None,
    /// π(dr) ∝ r^{-1-γ} dr normalized so that its ψ-contribution is c λ^γ.
    Stable { c: f64, gamma: f64 },
    /// Atoms `(r_i, mass_i)`.
    FiniteList { atoms: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchingMechanism {
    alpha: f64,
    beta: f64,
    jumps: Jumps,
}

fn check_nonneg(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be finite and >= 0, got {x}")))
    }
}

impl BranchingMechanism {
    pub fn new(alpha: f64, beta: f64, jumps: Jumps) -> Result<Self> {
        check_nonneg("alpha", alpha)?;
        check_nonneg("beta", beta)?;
        let jumps = match jumps {
            Jumps::Stable { c, gamma } => {
                if !(c.is_finite() && c > 0.0) {
                    return Err(Error::param(format!("stable c must be > 0, got {c}")));
                }
                if gamma == 2.0 {
                    // γ = 2 is the quadratic part.
                    return Self::new(alpha, beta + c, Jumps::None);
                }
                if !(gamma > 1.0 && gamma < 2.0) {
                    return Err(Error::param(format!(
                        "stable gamma must lie in (1, 2], got {gamma}"
                    )));
                }
                Jumps::Stable { c, gamma }
            }
            Jumps::FiniteList { atoms } => {
                for &(r, m) in &atoms {
                    if !(r.is_finite() && r > 0.0 && m.is_finite() && m > 0.0) {
                        return Err(Error::param(format!(
                            "jump atoms need r > 0 and mass > 0, got ({r}, {m})"
                        )));
                    }
                }
                if atoms.is_empty() {
                    Jumps::None
                } else {
                    Jumps::FiniteList { atoms }
                }
            }
            Jumps::None => Jumps::None,
        };
        Ok(Self { alpha, beta, jumps })
    }

    /// ψ(λ) = αλ + βλ².
    pub fn quadratic(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, Jumps::None)
    }

    /// ψ(λ) = αλ + cλ^γ; `gamma = 2` is folded into β.
    pub fn stable(c: f64, gamma: f64, alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0, Jumps::Stable { c, gamma })
    }

    pub fn finite_jumps(alpha: f64, beta: f64, atoms: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(alpha, beta, Jumps::FiniteList { atoms })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn jumps(&self) -> &Jumps {
        &self.jumps
    }

    pub fn psi(&self, lambda: f64) -> f64 {
        self.alpha * lambda + self.psi_star(lambda)
    }

    /// ψ*(λ) = ψ(λ) - αλ.
    pub fn psi_star(&self, lambda: f64) -> f64 {
        let jump_part = match &self.jumps {
            Jumps::None => 0.0,
            Jumps::Stable { c, gamma } => c * lambda.powf(*gamma),
            Jumps::FiniteList { atoms } => atoms
                .iter()
                .map(|&(r, m)| m * exp_m1_plus(lambda * r))
                .sum(),
        };
        self.beta * lambda * lambda + jump_part
    }

    /// ψ'(λ).
    pub fn psi_prime(&self, lambda: f64) -> f64 {
        let jump_part = match &self.jumps {
            Jumps::None => 0.0,
            Jumps::Stable { c, gamma } => {
                if lambda == 0.0 {
                    0.0
                } else {
                    c * gamma * lambda.powf(gamma - 1.0)
                }
            }
            Jumps::FiniteList { atoms } => atoms
                .iter()
                .map(|&(r, m)| m * r * one_minus_exp(lambda * r))
                .sum(),
        };
        self.alpha + 2.0 * self.beta * lambda + jump_part
    }

    /// Grey condition ∫^∞ du/ψ(u) < ∞.
    pub fn is_grey(&self) -> bool {
        self.beta > 0.0 || matches!(self.jumps, Jumps::Stable { .. })
    }

    /// Whether the Lévy measure has infinite total mass.
    pub fn has_infinite_levy_mass(&self) -> bool {
        matches!(self.jumps, Jumps::Stable { .. })
    }
}

/// Free function form of [`BranchingMechanism::psi`].
pub fn eval_psi(m: &BranchingMechanism, lambda: f64) -> f64 {
    m.psi(lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevyMeasure2 {
    /// Atoms `(x_i, y_i, mass_i)` on (0,∞)².
    FiniteGrid { atoms: Vec<(f64, f64, f64)> },
    /// The size-biased exponent built from ψ.
    SizeBiased { mechanism: BranchingMechanism },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BivariateExponent {
    d: f64,
    dprime: f64,
    measure: LevyMeasure2,
}

impl BivariateExponent {
    pub fn grid(d: f64, dprime: f64, atoms: Vec<(f64, f64, f64)>) -> Result<Self> {
        check_nonneg("d", d)?;
        check_nonneg("dprime", dprime)?;
        for &(x, y, m) in &atoms {
            let ok = x.is_finite() && y.is_finite() && x >= 0.0 && y >= 0.0 && x + y > 0.0;
            if !ok || !(m.is_finite() && m > 0.0) {
                return Err(Error::param(format!(
                    "grid atoms need x, y >= 0 with x + y > 0 and mass > 0, got ({x}, {y}, {m})"
                )));
            }
        }
        Ok(Self {
            d,
            dprime,
            measure: LevyMeasure2::FiniteGrid { atoms },
        })
    }

    /// Size-biased exponent of `m`; its drifts are d = d' = β.
    pub fn size_biased(m: BranchingMechanism) -> Self {
        Self {
            d: m.beta,
            dprime: m.beta,
            measure: LevyMeasure2::SizeBiased { mechanism: m },
        }
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn dprime(&self) -> f64 {
        self.dprime
    }

    pub fn measure(&self) -> &LevyMeasure2 {
        &self.measure
    }

    pub fn phi2(&self, p: f64, q: f64) -> f64 {
        match &self.measure {
            LevyMeasure2::FiniteGrid { atoms } => {
                let jumps: f64 = atoms
                    .iter()
                    .map(|&(x, y, m)| m * one_minus_exp(p * x + q * y))
                    .sum();
                self.d * p + self.dprime * q + jumps
            }
            LevyMeasure2::SizeBiased { mechanism } => {
                let scale = p.max(q).max(1.0);
                if (p - q).abs() < DIAGONAL_SWITCH * scale {
                    let mid = 0.5 * (p + q);
                    mechanism.psi_prime(mid) - mechanism.alpha
                } else {
                    (mechanism.psi_star(p) - mechanism.psi_star(q)) / (p - q)
                }
            }
        }
    }

    /// (U, V) continuity: d·d' ≠ 0 or R has infinite mass.
    pub fn is_uv_continuous(&self) -> bool {
        let infinite_mass = match &self.measure {
            LevyMeasure2::FiniteGrid { .. } => false,
            LevyMeasure2::SizeBiased { mechanism } => mechanism.has_infinite_levy_mass(),
        };
        self.d * self.dprime != 0.0 || infinite_mass
    }
}

/// Free function form of [`BivariateExponent::phi2`].
pub fn eval_phi2(b: &BivariateExponent, p: f64, q: f64) -> f64 {
    b.phi2(p, q)
}

/// Laplace exponent φ of the total immigration subordinator.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ImmigrationMechanism {
    /// φ(λ) = Φ(λ, λ).
    Diagonal { exponent: BivariateExponent },
    /// φ(λ) = κλ + Σ mass_i (1 - e^{-λ r_i}).
    Standalone { kappa: f64, atoms: Vec<(f64, f64)> },
}

impl ImmigrationMechanism {
    pub fn from_exponent(b: BivariateExponent) -> Self {
        ImmigrationMechanism::Diagonal { exponent: b }
    }

    pub fn standalone(kappa: f64, atoms: Vec<(f64, f64)>) -> Result<Self> {
        check_nonneg("kappa", kappa)?;
        for &(r, m) in &atoms {
            if !(r.is_finite() && r > 0.0 && m.is_finite() && m > 0.0) {
                return Err(Error::param(format!(
                    "immigration atoms need r > 0 and mass > 0, got ({r}, {m})"
                )));
            }
        }
        Ok(ImmigrationMechanism::Standalone { kappa, atoms })
    }

    /// φ(λ) = mλ.
    pub fn linear(m: f64) -> Result<Self> {
        Self::standalone(m, Vec::new())
    }

    pub fn none() -> Self {
        ImmigrationMechanism::Standalone {
            kappa: 0.0,
            atoms: Vec::new(),
        }
    }

    pub fn phi(&self, lambda: f64) -> f64 {
        match self {
            ImmigrationMechanism::Diagonal { exponent } => exponent.phi2(lambda, lambda),
            ImmigrationMechanism::Standalone { kappa, atoms } => {
                kappa * lambda
                    + atoms
                        .iter()
                        .map(|&(r, m)| m * one_minus_exp(lambda * r))
                        .sum::<f64>()
            }
        }
    }

    /// Slope m when φ(λ) = mλ exactly.
    pub fn linear_rate(&self) -> Option<f64> {
        match self {
            ImmigrationMechanism::Standalone { kappa, atoms } if atoms.is_empty() => Some(*kappa),
            ImmigrationMechanism::Diagonal { exponent } => match exponent.measure() {
                LevyMeasure2::FiniteGrid { atoms } if atoms.is_empty() => {
                    Some(exponent.d() + exponent.dprime())
                }
                LevyMeasure2::SizeBiased { mechanism }
                    if matches!(mechanism.jumps(), Jumps::None) =>
                {
                    Some(2.0 * mechanism.beta())
                }
                _ => None,
            },
            _ => None,
        }
    }

    /// φ'(0+), the mean immigration rate (may be infinite).
    pub fn mean_rate(&self) -> f64 {
        match self {
            ImmigrationMechanism::Standalone { kappa, atoms } => {
                kappa + atoms.iter().map(|&(r, m)| r * m).sum::<f64>()
            }
            ImmigrationMechanism::Diagonal { exponent } => match exponent.measure() {
                LevyMeasure2::FiniteGrid { atoms } => {
                    exponent.d()
                        + exponent.dprime()
                        + atoms.iter().map(|&(x, y, m)| (x + y) * m).sum::<f64>()
                }
                LevyMeasure2::SizeBiased { mechanism } => {
                    // φ'(0) = ψ''(0) is infinite for stable jumps.
                    match mechanism.jumps() {
                        Jumps::None => 2.0 * mechanism.beta(),
                        Jumps::Stable { .. } => f64::INFINITY,
                        Jumps::FiniteList { atoms } => {
                            2.0 * mechanism.beta()
                                + atoms.iter().map(|&(r, m)| m * r * r).sum::<f64>()
                        }
                    }
                }
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub subcritical: bool,
    pub conservative: bool,
    pub grey: bool,
    pub uv_continuous: bool,
}

/// Decides the analytic conditions for the admitted families.
///
/// Conservativity holds for every admitted mechanism: ψ(0) = 0 and
/// ψ(u) ≤ C u near 0, so ∫_{0+} du/ψ(u) diverges.
pub fn check_conditions(m: &BranchingMechanism, b: &BivariateExponent) -> ConditionReport {
    ConditionReport {
        subcritical: m.alpha >= 0.0,
        conservative: m.psi(0.0) == 0.0 && b.phi2(0.0, 0.0) == 0.0,
        grey: m.is_grey(),
        uv_continuous: b.is_uv_continuous(),
    }
}

// ---------------------------------------------------------------------------
// Literal grammar
// ---------------------------------------------------------------------------

/// Splits `family:key=value,key=value` into the family and its pairs.
pub(crate) fn split_literal(input: &str) -> Result<(&str, Vec<(&str, &str)>)> {
    let input = input.trim();
    let (family, rest) = match input.split_once(':') {
        Some((f, r)) => (f.trim(), r.trim()),
        None => (input, ""),
    };
    if family.is_empty() {
        return Err(Error::literal(input, "missing family name"));
    }
    let mut pairs = Vec::new();
    if !rest.is_empty() {
        for item in rest.split(',') {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::literal(input, format!("expected key=value, got `{item}`")))?;
            pairs.push((k.trim(), v.trim()));
        }
    }
    Ok((family, pairs))
}

pub(crate) struct Pairs<'a> {
    input: &'a str,
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Pairs<'a> {
    pub(crate) fn new(input: &'a str, pairs: Vec<(&'a str, &'a str)>) -> Self {
        Self { input, pairs }
    }

    pub(crate) fn take(&mut self, key: &str) -> Option<&'a str> {
        let pos = self.pairs.iter().position(|(k, _)| *k == key)?;
        Some(self.pairs.remove(pos).1)
    }

    pub(crate) fn float(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::literal(self.input, format!("`{key}` is not a number: `{v}`"))),
        }
    }

    pub(crate) fn required(&mut self, key: &str) -> Result<f64> {
        self.float(key)?
            .ok_or_else(|| Error::literal(self.input, format!("missing `{key}`")))
    }

    pub(crate) fn finish(self) -> Result<()> {
        match self.pairs.first() {
            None => Ok(()),
            Some((k, _)) => Err(Error::literal(self.input, format!("unknown key `{k}`"))),
        }
    }
}

/// Parses `r1:m1;r2:m2;...` (or `x:y:m;...` with `arity = 3`).
pub(crate) fn parse_tuples(input: &str, list: &str, arity: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for item in list.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let fields: Vec<f64> = item
            .split(':')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::literal(input, format!("bad tuple `{item}`")))?;
        if fields.len() != arity {
            return Err(Error::literal(
                input,
                format!("tuple `{item}` needs {arity} fields"),
            ));
        }
        out.push(fields);
    }
    Ok(out)
}

impl FromStr for BranchingMechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (family, pairs) = split_literal(s)?;
        let mut p = Pairs::new(s, pairs);
        let alpha = p.float("alpha")?.unwrap_or(0.0);
        let mech = match family {
            "quadratic" => {
                let beta = p.required("beta")?;
                BranchingMechanism::quadratic(alpha, beta)?
            }
            "stable" => {
                let c = p.required("c")?;
                let gamma = p.required("gamma")?;
                BranchingMechanism::stable(c, gamma, alpha)?
            }
            "finitejump" => {
                let beta = p.float("beta")?.unwrap_or(0.0);
                let list = p
                    .take("pairs")
                    .ok_or_else(|| Error::literal(s, "missing `pairs`"))?;
                let atoms = parse_tuples(s, list, 2)?
                    .into_iter()
                    .map(|v| (v[0], v[1]))
                    .collect();
                BranchingMechanism::finite_jumps(alpha, beta, atoms)?
            }
            other => return Err(Error::literal(s, format!("unknown mechanism family `{other}`"))),
        };
        p.finish()?;
        Ok(mech)
    }
}

impl fmt::Display for BranchingMechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.jumps {
            Jumps::None => write!(f, "quadratic:beta={},alpha={}", self.beta, self.alpha),
            Jumps::Stable { c, gamma } if self.beta == 0.0 => {
                write!(f, "stable:c={c},gamma={gamma},alpha={}", self.alpha)
            }
            Jumps::Stable { c, gamma } => write!(
                f,
                "stable:c={c},gamma={gamma},alpha={},beta={}",
                self.alpha, self.beta
            ),
            Jumps::FiniteList { atoms } => {
                let list: Vec<String> = atoms.iter().map(|(r, m)| format!("{r}:{m}")).collect();
                write!(
                    f,
                    "finitejump:alpha={},beta={},pairs={}",
                    self.alpha,
                    self.beta,
                    list.join(";")
                )
            }
        }
    }
}

/// Parses a bivariate exponent literal. `sizebiased` needs the branching
/// mechanism it is built from.
pub fn parse_bivariate(s: &str, psi: Option<&BranchingMechanism>) -> Result<BivariateExponent> {
    let (family, pairs) = split_literal(s)?;
    let mut p = Pairs::new(s, pairs);
    let b = match family {
        "sizebiased" => {
            let psi = psi.ok_or_else(|| {
                Error::literal(s, "`sizebiased` requires a branching mechanism")
            })?;
            BivariateExponent::size_biased(psi.clone())
        }
        "grid" => {
            let d = p.float("d")?.unwrap_or(0.0);
            let dprime = p.float("dprime")?.unwrap_or(0.0);
            let atoms = match p.take("atoms") {
                Some(list) => parse_tuples(s, list, 3)?
                    .into_iter()
                    .map(|v| (v[0], v[1], v[2]))
                    .collect(),
                None => Vec::new(),
            };
            BivariateExponent::grid(d, dprime, atoms)?
        }
        other => {
            return Err(Error::literal(
                s,
                format!("unknown bivariate exponent family `{other}`"),
            ))
        }
    };
    p.finish()?;
    Ok(b)
}

/// Parses an immigration literal: any bivariate literal (read on the
/// diagonal), `linear:m=<f>`, or `drift:kappa=<f>[,pairs=r:m;...]`.
pub fn parse_immigration(
    s: &str,
    psi: Option<&BranchingMechanism>,
) -> Result<ImmigrationMechanism> {
    let (family, pairs) = split_literal(s)?;
    match family {
        "linear" => {
            let mut p = Pairs::new(s, pairs);
            let m = p.required("m")?;
            p.finish()?;
            ImmigrationMechanism::linear(m)
        }
        "drift" => {
            let mut p = Pairs::new(s, pairs);
            let kappa = p.float("kappa")?.unwrap_or(0.0);
            let atoms = match p.take("pairs") {
                Some(list) => parse_tuples(s, list, 2)?
                    .into_iter()
                    .map(|v| (v[0], v[1]))
                    .collect(),
                None => Vec::new(),
            };
            p.finish()?;
            ImmigrationMechanism::standalone(kappa, atoms)
        }
        "none" => Ok(ImmigrationMechanism::none()),
        _ => parse_bivariate(s, psi).map(ImmigrationMechanism::from_exponent),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn psi_examples() {
        let q = BranchingMechanism::quadratic(0.0, 1.0).unwrap();
        assert_eq!(q.psi(2.0), 4.0);
        let s = BranchingMechanism::stable(1.0, 1.5, 0.0).unwrap();
        assert!(close(s.psi(4.0), 8.0, 1e-15));
        let f = BranchingMechanism::finite_jumps(1.0, 0.0, vec![(1.0, 1.0)]).unwrap();
        assert!(close(f.psi(1.0), 1.0 + (-1.0f64).exp(), 1e-15));
    }

    #[test]
    fn phi_examples() {
        let q = BranchingMechanism::quadratic(0.0, 1.0).unwrap();
        let sb = BivariateExponent::size_biased(q);
        assert!(close(sb.phi2(3.0, 3.0), 6.0, 1e-15));
        assert!(close(sb.phi2(1.0, 3.0), 4.0, 1e-15));
        let grid = BivariateExponent::grid(1.0, 2.0, vec![]).unwrap();
        assert_eq!(grid.phi2(1.0, 1.0), 3.0);
        assert_eq!(grid.phi2(0.0, 0.0), 0.0);
    }

    #[test]
    fn size_biased_drift_part_is_excluded() {
        // ψ*(λ) removes αλ, so Φ does not see the drift.
        let q = BranchingMechanism::quadratic(5.0, 1.0).unwrap();
        let sb = BivariateExponent::size_biased(q);
        assert!(close(sb.phi2(3.0, 3.0), 6.0, 1e-15));
        assert!(close(sb.phi2(1.0, 3.0), 4.0, 1e-15));
    }

    #[test]
    fn condition_examples() {
        let q = BranchingMechanism::quadratic(0.0, 1.0).unwrap();
        let r = check_conditions(&q, &BivariateExponent::size_biased(q.clone()));
        assert!(r.subcritical && r.conservative && r.grey && r.uv_continuous);

        let f = BranchingMechanism::finite_jumps(1.0, 0.0, vec![(1.0, 1.0)]).unwrap();
        let g = BivariateExponent::grid(0.0, 0.0, vec![(1.0, 1.0, 1.0)]).unwrap();
        let r = check_conditions(&f, &g);
        assert!(!r.grey);
        assert!(!r.uv_continuous);
        assert!(r.conservative);

        let s = BranchingMechanism::stable(1.0, 1.5, 0.0).unwrap();
        let r = check_conditions(&s, &BivariateExponent::size_biased(s.clone()));
        assert!(r.grey && r.uv_continuous);
    }

    #[test]
    fn stable_two_folds_into_beta() {
        let s = BranchingMechanism::stable(1.0, 2.0, 0.0).unwrap();
        assert_eq!(s, BranchingMechanism::quadratic(0.0, 1.0).unwrap());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(BranchingMechanism::quadratic(-1.0, 1.0).is_err());
        assert!(BranchingMechanism::stable(1.0, 0.9, 0.0).is_err());
        assert!(BranchingMechanism::stable(0.0, 1.5, 0.0).is_err());
        assert!(BranchingMechanism::finite_jumps(0.0, 0.0, vec![(0.0, 1.0)]).is_err());
        assert!(BivariateExponent::grid(-1.0, 0.0, vec![]).is_err());
    }

    #[test]
    fn literal_round_trip() {
        for lit in [
            "quadratic:beta=1",
            "quadratic:beta=0.5,alpha=2",
            "stable:c=1,gamma=1.5",
            "stable:c=2,gamma=1.2,alpha=0.1",
            "finitejump:alpha=1,pairs=1:1;2:0.5",
        ] {
            let m: BranchingMechanism = lit.parse().unwrap();
            let again: BranchingMechanism = m.to_string().parse().unwrap();
            assert_eq!(m, again, "{lit}");
        }
        assert!("quadratic:beta=1,bogus=2".parse::<BranchingMechanism>().is_err());
        assert!("cubic:beta=1".parse::<BranchingMechanism>().is_err());
        assert!("quadratic".parse::<BranchingMechanism>().is_err());
    }

    #[test]
    fn bivariate_and_immigration_literals() {
        let q: BranchingMechanism = "quadratic:beta=1".parse().unwrap();
        let b = parse_bivariate("grid:d=1,dprime=2,atoms=1:0:0.5;0:2:1", None).unwrap();
        assert!(close(
            b.phi2(1.0, 1.0),
            3.0 + 0.5 * one_minus_exp(1.0) + one_minus_exp(2.0),
            1e-15
        ));
        assert!(parse_bivariate("sizebiased", None).is_err());
        let phi = parse_immigration("sizebiased", Some(&q)).unwrap();
        assert!(close(phi.phi(2.0), 4.0, 1e-15));
        assert_eq!(phi.linear_rate(), Some(2.0));
        let lin = parse_immigration("linear:m=3", None).unwrap();
        assert_eq!(lin.phi(2.0), 6.0);
        assert_eq!(parse_immigration("none", None).unwrap().phi(5.0), 0.0);
    }

    #[test]
    fn series_branch_matches_direct_formula() {
        for &x in &[1e-3, 5e-3, 9.9e-3, 1.01e-2, 0.5, 3.0] {
            // The direct form loses ~1e-16 absolute to cancellation.
            let direct = (-x as f64).exp() - 1.0 + x;
            assert!((exp_m1_plus(x) - direct).abs() <= 1e-15 + 1e-12 * direct, "{x}");
        }
    }
}
