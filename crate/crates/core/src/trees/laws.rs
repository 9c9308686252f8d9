//! Offspring laws μ and dispatching laws r(k, j).

use std::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::{Gamma, Poisson};

use crate::error::{Error, Result};
use crate::mechanisms::{parse_tuples, split_literal, Pairs};

const MASS_TOL: f64 = 1e-12;
/// Mass left out when an infinite support is enumerated.
const TAIL_CUTOFF: f64 = 1e-17;
const MAX_ENUMERATED: u32 = 100_000;

#[derive(Debug, Clone)]
enum Family {
    Finite {
        masses: Vec<f64>,
        index: WeightedIndex<f64>,
        /// k·p_k weights, absent when μ̄ = 0.
        biased: Option<WeightedIndex<f64>>,
    },
    Geometric(f64),
    Poisson(f64),
}

#[derive(Debug, Clone)]
pub struct OffspringLaw {
    family: Family,
    mean: f64,
    variance: f64,
}

impl PartialEq for OffspringLaw {
    fn eq(&self, other: &Self) -> bool {
        match (&self.family, &other.family) {
            (Family::Finite { masses: a, .. }, Family::Finite { masses: b, .. }) => a == b,
            (Family::Geometric(a), Family::Geometric(b)) => a == b,
            (Family::Poisson(a), Family::Poisson(b)) => a == b,
            _ => false,
        }
    }
}

fn poisson_draw<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

fn negbin_draw<R: Rng + ?Sized>(n: u64, q: f64, rng: &mut R) -> u64 {
    if n == 0 || q >= 1.0 {
        return 0;
    }
    let rate = Gamma::new(n as f64, (1.0 - q) / q)
        .expect("positive shape and scale")
        .sample(rng);
    poisson_draw(rate, rng)
}

impl OffspringLaw {
    /// Law with masses p_0, p_1, ..., p_K.
    pub fn finite(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() || masses.iter().any(|&p| !(p.is_finite() && p >= 0.0)) {
            return Err(Error::param("pmf masses must be finite and nonnegative"));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::param(format!("pmf masses sum to {total}, not 1")));
        }
        let mean: f64 = masses.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        let second: f64 = masses
            .iter()
            .enumerate()
            .map(|(k, p)| (k * k) as f64 * p)
            .sum();
        let index = WeightedIndex::new(&masses).map_err(|e| Error::param(e.to_string()))?;
        let biased = if mean > 0.0 {
            let w: Vec<f64> = masses.iter().enumerate().map(|(k, p)| k as f64 * p).collect();
            Some(WeightedIndex::new(&w).map_err(|e| Error::param(e.to_string()))?)
        } else {
            None
        };
        Ok(Self {
            family: Family::Finite {
                masses,
                index,
                biased,
            },
            mean,
            variance: second - mean * mean,
        })
    }

    /// δ_k.
    pub fn dirac(k: usize) -> Self {
        let mut masses = vec![0.0; k + 1];
        masses[k] = 1.0;
        Self::finite(masses).expect("valid point mass")
    }

    /// pmf q(1-q)^k on k ≥ 0.
    pub fn geometric(q: f64) -> Result<Self> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::param(format!("geometric parameter must be in (0,1], got {q}")));
        }
        Ok(Self {
            family: Family::Geometric(q),
            mean: (1.0 - q) / q,
            variance: (1.0 - q) / (q * q),
        })
    }

    pub fn poisson(m: f64) -> Result<Self> {
        if !(m.is_finite() && m >= 0.0) {
            return Err(Error::param(format!("Poisson mean must be finite and >= 0, got {m}")));
        }
        Ok(Self {
            family: Family::Poisson(m),
            mean: m,
            variance: m,
        })
    }

    /// μ̄.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn is_subcritical(&self) -> bool {
        self.mean <= 1.0 + 1e-12
    }

    /// Largest k with positive mass, if finite.
    pub fn max_support(&self) -> Option<usize> {
        match &self.family {
            Family::Finite { masses, .. } => masses.iter().rposition(|&p| p > 0.0),
            Family::Geometric(q) if *q >= 1.0 => Some(0),
            Family::Poisson(m) if *m == 0.0 => Some(0),
            _ => None,
        }
    }

    pub fn pmf(&self, k: usize) -> f64 {
        match &self.family {
            Family::Finite { masses, .. } => masses.get(k).copied().unwrap_or(0.0),
            Family::Geometric(q) => q * (1.0 - q).powi(k as i32),
            Family::Poisson(m) => {
                if *m == 0.0 {
                    return if k == 0 { 1.0 } else { 0.0 };
                }
                let ln = k as f64 * m.ln() - m - statrs::function::gamma::ln_gamma(k as f64 + 1.0);
                ln.exp()
            }
        }
    }

    /// Generating function g(z) = Σ μ(k) z^k on [0, 1].
    pub fn gf(&self, z: f64) -> f64 {
        match &self.family {
            Family::Finite { masses, .. } => masses.iter().rev().fold(0.0, |acc, &p| acc * z + p),
            Family::Geometric(q) => q / (1.0 - (1.0 - q) * z),
            Family::Poisson(m) => (m * (z - 1.0)).exp(),
        }
    }

    /// Support points with their masses, the tail beyond 1e-17 omitted.
    pub fn atoms(&self) -> Vec<(usize, f64)> {
        if let Family::Finite { masses, .. } = &self.family {
            return masses
                .iter()
                .copied()
                .enumerate()
                .filter(|&(_, p)| p > 0.0)
                .collect();
        }
        let mut out = Vec::new();
        let mut covered = 0.0;
        for k in 0..MAX_ENUMERATED as usize {
            let p = self.pmf(k);
            if p > 0.0 {
                out.push((k, p));
            }
            covered += p;
            if 1.0 - covered < TAIL_CUTOFF && k as f64 > self.mean {
                break;
            }
        }
        out
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.family {
            Family::Finite { index, .. } => index.sample(rng) as u64,
            Family::Geometric(q) => negbin_draw(1, *q, rng),
            Family::Poisson(m) => poisson_draw(*m, rng),
        }
    }

    /// Whether sums of i.i.d. copies are drawn in O(1).
    pub fn has_compound_sampler(&self) -> bool {
        !matches!(self.family, Family::Finite { .. })
    }

    /// Sum of `n` independent copies.
    pub fn sample_sum<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> u64 {
        match &self.family {
            Family::Finite { index, .. } => (0..n).map(|_| index.sample(rng) as u64).sum(),
            Family::Geometric(q) => negbin_draw(n, *q, rng),
            Family::Poisson(m) => poisson_draw(n as f64 * m, rng),
        }
    }

    /// Size-biased mass k·μ(k)/μ̄.
    pub fn size_biased_pmf(&self, k: usize) -> f64 {
        if self.mean == 0.0 {
            return 0.0;
        }
        k as f64 * self.pmf(k) / self.mean
    }

    /// Draw from k·μ(k)/μ̄. Panics when μ̄ = 0.
    pub fn sample_size_biased<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.family {
            Family::Finite { biased, .. } => {
                biased.as_ref().expect("size-biasing needs a positive mean").sample(rng) as u64
            }
            Family::Geometric(q) => {
                assert!(*q < 1.0, "size-biasing needs a positive mean");
                1 + negbin_draw(2, *q, rng)
            }
            Family::Poisson(m) => {
                assert!(*m > 0.0, "size-biasing needs a positive mean");
                1 + poisson_draw(*m, rng)
            }
        }
    }
}

impl fmt::Display for OffspringLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Finite { masses, .. } => {
                let parts: Vec<String> = masses.iter().map(|p| p.to_string()).collect();
                write!(f, "pmf:masses={}", parts.join(";"))
            }
            Family::Geometric(q) => write!(f, "geometric:q={q}"),
            Family::Poisson(m) => write!(f, "poisson:m={m}"),
        }
    }
}

impl std::str::FromStr for OffspringLaw {
    type Err = Error;

    /// `geometric:q=<f>`, `poisson:m=<f>`, `pmf:masses=p0;p1;...`, `dirac:k=<n>`.
    fn from_str(s: &str) -> Result<Self> {
        let (family, pairs) = split_literal(s)?;
        let mut p = Pairs::new(s, pairs);
        let law = match family {
            "geometric" => Self::geometric(p.required("q")?)?,
            "poisson" => Self::poisson(p.required("m")?)?,
            "pmf" => {
                let list = p
                    .take("masses")
                    .ok_or_else(|| Error::literal(s, "missing `masses`"))?;
                let masses = parse_tuples(s, list, 1)?.into_iter().map(|v| v[0]).collect();
                Self::finite(masses)?
            }
            "dirac" => {
                let k = p.required("k")?;
                if k < 0.0 || k.fract() != 0.0 || k > 1e6 {
                    return Err(Error::literal(s, "`k` must be a small nonnegative integer"));
                }
                Self::dirac(k as usize)
            }
            other => return Err(Error::literal(s, format!("unknown offspring family `{other}`"))),
        };
        p.finish()?;
        Ok(law)
    }
}

/// g_n(z): the n-fold composition of the generating function.
pub fn gf_iterate(mu: &OffspringLaw, n: usize, z: f64) -> f64 {
    (0..n).fold(z, |acc, _| mu.gf(acc))
}

/// Rule choosing the climbing direction among k children.
#[derive(Debug, Clone, PartialEq)]
pub enum Ladder {
    Uniform,
    First,
    Last,
    /// Row k-1 holds π_k(1..=k); rows beyond the table fall back to uniform.
    Table(Vec<Vec<f64>>),
}

impl Ladder {
    fn pmf(&self, k: u32, j: u32) -> f64 {
        if j == 0 || j > k {
            return 0.0;
        }
        match self {
            Ladder::Uniform => 1.0 / f64::from(k),
            Ladder::First => f64::from(u8::from(j == 1)),
            Ladder::Last => f64::from(u8::from(j == k)),
            Ladder::Table(rows) => match rows.get(k as usize - 1) {
                Some(row) => row[j as usize - 1],
                None => 1.0 / f64::from(k),
            },
        }
    }

    fn sample<R: Rng + ?Sized>(&self, k: u32, rng: &mut R) -> u32 {
        match self {
            Ladder::First => 1,
            Ladder::Last => k,
            Ladder::Table(rows) if (k as usize) <= rows.len() => {
                let w = WeightedIndex::new(&rows[k as usize - 1]).expect("validated row");
                w.sample(rng) as u32 + 1
            }
            _ => rng.random_range(1..=k),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Ladder::Table(rows) = self {
            for (i, row) in rows.iter().enumerate() {
                let k = i + 1;
                let total: f64 = row.iter().sum();
                if row.len() != k || row.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > MASS_TOL {
                    return Err(Error::param(format!(
                        "ladder row {k} must be a pmf on 1..={k}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Kind {
    /// Explicit atoms; also the expanded form of a two-type law.
    Table,
    SizeBiased(OffspringLaw),
    Ascending(OffspringLaw, Ladder),
}

/// Law of (k, j) = (children of a spine vertex, rank of the spine child).
#[derive(Debug, Clone)]
pub struct DispatchingLaw {
    kind: Kind,
    atoms: Vec<(u32, u32, f64)>,
    table: Option<WeightedIndex<f64>>,
    mean_left: f64,
    mean_right: f64,
}

impl DispatchingLaw {
    /// r given by its atoms ((k, j), mass) with 1 ≤ j ≤ k.
    pub fn table(atoms: Vec<(u32, u32, f64)>) -> Result<Self> {
        let atoms: Vec<_> = atoms.into_iter().filter(|a| a.2 != 0.0).collect();
        for &(k, j, m) in &atoms {
            if j == 0 || j > k {
                return Err(Error::param(format!("atom ({k},{j}) violates 1 <= j <= k")));
            }
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::param(format!("atom ({k},{j}) has mass {m}")));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.2).sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::param(format!("dispatching masses sum to {total}, not 1")));
        }
        let table = WeightedIndex::new(atoms.iter().map(|a| a.2))
            .map_err(|e| Error::param(e.to_string()))?;
        Ok(Self::finish(Kind::Table, atoms, Some(table)))
    }

    /// δ_(1,1): the bare spine.
    pub fn bare_spine() -> Self {
        Self::table(vec![(1, 1, 1.0)]).expect("valid")
    }

    /// r(k, j) = μ(k)/μ̄.
    pub fn size_biased(mu: OffspringLaw) -> Result<Self> {
        if mu.mean() <= 0.0 {
            return Err(Error::param("size-biasing needs a positive mean"));
        }
        let atoms = mu
            .atoms()
            .into_iter()
            .filter(|&(k, _)| k > 0)
            .flat_map(|(k, p)| {
                let m = p / mu.mean();
                (1..=k as u32).map(move |j| (k as u32, j, m))
            })
            .collect();
        Ok(Self::finish(Kind::SizeBiased(mu), atoms, None))
    }

    /// r(k, l) = (1/m) Σ_{j=l}^{k} ρ(j, k-j), m = Σ k ρ(k, ℕ); `rho` lists
    /// ((type-1 count, type-2 count), mass).
    pub fn two_type(rho: Vec<(u32, u32, f64)>) -> Result<Self> {
        let total: f64 = rho.iter().map(|a| a.2).sum();
        if rho.iter().any(|a| !(a.2 >= 0.0)) || (total - 1.0).abs() > MASS_TOL {
            return Err(Error::param(format!("rho masses must be a pmf, sum is {total}")));
        }
        let m: f64 = rho.iter().map(|&(k, _, p)| f64::from(k) * p).sum();
        if m <= 0.0 {
            return Err(Error::param("two-type law needs type-1 children with positive mean"));
        }
        let mut cells: std::collections::BTreeMap<(u32, u32), f64> = Default::default();
        for &(a, b, p) in &rho {
            // ρ(a, b) feeds r(a+b, l) for every l ≤ a.
            for l in 1..=a {
                *cells.entry((a + b, l)).or_default() += p / m;
            }
        }
        let atoms = cells.into_iter().map(|((k, l), p)| (k, l, p)).collect();
        Self::table(atoms)
    }

    /// r(k, l) = μ(k)/(1-μ(0)) π_k(l).
    pub fn ascending(mu: OffspringLaw, ladder: Ladder) -> Result<Self> {
        ladder.validate()?;
        let alive = 1.0 - mu.pmf(0);
        if alive <= 0.0 {
            return Err(Error::param("ascending particle needs μ(0) < 1"));
        }
        let atoms = mu
            .atoms()
            .into_iter()
            .filter(|&(k, _)| k > 0)
            .flat_map(|(k, p)| {
                let k = k as u32;
                let ladder = &ladder;
                (1..=k).filter_map(move |j| {
                    let m = p / alive * ladder.pmf(k, j);
                    (m > 0.0).then_some((k, j, m))
                })
            })
            .collect();
        Ok(Self::finish(Kind::Ascending(mu, ladder), atoms, None))
    }

    fn finish(kind: Kind, atoms: Vec<(u32, u32, f64)>, table: Option<WeightedIndex<f64>>) -> Self {
        let mean_left = atoms.iter().map(|&(_, j, p)| f64::from(j - 1) * p).sum();
        let mean_right = atoms.iter().map(|&(k, j, p)| f64::from(k - j) * p).sum();
        Self {
            kind,
            atoms,
            table,
            mean_left,
            mean_right,
        }
    }

    /// Atoms (k, j, r(k, j)); infinite supports are cut where the tail mass
    /// drops below 1e-17.
    pub fn atoms(&self) -> &[(u32, u32, f64)] {
        &self.atoms
    }

    pub fn pmf(&self, k: u32, j: u32) -> f64 {
        if j == 0 || j > k {
            return 0.0;
        }
        match &self.kind {
            Kind::Table => self
                .atoms
                .iter()
                .find(|a| a.0 == k && a.1 == j)
                .map_or(0.0, |a| a.2),
            Kind::SizeBiased(mu) => mu.pmf(k as usize) / mu.mean(),
            Kind::Ascending(mu, ladder) => {
                mu.pmf(k as usize) / (1.0 - mu.pmf(0)) * ladder.pmf(k, j)
            }
        }
    }

    /// ν(n) = Σ_j r(n+1, j): law of the number of spine siblings.
    pub fn immigration_pmf(&self, n: u32) -> f64 {
        (1..=n + 1).map(|j| self.pmf(n + 1, j)).sum()
    }

    /// E[j - 1], mean number of left spine siblings.
    pub fn mean_left(&self) -> f64 {
        self.mean_left
    }

    /// E[k - j], mean number of right spine siblings.
    pub fn mean_right(&self) -> f64 {
        self.mean_right
    }

    pub fn is_bare_spine(&self) -> bool {
        self.mean_left == 0.0 && self.mean_right == 0.0
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (u32, u32) {
        match &self.kind {
            Kind::Table => {
                let i = self.table.as_ref().expect("table sampler").sample(rng);
                (self.atoms[i].0, self.atoms[i].1)
            }
            Kind::SizeBiased(mu) => {
                let k = mu.sample_size_biased(rng) as u32;
                (k, rng.random_range(1..=k))
            }
            Kind::Ascending(mu, ladder) => {
                let k = loop {
                    let k = mu.sample(rng) as u32;
                    if k > 0 {
                        break k;
                    }
                };
                (k, ladder.sample(k, rng))
            }
        }
    }

    /// Parses `sizebiased`, `spine`, `table:atoms=k:j:m;...`,
    /// `twotype:rho=k:l:m;...` or `ascending[:ladder=uniform|first|last]`;
    /// μ supplies the offspring law where one is needed.
    pub fn parse(s: &str, mu: &OffspringLaw) -> Result<Self> {
        let (family, pairs) = split_literal(s)?;
        let mut p = Pairs::new(s, pairs);
        let triples = |key: &str, p: &mut Pairs| -> Result<Vec<(u32, u32, f64)>> {
            let list = p
                .take(key)
                .ok_or_else(|| Error::literal(s, format!("missing `{key}`")))?;
            parse_tuples(s, list, 3)?
                .into_iter()
                .map(|v| {
                    if v[0] < 0.0 || v[1] < 0.0 || v[0].fract() != 0.0 || v[1].fract() != 0.0 {
                        Err(Error::literal(s, "counts must be nonnegative integers"))
                    } else {
                        Ok((v[0] as u32, v[1] as u32, v[2]))
                    }
                })
                .collect()
        };
        let law = match family {
            "sizebiased" => Self::size_biased(mu.clone())?,
            "spine" => Self::bare_spine(),
            "table" => Self::table(triples("atoms", &mut p)?)?,
            "twotype" => Self::two_type(triples("rho", &mut p)?)?,
            "ascending" => {
                let ladder = match p.take("ladder").unwrap_or("uniform") {
                    "uniform" => Ladder::Uniform,
                    "first" => Ladder::First,
                    "last" => Ladder::Last,
                    other => return Err(Error::literal(s, format!("unknown ladder `{other}`"))),
                };
                Self::ascending(mu.clone(), ladder)?
            }
            other => {
                return Err(Error::literal(s, format!("unknown dispatching family `{other}`")))
            }
        };
        p.finish()?;
        Ok(law)
    }
}
