//! Sin-trees truncated at a finite spine depth, their left/right height
//! processes and the spinal decomposition.

use serde::Serialize;

use super::{Forest, OrderedTree};
use crate::error::{Error, Result};

/// Marks and bushes of the spine vertex u*_i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpineRecord {
    /// k_{u*_i}: total number of children.
    pub k: u32,
    /// Rank of u*_{i+1} among the children.
    pub j: u32,
    /// The j-1 bushes born before the spine child, in birth order.
    pub left: Vec<OrderedTree>,
    /// The k-j bushes born after the spine child, in birth order.
    pub right: Vec<OrderedTree>,
}

impl SpineRecord {
    pub fn new(k: u32, j: u32, left: Vec<OrderedTree>, right: Vec<OrderedTree>) -> Result<Self> {
        if j == 0 || j > k {
            return Err(Error::InvalidTree(format!("spine mark ({k},{j}) violates 1 <= j <= k")));
        }
        if left.len() != (j - 1) as usize || right.len() != (k - j) as usize {
            return Err(Error::InvalidTree(format!(
                "spine mark ({k},{j}) needs {} left and {} right bushes, got {} and {}",
                j - 1,
                k - j,
                left.len(),
                right.len()
            )));
        }
        Ok(Self { k, j, left, right })
    }

    /// Spine vertex with no siblings.
    pub fn bare() -> Self {
        Self {
            k: 1,
            j: 1,
            left: Vec::new(),
            right: Vec::new(),
        }
    }

    fn mirror(&self) -> Self {
        let flip = |bushes: &[OrderedTree]| bushes.iter().rev().map(OrderedTree::mirror).collect();
        Self {
            k: self.k,
            j: self.k - self.j + 1,
            left: flip(&self.right),
            right: flip(&self.left),
        }
    }
}

/// The spine u*_0, ..., u*_M and the bushes grafted on u*_0..u*_{M-1}.
///
/// The marks of u*_M are not recorded, so u*_M is the last vertex of both
/// the left and the right part.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SinTree {
    spine: Vec<SpineRecord>,
}

impl SinTree {
    pub fn new(spine: Vec<SpineRecord>) -> Self {
        Self { spine }
    }

    /// Bare spine of depth `m`.
    pub fn bare(m: usize) -> Self {
        Self {
            spine: vec![SpineRecord::bare(); m],
        }
    }

    pub fn spine(&self) -> &[SpineRecord] {
        &self.spine
    }

    /// Truncation depth M.
    pub fn depth(&self) -> usize {
        self.spine.len()
    }

    /// Number of vertices, spine vertex u*_M included.
    pub fn size(&self) -> usize {
        self.depth()
            + 1
            + self
                .spine
                .iter()
                .flat_map(|r| r.left.iter().chain(&r.right))
                .map(OrderedTree::size)
                .sum::<usize>()
    }

    pub fn mirror(&self) -> Self {
        Self {
            spine: self.spine.iter().map(SpineRecord::mirror).collect(),
        }
    }

    /// L_n = Σ_{i<n} (j_i - 1) for n = 0..=M.
    pub fn spine_sums(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.spine.len() + 1);
        let mut acc = 0u64;
        out.push(acc);
        for r in &self.spine {
            acc += u64::from(r.j - 1);
            out.push(acc);
        }
        out
    }

    /// f(t): the left bushes in lexicographic order.
    pub fn left_forest(&self) -> Forest {
        Forest::new(self.spine.iter().flat_map(|r| r.left.iter().cloned()).collect())
    }

    /// Heights of the whole truncated left part in lexicographic order:
    /// u*_0, the left bushes of u*_0, u*_1, ..., u*_M.
    pub fn left_part_heights(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for (i, r) in self.spine.iter().enumerate() {
            let i = i as u32;
            out.push(i);
            for bush in &r.left {
                out.extend(bush.height_process().into_iter().map(|h| h + i + 1));
            }
        }
        out.push(self.spine.len() as u32);
        out
    }

    /// ←H_0..←H_{n-1}.
    pub fn left_height(&self, n: usize) -> Result<Vec<u32>> {
        let mut all = self.left_part_heights();
        if n > all.len() {
            return Err(Error::TruncationTooShallow {
                needed: n,
                available: all.len(),
                spine_depth: self.depth(),
            });
        }
        all.truncate(n);
        Ok(all)
    }

    /// →H_0..→H_{n-1}, the left height of the mirror image.
    pub fn right_height(&self, n: usize) -> Result<Vec<u32>> {
        self.mirror().left_height(n)
    }

    /// Y*_n: non-spine vertices at generation n, for n = 0..=M.
    pub fn generation_sizes(&self) -> Vec<u64> {
        let m = self.depth();
        let mut y = vec![0u64; m + 1];
        for (i, r) in self.spine.iter().enumerate() {
            for bush in r.left.iter().chain(&r.right) {
                for (h, z) in bush.generation_sizes().into_iter().enumerate() {
                    let level = i + 1 + h;
                    if level > m {
                        break;
                    }
                    y[level] += z as u64;
                }
            }
        }
        y
    }

    /// (#{k : ←H_k = n}, #{k : →H_k = n}) over the full truncated left and
    /// right parts, for n = 0..=M.
    pub fn occupation_counts(&self) -> (Vec<u64>, Vec<u64>) {
        let m = self.depth();
        let count = |heights: Vec<u32>| {
            let mut occ = vec![0u64; m + 1];
            for h in heights {
                if let Some(slot) = occ.get_mut(h as usize) {
                    *slot += 1;
                }
            }
            occ
        };
        (
            count(self.left_part_heights()),
            count(self.mirror().left_part_heights()),
        )
    }
}

/// The objects (f, L, α, n(·), p(·)) of the spinal decomposition of ←H on
/// its first N steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpinalDecomposition {
    /// DFS child counts of the left-bush forest.
    pub forest_kids: Vec<u32>,
    /// H(f), with H_{#f}(f) := 0 appended.
    pub forest_height: Vec<u32>,
    pub spine_sums: Vec<u64>,
    /// α(p) for p = 0..#f.
    pub alpha: Vec<u64>,
    /// n(p) = p + α(p) for p = 0..#f; n(#f) = ∞ is left implicit.
    pub n_of_p: Vec<u64>,
    /// p(n) for n = 0..N.
    pub p_of_n: Vec<usize>,
}

impl SpinalDecomposition {
    /// ←H_n = n - p(n) + H_{p(n)}(f).
    pub fn reconstruct(&self) -> Vec<u32> {
        self.p_of_n
            .iter()
            .enumerate()
            .map(|(n, &p)| (n - p) as u32 + self.forest_height[p])
            .collect()
    }

    /// Indices n where α(p(n)-1) ≤ n - p(n) ≤ α(p(n)) fails; the lower bound
    /// is skipped at p = 0 and the upper bound at p = #f.
    pub fn sandwich_violations(&self) -> Vec<usize> {
        let nf = self.alpha.len();
        self.p_of_n
            .iter()
            .enumerate()
            .filter(|&(n, &p)| {
                let gap = (n - p) as u64;
                let low_ok = p == 0 || self.alpha[p - 1] <= gap;
                let high_ok = p == nf || gap <= self.alpha[p];
                !(low_ok && high_ok)
            })
            .map(|(n, _)| n)
            .collect()
    }
}

/// Spinal decomposition of the first `n` steps of ←H(st).
pub fn spinal_decomposition(st: &SinTree, n: usize) -> Result<SpinalDecomposition> {
    let available = st.left_part_heights().len();
    if n > available {
        return Err(Error::TruncationTooShallow {
            needed: n,
            available,
            spine_depth: st.depth(),
        });
    }
    let forest = st.left_forest();
    let walk = forest.lukasiewicz();
    let mut forest_height = forest.height_process();
    forest_height.push(0);
    let spine_sums = st.spine_sums();
    let nf = forest.size();

    let mut alpha = Vec::with_capacity(nf);
    let mut running_inf = 0i64;
    let mut k = 0usize;
    for &d in walk.iter().take(nf) {
        running_inf = running_inf.min(d);
        let target = (1 - running_inf) as u64;
        while spine_sums[k] < target {
            k += 1;
        }
        alpha.push(k as u64);
    }
    let n_of_p: Vec<u64> = alpha.iter().enumerate().map(|(p, &a)| p as u64 + a).collect();

    let mut p_of_n = Vec::with_capacity(n);
    let mut p = 0usize;
    for idx in 0..n as u64 {
        while p < nf && n_of_p[p] < idx {
            p += 1;
        }
        p_of_n.push(p);
    }
    Ok(SpinalDecomposition {
        forest_kids: forest.kids(),
        forest_height,
        spine_sums,
        alpha,
        n_of_p,
        p_of_n,
    })
}
