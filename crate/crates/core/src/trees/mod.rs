//! Ordered rooted trees in DFS child-count form, sin-trees, samplers and
//! lattice-path codings.
//!
//! A finite tree is stored as the sequence of child counts of its vertices
//! listed in lexicographic (depth-first) order. That sequence is the
//! Lukasiewicz increment sequence shifted by one, so all codings are linear
//! scans. Ulam-Harris labels (`&[u32]`, 1-based child ranks) are derived views.

mod coding;
mod format;
mod laws;
mod sample;
mod sin;

pub use coding::{
    contour_from_height, height_from_walk, kids_from_walk, proximity_bounds, proximity_violations,
    Contour,
    HeightStack, ProximityCheck,
};
pub use format::{
    parse_any, parse_luk, parse_paren, parse_paren_body, parse_sin, to_luk, to_paren,
    to_paren_body, to_sin, Encoded,
};
pub use laws::{gf_iterate, DispatchingLaw, Ladder, OffspringLaw};
pub use sample::{sample_gw, sample_gw_with, sample_gwi, sample_gwi_with, sample_left_height};
pub use sin::{spinal_decomposition, SinTree, SpinalDecomposition, SpineRecord};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderedTree {
    kids: Vec<u32>,
}

/// Checks that `kids` is the DFS child-count sequence of exactly one tree.
fn check_single_tree(kids: &[u32]) -> Result<()> {
    if kids.is_empty() {
        return Err(Error::InvalidTree("empty child-count sequence".into()));
    }
    let mut walk: i64 = 0;
    for (n, &k) in kids.iter().enumerate() {
        walk += i64::from(k) - 1;
        if walk < 0 && n + 1 != kids.len() {
            return Err(Error::InvalidTree(format!(
                "Lukasiewicz walk hits -1 at vertex {n} before the end ({} vertices)",
                kids.len()
            )));
        }
    }
    if walk != -1 {
        return Err(Error::InvalidTree(format!(
            "Lukasiewicz walk ends at {walk}, expected -1"
        )));
    }
    Ok(())
}

impl OrderedTree {
    pub fn from_kids(kids: Vec<u32>) -> Result<Self> {
        check_single_tree(&kids)?;
        Ok(Self { kids })
    }

    pub(crate) fn from_kids_unchecked(kids: Vec<u32>) -> Self {
        debug_assert!(check_single_tree(&kids).is_ok());
        Self { kids }
    }

    /// The single-vertex tree.
    pub fn leaf() -> Self {
        Self { kids: vec![0] }
    }

    /// A chain of `n` vertices.
    pub fn chain(n: usize) -> Self {
        assert!(n >= 1);
        let mut kids = vec![1; n];
        kids[n - 1] = 0;
        Self { kids }
    }

    /// Rebuilds a tree from its Lukasiewicz path.
    pub fn from_lukasiewicz(walk: &[i64]) -> Result<Self> {
        Self::from_kids(kids_from_walk(walk)?)
    }

    pub fn kids(&self) -> &[u32] {
        &self.kids
    }

    pub fn into_kids(self) -> Vec<u32> {
        self.kids
    }

    /// Number of vertices #t.
    pub fn size(&self) -> usize {
        self.kids.len()
    }

    pub fn lukasiewicz(&self) -> Vec<i64> {
        walk_of(&self.kids)
    }

    /// H_n = |u_n| for the vertices in lexicographic order.
    pub fn height_process(&self) -> Vec<u32> {
        let mut stack = HeightStack::new();
        let mut walk = 0i64;
        self.kids
            .iter()
            .map(|&k| {
                let h = stack.push(walk);
                walk += i64::from(k) - 1;
                h
            })
            .collect()
    }

    /// Maximal generation.
    pub fn height(&self) -> u32 {
        self.height_process().into_iter().max().unwrap_or(0)
    }

    /// Closed contour on the integer times 0..=2(#t-1).
    pub fn contour(&self) -> Contour {
        contour_from_height(&self.height_process()).closed()
    }

    /// One past the last DFS index of the subtree rooted at `i`.
    pub fn subtree_end(&self, i: usize) -> usize {
        let mut need: i64 = 1;
        let mut j = i;
        while need > 0 {
            need += i64::from(self.kids[j]) - 1;
            j += 1;
        }
        j
    }

    /// Subtree sizes #θ_u(t) for every vertex.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.kids.len()];
        let mut stack: Vec<usize> = Vec::new();
        for i in (0..self.kids.len()).rev() {
            let mut s = 1;
            for _ in 0..self.kids[i] {
                s += stack.pop().expect("valid tree");
            }
            sizes[i] = s;
            stack.push(s);
        }
        sizes
    }

    /// DFS indices of the children of vertex `i`, in birth order.
    pub fn children(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.kids[i] as usize);
        let mut c = i + 1;
        for _ in 0..self.kids[i] {
            out.push(c);
            c = self.subtree_end(c);
        }
        out
    }

    /// DFS index of the vertex with Ulam-Harris label `label`.
    pub fn index_of(&self, label: &[u32]) -> Result<usize> {
        let mut idx = 0;
        for &c in label {
            if c == 0 || c > self.kids[idx] {
                return Err(Error::VertexNotInTree(label.to_vec()));
            }
            let mut child = idx + 1;
            for _ in 1..c {
                child = self.subtree_end(child);
            }
            idx = child;
        }
        Ok(idx)
    }

    /// Ulam-Harris label of DFS vertex `idx`.
    pub fn label_of(&self, idx: usize) -> Result<Vec<u32>> {
        if idx >= self.kids.len() {
            return Err(Error::InvalidParameter(format!(
                "vertex index {idx} out of range for a tree of size {}",
                self.kids.len()
            )));
        }
        // Stack of (vertex, rank of the next child to visit).
        let mut path: Vec<(usize, u32)> = Vec::new();
        let mut i = 0;
        loop {
            if i == idx {
                return Ok(path.iter().map(|&(_, r)| r).collect());
            }
            if self.kids[i] > 0 {
                path.push((i, 1));
                i += 1;
                continue;
            }
            // Leaf: climb until a vertex with a younger sibling remains.
            i += 1;
            while let Some(&(parent, rank)) = path.last() {
                if rank < self.kids[parent] {
                    path.last_mut().expect("non-empty").1 += 1;
                    break;
                }
                path.pop();
            }
        }
    }

    /// [t]_u: removes the strict descendants of `u`.
    pub fn cut(&self, label: &[u32]) -> Result<OrderedTree> {
        let idx = self.index_of(label)?;
        let end = self.subtree_end(idx);
        let mut kids = Vec::with_capacity(self.kids.len() - (end - idx) + 1);
        kids.extend_from_slice(&self.kids[..idx]);
        kids.push(0);
        kids.extend_from_slice(&self.kids[end..]);
        Ok(Self::from_kids_unchecked(kids))
    }

    /// θ_u(t): the subtree rooted at `u`.
    pub fn shift(&self, label: &[u32]) -> Result<OrderedTree> {
        let idx = self.index_of(label)?;
        let end = self.subtree_end(idx);
        Ok(Self::from_kids_unchecked(self.kids[idx..end].to_vec()))
    }

    /// [t]_n = {u ∈ t : |u| ≤ n}.
    pub fn truncate(&self, n: u32) -> OrderedTree {
        let kids = self
            .height_process()
            .into_iter()
            .zip(&self.kids)
            .filter(|(h, _)| *h <= n)
            .map(|(h, &k)| if h == n { 0 } else { k })
            .collect();
        Self::from_kids_unchecked(kids)
    }

    /// Z_n = #{u ∈ t : |u| = n} for n = 0..=height.
    pub fn generation_sizes(&self) -> Vec<usize> {
        let mut z = Vec::new();
        for h in self.height_process() {
            let h = h as usize;
            if z.len() <= h {
                z.resize(h + 1, 0);
            }
            z[h] += 1;
        }
        z
    }

    /// The mirror image t•: children reversed at every vertex.
    pub fn mirror(&self) -> OrderedTree {
        let sizes = self.subtree_sizes();
        let mut out = Vec::with_capacity(self.kids.len());
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            out.push(self.kids[v]);
            let mut c = v + 1;
            for _ in 0..self.kids[v] {
                stack.push(c);
                c += sizes[c];
            }
        }
        Self::from_kids_unchecked(out)
    }
}

fn walk_of(kids: &[u32]) -> Vec<i64> {
    let mut d = Vec::with_capacity(kids.len() + 1);
    let mut w = 0i64;
    d.push(w);
    for &k in kids {
        w += i64::from(k) - 1;
        d.push(w);
    }
    d
}

/// A finite sequence of finite trees.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Forest {
    trees: Vec<OrderedTree>,
}

impl Forest {
    pub fn new(trees: Vec<OrderedTree>) -> Self {
        Self { trees }
    }

    pub fn trees(&self) -> &[OrderedTree] {
        &self.trees
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Total number of vertices (the fictive root excluded).
    pub fn size(&self) -> usize {
        self.trees.iter().map(OrderedTree::size).sum()
    }

    pub fn kids(&self) -> Vec<u32> {
        self.trees.iter().flat_map(|t| t.kids.iter().copied()).collect()
    }

    /// D(f); each completed tree lowers the walk by one.
    pub fn lukasiewicz(&self) -> Vec<i64> {
        walk_of(&self.kids())
    }

    /// Concatenated height processes.
    pub fn height_process(&self) -> Vec<u32> {
        self.trees
            .iter()
            .flat_map(|t| t.height_process())
            .collect()
    }

    /// Splits a forest Lukasiewicz path into trees.
    pub fn from_lukasiewicz(walk: &[i64]) -> Result<Self> {
        let kids = kids_from_walk(walk)?;
        let mut trees = Vec::new();
        let mut start = 0;
        let mut need: i64 = 0;
        for (i, &k) in kids.iter().enumerate() {
            if need == 0 {
                start = i;
                need = 1;
            }
            need += i64::from(k) - 1;
            if need == 0 {
                trees.push(OrderedTree::from_kids_unchecked(kids[start..=i].to_vec()));
            }
        }
        if need != 0 {
            return Err(Error::InvalidTree("forest path ends inside a tree".into()));
        }
        Ok(Self { trees })
    }
}
