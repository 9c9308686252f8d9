//! GW and GWI samplers.

use rand::Rng;

use super::{DispatchingLaw, OffspringLaw, OrderedTree, SinTree, SpineRecord};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// A GW(μ) tree drawn depth-first; errors once it exceeds `size_cap`
/// vertices.
pub fn sample_gw(mu: &OffspringLaw, seed: u64, size_cap: usize) -> Result<OrderedTree> {
    sample_gw_with(mu, &mut rng_from_seed(seed), size_cap)
}

pub fn sample_gw_with<R: Rng + ?Sized>(
    mu: &OffspringLaw,
    rng: &mut R,
    size_cap: usize,
) -> Result<OrderedTree> {
    if size_cap == 0 {
        return Err(Error::param("size_cap must be at least 1"));
    }
    let mut budget = size_cap;
    grow(mu, rng, &mut budget, size_cap)
}

/// Draws one tree while charging its vertices to a shared budget.
fn grow<R: Rng + ?Sized>(
    mu: &OffspringLaw,
    rng: &mut R,
    budget: &mut usize,
    cap: usize,
) -> Result<OrderedTree> {
    let mut kids = Vec::new();
    let mut need: u64 = 1;
    while need > 0 {
        if *budget == 0 {
            // At least one vertex beyond the cap is still owed.
            return Err(Error::SizeCapExceeded {
                partial_size: cap + 1,
                cap,
            });
        }
        *budget -= 1;
        let k = mu.sample(rng);
        let k = u32::try_from(k).map_err(|_| Error::param("offspring count overflows u32"))?;
        kids.push(k);
        need = need - 1 + u64::from(k);
    }
    Ok(OrderedTree::from_kids_unchecked(kids))
}

/// A GWI(μ, r) sin-tree truncated at spine depth `depth`; the total number
/// of bush vertices is capped by `size_cap`.
pub fn sample_gwi(
    mu: &OffspringLaw,
    r: &DispatchingLaw,
    depth: usize,
    seed: u64,
    size_cap: usize,
) -> Result<SinTree> {
    sample_gwi_with(mu, r, depth, &mut rng_from_seed(seed), size_cap)
}

pub fn sample_gwi_with<R: Rng + ?Sized>(
    mu: &OffspringLaw,
    r: &DispatchingLaw,
    depth: usize,
    rng: &mut R,
    size_cap: usize,
) -> Result<SinTree> {
    if depth == 0 {
        return Err(Error::param("spine depth must be at least 1"));
    }
    let mut budget = size_cap;
    let mut spine = Vec::with_capacity(depth);
    for _ in 0..depth {
        let (k, j) = r.sample(rng);
        let mut bushes = Vec::with_capacity(k as usize - 1);
        for _ in 0..k - 1 {
            bushes.push(grow(mu, rng, &mut budget, size_cap)?);
        }
        let right = bushes.split_off(j as usize - 1);
        spine.push(SpineRecord {
            k,
            j,
            left: bushes,
            right,
        });
    }
    Ok(SinTree::new(spine))
}

/// ←H_0..←H_{n-1} of a GWI(μ, r) sin-tree, generated lazily: spine marks are
/// drawn on demand and each left bush is explored depth-first only as far as
/// the prefix needs. Right bushes are never drawn.
pub fn sample_left_height<R: Rng + ?Sized>(
    mu: &OffspringLaw,
    r: &DispatchingLaw,
    n: usize,
    rng: &mut R,
) -> Vec<u32> {
    let mut out = Vec::with_capacity(n);
    let mut level: u32 = 0;
    // Unvisited younger siblings of each open ancestor inside the current bush.
    let mut pending: Vec<u64> = Vec::new();
    'spine: while out.len() < n {
        out.push(level);
        let (_, j) = r.sample(rng);
        for _ in 1..j {
            let base = level + 1;
            pending.clear();
            loop {
                if out.len() == n {
                    break 'spine;
                }
                out.push(base + pending.len() as u32);
                let k = mu.sample(rng);
                if k > 0 {
                    pending.push(k - 1);
                    continue;
                }
                while pending.last() == Some(&0) {
                    pending.pop();
                }
                match pending.last_mut() {
                    Some(top) => *top -= 1,
                    None => break,
                }
            }
        }
        level += 1;
    }
    out
}
