//! Lukasiewicz path, height process and contour process transforms.

use serde::Serialize;

use crate::error::{Error, Result};

/// Running-minima stack computing H_n = #{j < n : D_j = min_{j≤k≤n} D_k}
/// one walk value at a time.
#[derive(Debug, Clone, Default)]
pub struct HeightStack {
    minima: Vec<i64>,
    last: Option<i64>,
}

impl HeightStack {
    pub fn new() -> Self {
        Self::default()
    }

    /// Feeds D_n and returns H_n.
    pub fn push(&mut self, d: i64) -> u32 {
        if let Some(prev) = self.last {
            self.minima.push(prev);
            while self.minima.last().is_some_and(|&top| top > d) {
                self.minima.pop();
            }
        }
        self.last = Some(d);
        self.minima.len() as u32
    }
}

fn check_walk(walk: &[i64]) -> Result<()> {
    if let Some(&first) = walk.first() {
        if first != 0 {
            return Err(Error::MalformedPath {
                index: 0,
                reason: format!("path must start at 0, starts at {first}"),
            });
        }
    }
    for (i, w) in walk.windows(2).enumerate() {
        if w[1] - w[0] < -1 {
            return Err(Error::MalformedPath {
                index: i + 1,
                reason: format!("increment {} is below -1", w[1] - w[0]),
            });
        }
    }
    Ok(())
}

/// Height process H_0..H_{len-2} of a tree or forest Lukasiewicz path
/// D_0..D_{len-1}, in linear time.
pub fn height_from_walk(walk: &[i64]) -> Result<Vec<u32>> {
    check_walk(walk)?;
    let mut stack = HeightStack::new();
    Ok(walk
        .iter()
        .take(walk.len().saturating_sub(1))
        .map(|&d| stack.push(d))
        .collect())
}

/// Child counts k_n = D_{n+1} - D_n + 1.
pub fn kids_from_walk(walk: &[i64]) -> Result<Vec<u32>> {
    check_walk(walk)?;
    walk.windows(2)
        .enumerate()
        .map(|(i, w)| {
            u32::try_from(w[1] - w[0] + 1).map_err(|_| Error::MalformedPath {
                index: i + 1,
                reason: "child count overflow".into(),
            })
        })
        .collect()
}

/// Contour sampled at integer times, with the breakpoints b_n = 2n - H_n.
///
/// Between integer times the contour is linear, and q(s) = n on
/// [b_n, b_{n+1}).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Contour {
    pub breakpoints: Vec<i64>,
    pub values: Vec<i64>,
}

impl Contour {
    /// Last time covered by the breakpoints.
    pub fn horizon(&self) -> i64 {
        self.breakpoints.last().copied().unwrap_or(0)
    }

    /// q(s) = n iff s ∈ [b_n, b_{n+1}); the last index past the final breakpoint.
    pub fn q(&self, s: f64) -> usize {
        self.breakpoints
            .partition_point(|&b| (b as f64) <= s)
            .saturating_sub(1)
    }

    /// C_s by linear interpolation.
    pub fn value_at(&self, s: f64) -> f64 {
        let last = (self.values.len() - 1) as f64;
        let s = s.clamp(0.0, last);
        let i = s.floor() as usize;
        if i as f64 == s || i + 1 >= self.values.len() {
            return self.values[i] as f64;
        }
        let frac = s - i as f64;
        self.values[i] as f64 * (1.0 - frac) + self.values[i + 1] as f64 * frac
    }

    /// Appends the final descent to 0, turning the contour of a finite tree's
    /// height process into the closed contour on [0, 2(#t-1)].
    pub fn closed(mut self) -> Self {
        let mut h = *self.values.last().expect("non-empty contour");
        while h > 0 {
            h -= 1;
            self.values.push(h);
        }
        self
    }
}

/// Contour from a height sequence, defined on [0, b_{len-1}].
pub fn contour_from_height(h: &[u32]) -> Contour {
    if h.is_empty() {
        return Contour {
            breakpoints: Vec::new(),
            values: vec![0],
        };
    }
    let b: Vec<i64> = h
        .iter()
        .enumerate()
        .map(|(n, &hn)| 2 * n as i64 - i64::from(hn))
        .collect();
    let mut values = Vec::with_capacity(*b.last().unwrap() as usize + 1);
    for n in 0..h.len() - 1 {
        let (hn, hn1) = (i64::from(h[n]), i64::from(h[n + 1]));
        for s in b[n]..b[n + 1] {
            let c = if s < b[n + 1] - 1 {
                hn - s + b[n]
            } else {
                s - b[n + 1] + hn1
            };
            values.push(c);
        }
    }
    values.push(i64::from(h[h.len() - 1]));
    Contour {
        breakpoints: b,
        values,
    }
}

/// Both sides of the contour/height proximity inequalities at index m.
///
/// The "doubled" fields carry 2·sup|q(s) - s/2| so that every quantity is an
/// integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProximityCheck {
    pub m: usize,
    pub contour_gap_to_m: i64,
    pub contour_gap_to_bm: i64,
    pub contour_bound: i64,
    pub index_gap_doubled_to_m: i64,
    pub index_gap_doubled_to_bm: i64,
    pub index_bound_doubled: i64,
}

impl ProximityCheck {
    pub fn holds(&self) -> bool {
        self.contour_gap_to_m <= self.contour_gap_to_bm
            && self.contour_gap_to_bm <= self.contour_bound
            && self.index_gap_doubled_to_m <= self.index_gap_doubled_to_bm
            && self.index_gap_doubled_to_bm <= self.index_bound_doubled
    }
}

/// Evaluates sup_{s≤m} and sup_{s≤b_m} of |C_s - H_{q(s)}| and |q(s) - s/2|
/// against their bounds, for 1 ≤ m ≤ len(h) - 2.
///
/// Breakpoints are integers and both C and s/2 are linear between integers
/// while q is constant on [s-1, s), so each real supremum is attained at an
/// integer time or as a left limit there.
pub fn proximity_bounds(h: &[u32], m: usize) -> Result<ProximityCheck> {
    if m == 0 || m + 1 >= h.len() {
        return Err(Error::param(format!(
            "proximity check needs 1 <= m <= {}, got {m}",
            h.len().saturating_sub(2)
        )));
    }
    let contour = contour_from_height(h);
    let b = &contour.breakpoints;
    let hi = |n: usize| i64::from(h[n]);

    let sup_to = |end: i64| -> (i64, i64) {
        let mut gap_c = 0;
        let mut gap_q = 0;
        let mut n = 0usize;
        for s in 0..=end {
            let prev_n = n;
            while n + 1 < b.len() && b[n + 1] <= s {
                n += 1;
            }
            let c = contour.values[s as usize];
            gap_c = gap_c.max((c - hi(n)).abs());
            gap_q = gap_q.max((2 * n as i64 - s).abs());
            if s > 0 {
                gap_c = gap_c.max((c - hi(prev_n)).abs());
                gap_q = gap_q.max((2 * prev_n as i64 - s).abs());
            }
        }
        (gap_c, gap_q)
    };

    let (c_m, q_m) = sup_to(m as i64);
    let (c_bm, q_bm) = sup_to(b[m]);
    let max_step = (0..=m).map(|n| (hi(n + 1) - hi(n)).abs()).max().unwrap_or(0);
    let max_h = (0..=m).map(hi).max().unwrap_or(0);
    Ok(ProximityCheck {
        m,
        contour_gap_to_m: c_m,
        contour_gap_to_bm: c_bm,
        contour_bound: 1 + max_step,
        index_gap_doubled_to_m: q_m,
        index_gap_doubled_to_bm: q_bm,
        index_bound_doubled: max_h + 2,
    })
}

/// Number of m in 1..=len(h)-2 at which [`proximity_bounds`] fails, in one
/// pass over the contour.
pub fn proximity_violations(h: &[u32]) -> u64 {
    if h.len() < 3 {
        return 0;
    }
    let contour = contour_from_height(h);
    let b = &contour.breakpoints;
    let hi = |n: usize| i64::from(h[n]);
    let horizon = *b.last().expect("nonempty") as usize;
    let mut sup_c = vec![0i64; horizon + 1];
    let mut sup_q = vec![0i64; horizon + 1];
    let (mut gc, mut gq) = (0i64, 0i64);
    let mut n = 0usize;
    for s in 0..=horizon as i64 {
        let prev_n = n;
        while n + 1 < b.len() && b[n + 1] <= s {
            n += 1;
        }
        let c = contour.values[s as usize];
        gc = gc.max((c - hi(n)).abs());
        gq = gq.max((2 * n as i64 - s).abs());
        if s > 0 {
            gc = gc.max((c - hi(prev_n)).abs());
            gq = gq.max((2 * prev_n as i64 - s).abs());
        }
        sup_c[s as usize] = gc;
        sup_q[s as usize] = gq;
    }
    let mut bad = 0;
    let mut max_step = (hi(1) - hi(0)).abs();
    let mut max_h = hi(0);
    for m in 1..h.len() - 1 {
        max_step = max_step.max((hi(m + 1) - hi(m)).abs());
        max_h = max_h.max(hi(m));
        let bm = b[m] as usize;
        if sup_c[bm] > 1 + max_step || sup_q[bm] > max_h + 2 {
            bad += 1;
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn height_examples() {
        assert_eq!(height_from_walk(&[0, 1, 1, 0, -1]).unwrap(), vec![0, 1, 2, 1]);
        assert_eq!(height_from_walk(&[0, -1]).unwrap(), vec![0]);
        assert_eq!(height_from_walk(&[0, -1, -2]).unwrap(), vec![0, 0]);
        assert!(height_from_walk(&[]).unwrap().is_empty());
    }

    #[test]
    fn malformed_paths() {
        assert!(matches!(
            height_from_walk(&[0, 2, 0]),
            Err(Error::MalformedPath { index: 2, .. })
        ));
        assert!(matches!(
            height_from_walk(&[1, 0]),
            Err(Error::MalformedPath { index: 0, .. })
        ));
    }

    #[test]
    fn contour_example() {
        let c = contour_from_height(&[0, 1, 2, 1]);
        assert_eq!(c.breakpoints, vec![0, 1, 2, 5]);
        assert_eq!(c.values, vec![0, 1, 2, 1, 0, 1]);
        let closed = c.closed();
        assert_eq!(closed.values, vec![0, 1, 2, 1, 0, 1, 0]);
        assert_eq!(closed.q(4.5), 2);
        assert_eq!(closed.q(5.0), 3);
        assert_eq!(closed.value_at(3.5), 0.5);
    }

    #[test]
    fn flat_contour() {
        let c = contour_from_height(&[0, 0, 0]);
        assert_eq!(c.breakpoints, vec![0, 2, 4]);
        assert_eq!(c.values, vec![0, -1, 0, -1, 0]);
        // Between forest roots the particle passes through the fictive root.
        assert!(c.values.iter().all(|&v| v <= 0));
    }

    #[test]
    fn proximity_on_small_example() {
        let h = [0, 1, 2, 1, 2, 3, 0];
        for m in 1..=5 {
            let chk = proximity_bounds(&h, m).unwrap();
            assert!(chk.holds(), "{chk:?}");
        }
        assert!(proximity_bounds(&h, 6).is_err());
        assert!(proximity_bounds(&h, 0).is_err());
    }

    #[test]
    fn fast_violation_count_matches_per_index_check() {
        let mut state = 7u64;
        for len in 3..40 {
            for _ in 0..20 {
                // Random heights with H_0 = 0 and steps H_{n+1} <= H_n + 1.
                let mut h = vec![0u32];
                for _ in 1..len {
                    state = crate::rng::splitmix64(state);
                    let last = *h.last().unwrap();
                    h.push((state % u64::from(last + 2)) as u32);
                }
                let slow = (1..len - 1)
                    .filter(|&m| !proximity_bounds(&h, m).unwrap().holds())
                    .count() as u64;
                assert_eq!(proximity_violations(&h), slow, "{h:?}");
            }
        }
    }
}
