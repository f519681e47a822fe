//! Exhaustive enumeration of labelled graphs on up to eight vertices.
//!
//! Graphs are visited in Gray-code order so that consecutive graphs differ
//! by one edge and the triangle count updates in O(1) from the common
//! neighbourhood of the flipped pair.

use std::sync::OnceLock;

use rayon::prelude::*;

use super::graph::DenseGraph;
use crate::error::{Error, Result};

/// Largest `n` for which plain counting is supported.
pub const COUNT_CAPACITY: usize = 8;
/// Largest `n` for which weighted sums over all graphs are supported.
pub const WEIGHTED_CAPACITY: usize = 7;

/// Number of high edge bits fixed per parallel work unit.
const CHUNK_BITS: usize = 6;

pub(crate) fn check_capacity(n: usize, max: usize, what: &'static str) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    if n > max {
        return Err(Error::Capacity { n, max, what });
    }
    Ok(())
}

pub(crate) fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
}

pub(crate) fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Visit every labelled graph on `n ≤ 8` vertices once.
///
/// The callback receives the edge count, the triangle count and the
/// adjacency rows as bit masks. Work is split into chunks by the high edge
/// bits; one accumulator per chunk is returned, in chunk order, so that any
/// reduction the caller performs is deterministic.
pub(crate) fn enumerate<A, I, V>(n: usize, init: I, visit: V) -> Vec<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, u32, u32, &[u8; 8]) + Sync,
{
    assert!((1..=COUNT_CAPACITY).contains(&n));
    let edges = pairs(n);
    let m = edges.len();
    let high = m.min(CHUNK_BITS);
    let low = m - high;
    (0u64..1 << high)
        .into_par_iter()
        .map(|chunk| {
            let mut acc = init();
            let mut adj = [0u8; 8];
            for k in 0..high {
                if chunk >> k & 1 == 1 {
                    let (i, j) = edges[low + k];
                    adj[i] |= 1 << j;
                    adj[j] |= 1 << i;
                }
            }
            let mut e: u32 = adj.iter().map(|r| r.count_ones()).sum::<u32>() / 2;
            let mut t: u32 = 0;
            for &(i, j) in &edges {
                if adj[i] >> j & 1 == 1 {
                    t += (adj[i] & adj[j]).count_ones();
                }
            }
            t /= 3;
            visit(&mut acc, e, t, &adj);
            for s in 1u64..1 << low {
                let (i, j) = edges[s.trailing_zeros() as usize];
                let common = (adj[i] & adj[j]).count_ones();
                if adj[i] >> j & 1 == 1 {
                    e -= 1;
                    t -= common;
                } else {
                    e += 1;
                    t += common;
                }
                adj[i] ^= 1 << j;
                adj[j] ^= 1 << i;
                visit(&mut acc, e, t, &adj);
            }
            acc
        })
        .collect()
}

/// Convert enumeration rows to a [`DenseGraph`].
#[cfg(test)]
pub(crate) fn graph_from_rows(n: usize, adj: &[u8; 8]) -> DenseGraph {
    let mut g = DenseGraph::empty(n).expect("n >= 1");
    for i in 0..n {
        for j in (i + 1)..n {
            if adj[i] >> j & 1 == 1 {
                g.set_edge(i, j, true);
            }
        }
    }
    g
}

/// Every labelled graph on `n ≤ 6` vertices, in index order.
pub fn all_graphs(n: usize) -> Result<Vec<DenseGraph>> {
    check_capacity(n, 6, "listing all graphs")?;
    let edges = pairs(n);
    Ok((0u64..1 << edges.len())
        .map(|mask| {
            let mut g = DenseGraph::empty(n).expect("n >= 1");
            for (k, &(i, j)) in edges.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    g.set_edge(i, j, true);
                }
            }
            g
        })
        .collect())
}

/// Histogram of `(edges, triangles)` over all labelled graphs on `n`
/// vertices, together with the convex hull of its support.
#[derive(Debug, Clone)]
pub struct Census {
    n: usize,
    max_edges: usize,
    max_triangles: usize,
    counts: Vec<u64>,
    hull: Vec<(i64, i64)>,
}

impl Census {
    fn build(n: usize) -> Self {
        let max_edges = n * n.saturating_sub(1) / 2;
        let max_triangles = binom(n as u64, 3) as usize;
        let width = max_triangles + 1;
        let parts = enumerate(
            n,
            || vec![0u64; (max_edges + 1) * width],
            |h, e, t, _| h[e as usize * width + t as usize] += 1,
        );
        let mut counts = vec![0u64; (max_edges + 1) * width];
        for part in parts {
            counts.iter_mut().zip(part).for_each(|(c, p)| *c += p);
        }
        let points: Vec<(i64, i64)> = (0..=max_edges)
            .flat_map(|e| (0..=max_triangles).map(move |t| (e, t)))
            .filter(|&(e, t)| counts[e * width + t] > 0)
            .map(|(e, t)| (e as i64, t as i64))
            .collect();
        Census { n, max_edges, max_triangles, counts, hull: convex_hull(points) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_edges(&self) -> usize {
        self.max_edges
    }

    pub fn max_triangles(&self) -> usize {
        self.max_triangles
    }

    /// Number of labelled graphs with exactly these counts.
    pub fn count(&self, edges: u64, triangles: u64) -> u64 {
        if edges as usize > self.max_edges || triangles as usize > self.max_triangles {
            return 0;
        }
        self.counts[edges as usize * (self.max_triangles + 1) + triangles as usize]
    }

    /// Non-empty cells `(edges, triangles, multiplicity)` in lexicographic order.
    pub fn support(&self) -> impl Iterator<Item = (u64, u64, u64)> + '_ {
        let width = self.max_triangles + 1;
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(k, &c)| ((k / width) as u64, (k % width) as u64, c))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Whether the count-space point `(e, t)` lies strictly inside the convex
    /// hull of the support, at distance more than `tol` from every face.
    pub fn strictly_interior(&self, e: f64, t: f64, tol: f64) -> bool {
        let h = &self.hull;
        if h.len() < 3 {
            return false;
        }
        (0..h.len()).all(|k| {
            let (x0, y0) = (h[k].0 as f64, h[k].1 as f64);
            let (x1, y1) = (h[(k + 1) % h.len()].0 as f64, h[(k + 1) % h.len()].1 as f64);
            let len = (x1 - x0).hypot(y1 - y0);
            let cross = (x1 - x0) * (t - y0) - (y1 - y0) * (e - x0);
            cross / len > tol
        })
    }
}

/// Counter-clockwise hull without collinear points.
fn convex_hull(mut pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

static CENSUS: [OnceLock<Census>; COUNT_CAPACITY + 1] = [const { OnceLock::new() }; COUNT_CAPACITY + 1];

/// The (cached) census for `n ≤ 8`.
pub fn census(n: usize) -> Result<&'static Census> {
    check_capacity(n, COUNT_CAPACITY, "graph counting")?;
    Ok(CENSUS[n].get_or_init(|| Census::build(n)))
}

/// Number of labelled graphs on `n` vertices with the given edge and
/// triangle counts; zero means the pair is not graphical.
pub fn count_constrained(n: usize, edges: u64, triangles: u64) -> Result<u64> {
    Ok(census(n)?.count(edges, triangles))
}
