use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A labelled simple graph stored as bit-packed adjacency rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DenseGraph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

/// Numbers of edges, wedges (paths on three vertices) and triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SubgraphCounts {
    pub edges: u64,
    pub wedges: u64,
    pub triangles: u64,
}

/// The motifs supported by [`hom_density`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Motif {
    Edge,
    Wedge,
    Triangle,
}

impl Motif {
    /// Automorphism factor `p(F)` and vertex count of the motif.
    pub fn factor_and_order(self) -> (f64, i32) {
        match self {
            Motif::Edge => (2.0, 2),
            Motif::Wedge => (2.0, 3),
            Motif::Triangle => (6.0, 3),
        }
    }
}

impl DenseGraph {
    /// The empty graph on `n ≥ 1` vertices.
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("a graph needs at least one vertex"));
        }
        let words = n.div_ceil(64);
        Ok(Self { n, words, bits: vec![0; n * words] })
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for i in 0..n {
            for j in (i + 1)..n {
                g.set_edge(i, j, true);
            }
        }
        Ok(g)
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for &(i, j) in edges {
            if i == j || i >= n || j >= n {
                return Err(Error::domain(format!("invalid edge ({i}, {j}) for n = {n}")));
            }
            g.set_edge(i, j, true);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    /// Insert or remove edge `{i, j}`. Loops are ignored.
    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        if i == j {
            return;
        }
        for (a, b) in [(i, j), (j, i)] {
            let w = &mut self.bits[a * self.words + b / 64];
            if present {
                *w |= 1 << (b % 64);
            } else {
                *w &= !(1 << (b % 64));
            }
        }
    }

    /// Flip edge `{i, j}` and return whether it is now present.
    #[inline]
    pub fn toggle_edge(&mut self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] ^= 1 << (j % 64);
        self.bits[j * self.words + i / 64] ^= 1 << (i % 64);
        self.has_edge(i, j)
    }

    pub fn degree(&self, i: usize) -> u64 {
        self.row(i).iter().map(|w| u64::from(w.count_ones())).sum()
    }

    /// `|N(i) ∩ N(j)|`, the number of triangles through the pair `{i, j}`.
    #[inline]
    pub fn common_neighbours(&self, i: usize, j: usize) -> u64 {
        self.row(i).iter().zip(self.row(j)).map(|(a, b)| u64::from((a & b).count_ones())).sum()
    }

    pub fn edge_count(&self) -> u64 {
        (0..self.n).map(|i| self.degree(i)).sum::<u64>() / 2
    }

    pub fn triangle_count(&self) -> u64 {
        let mut t = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.has_edge(i, j) {
                    t += self.common_neighbours(i, j);
                }
            }
        }
        t / 3
    }

    pub fn subgraph_counts(&self) -> SubgraphCounts {
        let wedges = (0..self.n).map(|i| self.degree(i)).map(|d| d * d.saturating_sub(1) / 2).sum();
        SubgraphCounts { edges: self.edge_count(), wedges, triangles: self.triangle_count() }
    }

    /// The graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n];
        if perm.len() != self.n || perm.iter().any(|&p| p >= self.n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::domain("not a permutation of the vertices"));
        }
        let mut g = Self::empty(self.n)?;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.has_edge(i, j) {
                    g.set_edge(perm[i], perm[j], true);
                }
            }
        }
        Ok(g)
    }
}

pub fn subgraph_counts(g: &DenseGraph) -> SubgraphCounts {
    g.subgraph_counts()
}

/// `t(F, G) = p(F)·C_F(G)/n^{|V(F)|}`.
pub fn hom_density(f: Motif, g: &DenseGraph) -> f64 {
    let c = g.subgraph_counts();
    let count = match f {
        Motif::Edge => c.edges,
        Motif::Wedge => c.wedges,
        Motif::Triangle => c.triangles,
    };
    density_from_count(f, count, g.n())
}

/// `p(F)·count/n^{|V(F)|}`.
pub fn density_from_count(f: Motif, count: u64, n: usize) -> f64 {
    let (p, v) = f.factor_and_order();
    p * count as f64 / (n as f64).powi(v)
}

/// Text form: `n` on the first line, then row `i` holds the bits
/// `A[i][i+1..n]` as `0`/`1` characters (the last row is empty).
impl fmt::Display for DenseGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n)?;
        for i in 0..self.n {
            let row: String = ((i + 1)..self.n).map(|j| if self.has_edge(i, j) { '1' } else { '0' }).collect();
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

impl FromStr for DenseGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim);
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("empty graph text".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("vertex count: {e}")))?;
        let mut g = Self::empty(n).map_err(|e| Error::Parse(e.to_string()))?;
        for i in 0..n {
            let row = lines.next().unwrap_or("");
            let bits: Vec<char> = row.chars().filter(|c| !c.is_whitespace()).collect();
            if bits.len() != n - i - 1 {
                return Err(Error::Parse(format!("row {i} has {} bits, expected {}", bits.len(), n - i - 1)));
            }
            for (k, ch) in bits.into_iter().enumerate() {
                match ch {
                    '1' => g.set_edge(i, i + 1 + k, true),
                    '0' => {}
                    other => return Err(Error::Parse(format!("unexpected character {other:?}"))),
                }
            }
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toggle_round_trip() {
        let mut g = DenseGraph::empty(70).unwrap();
        assert!(g.toggle_edge(3, 68));
        assert!(g.has_edge(68, 3));
        assert!(!g.toggle_edge(68, 3));
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn text_round_trip() {
        let g = DenseGraph::from_edges(5, &[(0, 1), (1, 4), (2, 3)]).unwrap();
        let back: DenseGraph = g.to_string().parse().unwrap();
        assert_eq!(g, back);
    }
}
