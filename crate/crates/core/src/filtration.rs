//! Sublevel filtrations of clique complexes (truncated at triangles).

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::graph::Graph;
use crate::{Error, Result};

/// Thresholds at the linear-interpolation quantiles `k / count`, `k = 1..=count`,
/// with equal values collapsed. The last threshold is always `max(values)`.
pub fn quantile_thresholds(values: &[f64], count: usize) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Contract("quantile thresholds of an empty vector".into()));
    }
    if count == 0 {
        return Err(Error::Contract("at least one threshold is required".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract("non-finite filtration value".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let last = sorted.len() - 1;
    let mut out: Vec<f64> = Vec::with_capacity(count);
    for k in 1..=count {
        let q = if k == count {
            sorted[last]
        } else {
            let pos = (k as f64 / count as f64) * last as f64;
            let lo = crate::math::floor(pos) as usize;
            let frac = pos - lo as f64;
            if lo >= last {
                sorted[last]
            } else {
                sorted[lo] + (sorted[lo + 1] - sorted[lo]) * frac
            }
        };
        match out.last() {
            Some(&prev) if q <= prev => {}
            _ => out.push(q),
        }
    }
    Ok(out)
}

/// A simplex of the clique lift with its appearance value. Vertex lists are
/// sorted ascending; unused slots hold `usize::MAX`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilteredSimplex {
    pub vertices: [usize; 3],
    pub dim: usize,
    pub value: f64,
}

impl FilteredSimplex {
    pub fn vertex(v: usize, value: f64) -> Self {
        Self { vertices: [v, usize::MAX, usize::MAX], dim: 0, value }
    }

    pub fn edge(u: usize, v: usize, value: f64) -> Self {
        Self { vertices: [u.min(v), u.max(v), usize::MAX], dim: 1, value }
    }

    pub fn triangle(a: usize, b: usize, c: usize, value: f64) -> Self {
        let mut vs = [a, b, c];
        vs.sort_unstable();
        Self { vertices: vs, dim: 2, value }
    }

    pub fn support(&self) -> &[usize] {
        &self.vertices[..=self.dim]
    }

    /// Codimension-one faces, as sorted vertex lists.
    pub fn facets(&self) -> Vec<Vec<usize>> {
        let s = self.support();
        if s.len() == 1 {
            return Vec::new();
        }
        (0..s.len())
            .map(|skip| s.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect())
            .collect()
    }

    /// Filtration order: value, then dimension, then vertices lexicographically.
    pub fn filtration_cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.dim.cmp(&other.dim))
            .then_with(|| self.support().cmp(other.support()))
    }
}

/// Vertices, edges and triangles of a graph's clique complex, each tagged with
/// the maximum of its vertices' filtration values.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialFiltration {
    pub vertices: Vec<(usize, f64)>,
    pub edges: Vec<(usize, usize, f64)>,
    pub triangles: Vec<(usize, usize, usize, f64)>,
    pub thresholds: Vec<f64>,
}

impl SimplicialFiltration {
    pub fn max_threshold(&self) -> f64 {
        *self.thresholds.last().expect("filtration has at least one threshold")
    }

    pub fn num_simplices(&self) -> usize {
        self.vertices.len() + self.edges.len() + self.triangles.len()
    }

    /// All simplices sorted into a valid filtration order.
    pub fn ordered_simplices(&self) -> Vec<FilteredSimplex> {
        let mut all: Vec<FilteredSimplex> = Vec::with_capacity(self.num_simplices());
        all.extend(self.vertices.iter().map(|&(v, x)| FilteredSimplex::vertex(v, x)));
        all.extend(self.edges.iter().map(|&(u, v, x)| FilteredSimplex::edge(u, v, x)));
        all.extend(self.triangles.iter().map(|&(a, b, c, x)| FilteredSimplex::triangle(a, b, c, x)));
        all.sort_by(FilteredSimplex::filtration_cmp);
        all
    }

    /// Numbers of vertices, edges and triangles present at level `alpha`.
    pub fn counts_at(&self, alpha: f64) -> (usize, usize, usize) {
        (
            self.vertices.iter().filter(|s| s.1 <= alpha).count(),
            self.edges.iter().filter(|s| s.2 <= alpha).count(),
            self.triangles.iter().filter(|s| s.3 <= alpha).count(),
        )
    }
}

/// All 3-cliques `(a, b, c)` with `a < b < c`.
pub fn triangles(graph: &Graph) -> Vec<(usize, usize, usize)> {
    let adj = graph.adjacency();
    let mut out = Vec::new();
    for &(u, v) in graph.edges() {
        // both lists sorted: merge for common neighbours above v
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&adj[u], &adj[v]);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    if a[i] > v {
                        out.push((u, v, a[i]));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Sublevel filtration of the clique lift: each simplex appears at the maximum
/// of its vertex values. Simplices above the last threshold are left out.
pub fn sublevel_filtration(
    graph: &Graph,
    node_values: &[f64],
    thresholds: &[f64],
) -> Result<SimplicialFiltration> {
    if node_values.len() != graph.num_nodes() {
        return Err(Error::Contract(format!(
            "{} node values for {} nodes",
            node_values.len(),
            graph.num_nodes()
        )));
    }
    let Some(&cap) = thresholds.last() else {
        return Err(Error::Contract("filtration needs at least one threshold".into()));
    };
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Contract("thresholds must be strictly ascending".into()));
    }
    let f = node_values;
    let vertices = (0..graph.num_nodes())
        .map(|v| (v, f[v]))
        .filter(|s| s.1 <= cap)
        .collect();
    let edges = graph
        .edges()
        .iter()
        .map(|&(u, v)| (u, v, f[u].max(f[v])))
        .filter(|s| s.2 <= cap)
        .collect();
    let tris = triangles(graph)
        .into_iter()
        .map(|(a, b, c)| (a, b, c, f[a].max(f[b]).max(f[c])))
        .filter(|s| s.3 <= cap)
        .collect();
    Ok(SimplicialFiltration { vertices, edges, triangles: tris, thresholds: thresholds.to_vec() })
}
