//! Brute-force references shared by the property tests and the acceptance
//! suite: random graphs, 3-clique enumeration and GF(2)-rank Betti numbers.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topoclasp_core::graph::Graph;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi graph on `n` nodes with edge probability `p`, no features.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges, 0).unwrap()
}

/// Node values drawn from a small grid so ties are common.
pub fn random_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| f64::from(rng.random_range(0..6u8)) * 0.5).collect()
}

pub fn brute_triangles(g: &Graph) -> Vec<(usize, usize, usize)> {
    let n = g.num_nodes();
    let mut adj = vec![vec![false; n]; n];
    for &(u, v) in g.edges() {
        adj[u][v] = true;
        adj[v][u] = true;
    }
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if adj[a][b] && adj[a][c] && adj[b][c] {
                    out.push((a, b, c));
                }
            }
        }
    }
    out
}

/// Rank over GF(2) by Gaussian elimination on dense 0/1 rows.
pub fn gf2_rank(mut rows: Vec<Vec<bool>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][c]) else { continue };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[c] {
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// `(β₀, β₁)` of the clique complex (up to triangles) of the subgraph induced
/// by nodes with value `≤ alpha`.
pub fn oracle_betti(g: &Graph, values: &[f64], alpha: f64) -> (usize, usize) {
    let verts: Vec<usize> = (0..g.num_nodes()).filter(|&v| values[v] <= alpha).collect();
    let edges: Vec<(usize, usize)> =
        g.edges().iter().copied().filter(|&(u, v)| values[u] <= alpha && values[v] <= alpha).collect();
    let tris: Vec<(usize, usize, usize)> = brute_triangles(g)
        .into_iter()
        .filter(|&(a, b, c)| values[a] <= alpha && values[b] <= alpha && values[c] <= alpha)
        .collect();
    let d1: Vec<Vec<bool>> = edges
        .iter()
        .map(|&(u, v)| verts.iter().map(|&w| w == u || w == v).collect())
        .collect();
    let d2: Vec<Vec<bool>> = tris
        .iter()
        .map(|&(a, b, c)| {
            edges
                .iter()
                .map(|&e| e == (a, b) || e == (a, c) || e == (b, c))
                .collect()
        })
        .collect();
    let r1 = if verts.is_empty() { 0 } else { gf2_rank(d1) };
    let r2 = if edges.is_empty() { 0 } else { gf2_rank(d2) };
    (verts.len() - r1, edges.len() - r1 - r2)
}
