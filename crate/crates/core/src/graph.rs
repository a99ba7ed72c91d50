//! Graphs, datasets, and node input features.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An undirected, unweighted graph with a dense node-feature matrix and a class label.
///
/// Edges are stored once, as `(u, v)` with `u < v`, sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    d_in: usize,
    /// Row-major `[num_nodes × d_in]`.
    node_features: Vec<f64>,
    label: usize,
}

impl Graph {
    /// Builds a graph, rejecting out-of-range endpoints, self-loops, duplicate
    /// edges and a feature matrix of the wrong size. Edge orientation is free.
    pub fn new(
        num_nodes: usize,
        edges: Vec<(usize, usize)>,
        d_in: usize,
        node_features: Vec<f64>,
        label: usize,
    ) -> Result<Self> {
        if node_features.len() != num_nodes * d_in {
            return Err(Error::Integrity(format!(
                "feature matrix has {} entries, expected {num_nodes} x {d_in}",
                node_features.len()
            )));
        }
        let mut seen = BTreeSet::new();
        let mut normalized = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a >= num_nodes || b >= num_nodes {
                return Err(Error::Integrity(format!(
                    "edge ({a}, {b}) out of range for {num_nodes} nodes"
                )));
            }
            if a == b {
                return Err(Error::Integrity(format!("self-loop at node {a}")));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::Integrity(format!("duplicate edge ({}, {})", e.0, e.1)));
            }
            normalized.push(e);
        }
        normalized.sort_unstable();
        Ok(Self { num_nodes, edges: normalized, d_in, node_features, label })
    }

    /// Graph with no node features (`d_in = 0`).
    pub fn from_edges(num_nodes: usize, edges: Vec<(usize, usize)>, label: usize) -> Result<Self> {
        Self::new(num_nodes, edges, 0, Vec::new(), label)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn label(&self) -> usize {
        self.label
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn node_features(&self) -> &[f64] {
        &self.node_features
    }

    pub fn feature_row(&self, v: usize) -> &[f64] {
        &self.node_features[v * self.d_in..(v + 1) * self.d_in]
    }

    /// Replaces the feature matrix. Fails when the size does not match.
    pub fn with_features(mut self, d_in: usize, node_features: Vec<f64>) -> Result<Self> {
        if node_features.len() != self.num_nodes * d_in {
            return Err(Error::Integrity(format!(
                "feature matrix has {} entries, expected {} x {d_in}",
                node_features.len(),
                self.num_nodes
            )));
        }
        self.d_in = d_in;
        self.node_features = node_features;
        Ok(self)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Sorted neighbor lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Connected-component id per node, numbered in order of first appearance.
    pub fn components(&self) -> Vec<usize> {
        let adj = self.adjacency();
        let mut comp = vec![usize::MAX; self.num_nodes];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for s in 0..self.num_nodes {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                for &u in &adj[v] {
                    if comp[u] == usize::MAX {
                        comp[u] = next;
                        queue.push_back(u);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn num_components(&self) -> usize {
        self.components().iter().copied().max().map_or(0, |m| m + 1)
    }

    /// Relabels nodes: old node `v` becomes `perm[v]`. Feature rows move with
    /// their nodes.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.num_nodes {
            return Err(Error::Contract(format!(
                "permutation of length {} for {} nodes",
                perm.len(),
                self.num_nodes
            )));
        }
        let mut features = vec![0.0; self.node_features.len()];
        for (v, &p) in perm.iter().enumerate() {
            if p >= self.num_nodes {
                return Err(Error::Contract(format!("permutation entry {p} out of range")));
            }
            features[p * self.d_in..(p + 1) * self.d_in].copy_from_slice(self.feature_row(v));
        }
        let edges = self.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        Self::new(self.num_nodes, edges, self.d_in, features, self.label)
    }
}

/// A labelled collection of graphs sharing one node-feature width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub graphs: Vec<Graph>,
    pub num_classes: usize,
    pub d_in: usize,
}

impl Dataset {
    /// Checks that every label is in range and every graph has width `d_in`.
    pub fn new(name: String, graphs: Vec<Graph>, num_classes: usize, d_in: usize) -> Result<Self> {
        for (i, g) in graphs.iter().enumerate() {
            if g.label() >= num_classes {
                return Err(Error::Integrity(format!(
                    "graph {i} has label {} but only {num_classes} classes",
                    g.label()
                )));
            }
            if g.d_in() != d_in {
                return Err(Error::Integrity(format!(
                    "graph {i} has feature width {}, dataset width is {d_in}",
                    g.d_in()
                )));
            }
        }
        Ok(Self { name, graphs, num_classes, d_in })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.graphs.iter().map(Graph::label).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.graphs
            .iter()
            .flat_map(|g| g.degrees())
            .max()
            .unwrap_or(0)
    }
}

/// Replaces node features by one-hot degrees. The width is the maximum degree
/// over the whole dataset plus one, so every graph shares it.
pub fn degree_features(dataset: &Dataset) -> Dataset {
    let width = dataset.max_degree() + 1;
    let graphs = dataset
        .graphs
        .iter()
        .map(|g| {
            let mut feats = vec![0.0; g.num_nodes() * width];
            for (v, d) in g.degrees().into_iter().enumerate() {
                feats[v * width + d] = 1.0;
            }
            g.clone()
                .with_features(width, feats)
                .expect("one-hot matrix sized from the graph")
        })
        .collect();
    Dataset {
        name: dataset.name.clone(),
        graphs,
        num_classes: dataset.num_classes,
        d_in: width,
    }
}

/// Closeness centrality `(n_v - 1) / Σ_u d(v, u)` with distances and `n_v`
/// taken inside `v`'s connected component. Isolated nodes get 0.
pub fn closeness_centrality(graph: &Graph) -> Vec<f64> {
    let adj = graph.adjacency();
    let n = graph.num_nodes();
    let mut out = vec![0.0; n];
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[s] = 0;
        queue.push_back(s);
        let (mut reached, mut total) = (0usize, 0usize);
        while let Some(v) = queue.pop_front() {
            reached += 1;
            total += dist[v];
            for &u in &adj[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        if total > 0 {
            out[s] = (reached - 1) as f64 / total as f64;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, vec![(0, 1), (1, 2)], 0).unwrap()
    }

    fn cycle4() -> Graph {
        Graph::from_edges(4, vec![(0, 1), (1, 2), (2, 3), (3, 0)], 0).unwrap()
    }

    fn dataset(graphs: Vec<Graph>) -> Dataset {
        Dataset::new("toy".into(), graphs, 1, 0).unwrap()
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(Graph::from_edges(2, vec![(0, 2)], 0), Err(Error::Integrity(_))));
        assert!(matches!(Graph::from_edges(2, vec![(1, 1)], 0), Err(Error::Integrity(_))));
        assert!(matches!(
            Graph::from_edges(2, vec![(0, 1), (1, 0)], 0),
            Err(Error::Integrity(_))
        ));
        assert!(matches!(
            Graph::new(2, vec![], 3, vec![0.0; 5], 0),
            Err(Error::Integrity(_))
        ));
    }

    #[test]
    fn dataset_rejects_out_of_range_label() {
        let g = Graph::from_edges(1, vec![], 2).unwrap();
        assert!(Dataset::new("x".into(), vec![g], 2, 0).is_err());
    }

    #[test]
    fn degree_one_hot_path() {
        let ds = degree_features(&dataset(vec![path3()]));
        assert_eq!(ds.d_in, 3);
        let g = &ds.graphs[0];
        assert_eq!(g.feature_row(0), &[0.0, 1.0, 0.0]);
        assert_eq!(g.feature_row(1), &[0.0, 0.0, 1.0]);
        assert_eq!(g.feature_row(2), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn degree_width_is_dataset_wide() {
        let isolated = Graph::from_edges(1, vec![], 0).unwrap();
        let ds = degree_features(&dataset(vec![isolated, cycle4()]));
        assert_eq!(ds.d_in, 3);
        assert_eq!(ds.graphs[0].feature_row(0), &[1.0, 0.0, 0.0]);
        for v in 0..4 {
            assert_eq!(ds.graphs[1].feature_row(v), &[0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn closeness_examples() {
        let c = closeness_centrality(&path3());
        assert_eq!(c, vec![2.0 / 3.0, 1.0, 2.0 / 3.0]);

        let k4 = Graph::from_edges(4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], 0).unwrap();
        assert_eq!(closeness_centrality(&k4), vec![1.0; 4]);

        let two_edges = Graph::from_edges(4, vec![(0, 1), (2, 3)], 0).unwrap();
        assert_eq!(closeness_centrality(&two_edges), vec![1.0; 4]);

        let isolated = Graph::from_edges(2, vec![], 0).unwrap();
        assert_eq!(closeness_centrality(&isolated), vec![0.0; 2]);
    }

    #[test]
    fn components_count() {
        let g = Graph::from_edges(5, vec![(0, 1), (2, 3)], 0).unwrap();
        assert_eq!(g.num_components(), 3);
        assert_eq!(Graph::from_edges(0, vec![], 0).unwrap().num_components(), 0);
    }

    #[test]
    fn relabel_moves_features() {
        let g = Graph::new(2, vec![(0, 1)], 1, vec![1.0, 2.0], 0).unwrap();
        let h = g.relabel(&[1, 0]).unwrap();
        assert_eq!(h.node_features(), &[2.0, 1.0]);
        assert_eq!(h.edges(), &[(0, 1)]);
    }
}
