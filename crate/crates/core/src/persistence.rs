//! Persistence diagrams in dimensions 0 and 1.
//!
//! [`reduce_boundary`] runs the standard left-to-right column reduction of the
//! GF(2) boundary matrix. [`union_find_dim0`] computes the dimension-0 part
//! with the elder rule and serves as a fast path and cross-check.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::filtration::{FilteredSimplex, SimplicialFiltration};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePoint {
    pub birth: f64,
    /// For essential classes this is the cap (the last threshold).
    pub death: f64,
    pub dim: usize,
    pub essential: bool,
}

impl PersistencePoint {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    pub points: Vec<PersistencePoint>,
    /// Pairs with `birth == death`, left out of `points`.
    pub zero_persistence_pairs: usize,
}

impl PersistenceDiagram {
    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePoint> {
        self.points.iter().filter(move |p| p.dim == dim)
    }

    pub fn count(&self, dim: usize) -> usize {
        self.in_dim(dim).count()
    }

    pub fn essential_count(&self, dim: usize) -> usize {
        self.in_dim(dim).filter(|p| p.essential).count()
    }

    pub fn total_persistence(&self, dim: usize) -> f64 {
        self.in_dim(dim).map(PersistencePoint::persistence).sum()
    }

    pub fn max_persistence(&self, dim: usize) -> f64 {
        self.in_dim(dim).map(PersistencePoint::persistence).fold(0.0, f64::max)
    }

    /// `(birth, death, essential)` triples of one dimension, sorted; handy for
    /// multiset comparisons.
    pub fn sorted_points(&self, dim: usize) -> Vec<(f64, f64, bool)> {
        let mut pts: Vec<_> = self.in_dim(dim).map(|p| (p.birth, p.death, p.essential)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
        pts
    }
}

/// Sorted-index GF(2) column addition: `acc ^= other`.
fn add_column(acc: &mut Vec<usize>, other: &[usize], scratch: &mut Vec<usize>) {
    scratch.clear();
    let (mut i, mut j) = (0, 0);
    while i < acc.len() && j < other.len() {
        match acc[i].cmp(&other[j]) {
            core::cmp::Ordering::Less => {
                scratch.push(acc[i]);
                i += 1;
            }
            core::cmp::Ordering::Greater => {
                scratch.push(other[j]);
                j += 1;
            }
            core::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&acc[i..]);
    scratch.extend_from_slice(&other[j..]);
    core::mem::swap(acc, scratch);
}

/// Boundary columns in filtration order. Fails when a facet is missing or
/// would enter after its coface.
fn boundary_columns(order: &[FilteredSimplex]) -> Result<Vec<Vec<usize>>> {
    let index: BTreeMap<Vec<usize>, usize> =
        order.iter().enumerate().map(|(i, s)| (s.support().to_vec(), i)).collect();
    order
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let mut col = Vec::with_capacity(s.dim + 1);
            for facet in s.facets() {
                match index.get(&facet) {
                    Some(&i) if i < j => col.push(i),
                    Some(_) => {
                        return Err(Error::Contract(format!(
                            "face {facet:?} enters after its coface {:?}",
                            s.support()
                        )))
                    }
                    None => {
                        return Err(Error::Contract(format!(
                            "face {facet:?} of {:?} missing from the filtration",
                            s.support()
                        )))
                    }
                }
            }
            col.sort_unstable();
            Ok(col)
        })
        .collect()
}

/// Standard column reduction over GF(2). Pairs become `(birth, death)` points;
/// unpaired vertices and edges become essential classes capped at the last
/// threshold. Zero-persistence pairs are only counted.
pub fn reduce_boundary(filt: &SimplicialFiltration) -> Result<PersistenceDiagram> {
    let order = filt.ordered_simplices();
    let mut columns = boundary_columns(&order)?;
    let cap = filt.max_threshold();
    let n = order.len();

    let mut pivot_owner: Vec<Option<usize>> = vec![None; n];
    let mut paired = vec![false; n];
    let mut diagram = PersistenceDiagram::default();
    let mut scratch = Vec::new();

    for j in 0..n {
        let mut col = core::mem::take(&mut columns[j]);
        while let Some(&low) = col.last() {
            match pivot_owner[low] {
                Some(k) => add_column(&mut col, &columns[k], &mut scratch),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            pivot_owner[low] = Some(j);
            paired[low] = true;
            paired[j] = true;
            let (birth, death) = (order[low].value, order[j].value);
            if birth == death {
                diagram.zero_persistence_pairs += 1;
            } else {
                diagram.points.push(PersistencePoint { birth, death, dim: order[low].dim, essential: false });
            }
        }
        columns[j] = col;
    }

    for (i, s) in order.iter().enumerate() {
        if !paired[i] && s.dim <= 1 {
            diagram.points.push(PersistencePoint { birth: s.value, death: cap, dim: s.dim, essential: true });
        }
    }
    Ok(diagram)
}

/// Disjoint-set forest with path halving and union by size.
struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Links two roots and returns the surviving root.
    fn link(&mut self, a: usize, b: usize) -> usize {
        let (big, small) = if self.size[a] >= self.size[b] { (a, b) } else { (b, a) };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        big
    }
}

/// Dimension-0 diagram by the elder rule: when an edge joins two components,
/// the one born later (in filtration order) dies at the edge's value.
pub fn union_find_dim0(filt: &SimplicialFiltration) -> Result<PersistenceDiagram> {
    let order: Vec<FilteredSimplex> = filt.ordered_simplices().into_iter().filter(|s| s.dim <= 1).collect();
    let cap = filt.max_threshold();
    let n = filt.vertices.iter().map(|v| v.0 + 1).max().unwrap_or(0);

    // (value, position in filtration order) of each vertex; None until it enters
    let mut entry: Vec<Option<(f64, usize)>> = vec![None; n];
    // oldest vertex entry of each component, stored at the root
    let mut oldest: Vec<(f64, usize)> = vec![(0.0, 0); n];
    let mut sets = DisjointSets::new(n);
    let mut diagram = PersistenceDiagram::default();

    for (pos, s) in order.iter().enumerate() {
        match s.dim {
            0 => {
                let v = s.vertices[0];
                entry[v] = Some((s.value, pos));
                oldest[v] = (s.value, pos);
            }
            _ => {
                let (u, v) = (s.vertices[0], s.vertices[1]);
                if u >= n || v >= n || entry[u].is_none() || entry[v].is_none() {
                    return Err(Error::Contract(format!("edge ({u}, {v}) enters before an endpoint")));
                }
                let (ru, rv) = (sets.find(u), sets.find(v));
                if ru == rv {
                    continue;
                }
                let (ou, ov) = (oldest[ru], oldest[rv]);
                let (elder, younger) = if (ou.0, ou.1) < (ov.0, ov.1) {
                    (ou, ov)
                } else {
                    (ov, ou)
                };
                let root = sets.link(ru, rv);
                oldest[root] = elder;
                if younger.0 == s.value {
                    diagram.zero_persistence_pairs += 1;
                } else {
                    diagram.points.push(PersistencePoint { birth: younger.0, death: s.value, dim: 0, essential: false });
                }
            }
        }
    }

    for v in 0..n {
        if entry[v].is_some() && sets.find(v) == v {
            diagram.points.push(PersistencePoint { birth: oldest[v].0, death: cap, dim: 0, essential: true });
        }
    }
    Ok(diagram)
}

/// Betti numbers of one dimension sampled at each threshold: a point counts at
/// `α` when `birth ≤ α < death`, an essential point when `birth ≤ α`.
pub fn betti_curve(diagram: &PersistenceDiagram, dim: usize, thresholds: &[f64]) -> Vec<usize> {
    thresholds
        .iter()
        .map(|&a| {
            diagram
                .in_dim(dim)
                .filter(|p| p.birth <= a && (p.essential || a < p.death))
                .count()
        })
        .collect()
}
