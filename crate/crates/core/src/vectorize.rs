//! Fixed-length topological feature vectors.
//!
//! For every scale of the node field: quantile thresholds, sublevel clique
//! filtration, persistence diagram, then per homology dimension the Betti
//! curve at the thresholds followed by total persistence, max persistence and
//! the number of diagram points.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::filtration::{quantile_thresholds, sublevel_filtration};
use crate::graph::{closeness_centrality, Graph};
use crate::persistence::{betti_curve, reduce_boundary, PersistenceDiagram};
use crate::spectral::{hks, log_spaced_times};
use crate::{math, Error, Result};

/// Node scalar field used to filter a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FiltrationSource {
    Hks,
    Degree,
    Closeness,
}

impl FiltrationSource {
    pub const ALL: [FiltrationSource; 3] = [Self::Hks, Self::Degree, Self::Closeness];

    pub fn name(self) -> &'static str {
        match self {
            Self::Hks => "hks",
            Self::Degree => "degree",
            Self::Closeness => "closeness",
        }
    }
}

impl fmt::Display for FiltrationSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FiltrationSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|src| src.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown filtration '{s}' (valid: hks, degree, closeness)")))
    }
}

pub const HOMOLOGY_DIMS: usize = 2;
pub const STATS_PER_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopoConfig {
    pub source: FiltrationSource,
    /// Number of HKS diffusion times; degree and closeness always use one scale.
    pub scales: usize,
    /// Quantile thresholds per scale.
    pub thresholds: usize,
    pub t_min: f64,
    pub t_max: f64,
}

impl Default for TopoConfig {
    fn default() -> Self {
        Self { source: FiltrationSource::Hks, scales: 10, thresholds: 10, t_min: 0.1, t_max: 10.0 }
    }
}

impl TopoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thresholds == 0 {
            return Err(Error::Config("thresholds must be at least 1".into()));
        }
        if self.source == FiltrationSource::Hks {
            if self.scales == 0 {
                return Err(Error::Config("scales must be at least 1".into()));
            }
            if !(self.t_min > 0.0 && self.t_max >= self.t_min) {
                return Err(Error::Config(format!(
                    "invalid diffusion time range [{}, {}]",
                    self.t_min, self.t_max
                )));
            }
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        log_spaced_times(self.t_min, self.t_max, self.scales)
    }

    pub fn layout(&self) -> TopoLayout {
        let scales = match self.source {
            FiltrationSource::Hks => self.scales,
            FiltrationSource::Degree | FiltrationSource::Closeness => 1,
        };
        TopoLayout { scales, thresholds: self.thresholds }
    }
}

/// Segment layout: `scale → dim → [betti_0..betti_{N-1}, total, max, count]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopoLayout {
    pub scales: usize,
    pub thresholds: usize,
}

impl TopoLayout {
    pub fn segment_len(&self) -> usize {
        self.thresholds + STATS_PER_DIM
    }

    pub fn len(&self) -> usize {
        self.scales * HOMOLOGY_DIMS * self.segment_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn offset(&self, scale: usize, dim: usize) -> usize {
        (scale * HOMOLOGY_DIMS + dim) * self.segment_len()
    }

    /// Column names, e.g. `s3_h1_b7`, `s3_h1_total`.
    pub fn column_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.len());
        for s in 0..self.scales {
            for d in 0..HOMOLOGY_DIMS {
                for b in 0..self.thresholds {
                    names.push(format!("s{s}_h{d}_b{b}"));
                }
                for stat in ["total", "max", "count"] {
                    names.push(format!("s{s}_h{d}_{stat}"));
                }
            }
        }
        names
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopoVector {
    pub values: Vec<f64>,
    pub layout: TopoLayout,
}

/// Node values of every scale (one entry per scale).
/// Relative gap below which two node values count as the same value.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Replaces every run of sorted values whose consecutive gaps stay within
/// `TIE_TOLERANCE · max|v|` by the run's smallest member. Symmetric nodes get
/// bit-identical values, so thresholds cannot split them on rounding noise.
pub fn merge_near_ties(values: &mut [f64]) {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = TIE_TOLERANCE * scale;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut anchor = 0.0;
    let mut prev = f64::NEG_INFINITY;
    for &i in &order {
        let v = values[i];
        if v - prev > tol {
            anchor = v;
        }
        prev = v;
        values[i] = anchor;
    }
}

pub fn filtration_values(graph: &Graph, cfg: &TopoConfig) -> Result<Vec<Vec<f64>>> {
    let mut fields = raw_filtration_values(graph, cfg)?;
    fields.iter_mut().for_each(|f| merge_near_ties(f));
    Ok(fields)
}

fn raw_filtration_values(graph: &Graph, cfg: &TopoConfig) -> Result<Vec<Vec<f64>>> {
    Ok(match cfg.source {
        FiltrationSource::Hks => {
            let field = hks(graph, &cfg.times())?;
            (0..field.times.len()).map(|s| field.scale_column(s)).collect()
        }
        FiltrationSource::Degree => {
            let degrees = graph.degrees().into_iter().map(|d| d as f64).collect();
            alloc::vec![degrees]
        }
        FiltrationSource::Closeness => alloc::vec![closeness_centrality(graph)],
    })
}

/// Thresholds and diagram for each scale.
pub fn graph_diagrams(graph: &Graph, cfg: &TopoConfig) -> Result<Vec<(Vec<f64>, PersistenceDiagram)>> {
    cfg.validate()?;
    if graph.num_nodes() == 0 {
        return Err(Error::Contract("cannot vectorize a graph without nodes".to_string()));
    }
    filtration_values(graph, cfg)?
        .into_iter()
        .map(|values| {
            let thresholds = quantile_thresholds(&values, cfg.thresholds)?;
            let filt = sublevel_filtration(graph, &values, &thresholds)?;
            Ok((thresholds, reduce_boundary(&filt)?))
        })
        .collect()
}

pub fn vectorize_graph(graph: &Graph, cfg: &TopoConfig) -> Result<TopoVector> {
    let layout = cfg.layout();
    let mut values = Vec::with_capacity(layout.len());
    for (thresholds, diagram) in graph_diagrams(graph, cfg)? {
        for dim in 0..HOMOLOGY_DIMS {
            let curve = betti_curve(&diagram, dim, &thresholds);
            let last = curve.last().copied().unwrap_or(0);
            values.extend(curve.iter().map(|&b| b as f64));
            values.extend(core::iter::repeat_n(last as f64, layout.thresholds - curve.len()));
            values.push(diagram.total_persistence(dim));
            values.push(diagram.max_persistence(dim));
            values.push(diagram.count(dim) as f64);
        }
    }
    debug_assert_eq!(values.len(), layout.len());
    Ok(TopoVector { values, layout })
}

/// Per-coordinate z-score parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub const STD_FLOOR: f64 = 1e-8;

impl Standardizer {
    /// Population mean and standard deviation, with the deviation floored at
    /// [`STD_FLOOR`].
    pub fn fit<'a, I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut count = 0usize;
        let mut sum: Vec<f64> = Vec::new();
        let mut sq: Vec<f64> = Vec::new();
        let mut rows_seen: Vec<&[f64]> = Vec::new();
        for row in rows {
            if count == 0 {
                sum = alloc::vec![0.0; row.len()];
                sq = alloc::vec![0.0; row.len()];
            } else if row.len() != sum.len() {
                return Err(Error::Contract("standardizer rows differ in length".into()));
            }
            for (s, &x) in sum.iter_mut().zip(row) {
                *s += x;
            }
            rows_seen.push(row);
            count += 1;
        }
        if count == 0 {
            return Err(Error::Contract("cannot fit a standardizer on zero rows".into()));
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
        for row in rows_seen {
            for ((q, &x), &m) in sq.iter_mut().zip(row).zip(&mean) {
                *q += (x - m) * (x - m);
            }
        }
        let std = sq.iter().map(|q| math::sqrt(q / count as f64).max(STD_FLOOR)).collect();
        Ok(Self { mean, std })
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&x, (&m, &s))| (x - m) / s)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cfg(source: FiltrationSource) -> TopoConfig {
        TopoConfig { source, ..TopoConfig::default() }
    }

    fn c4() -> Graph {
        Graph::from_edges(4, vec![(0, 1), (1, 2), (2, 3), (3, 0)], 0).unwrap()
    }

    #[test]
    fn near_ties_collapse_to_one_value() {
        let mut v = vec![2.0 + 1e-15, 1.0, 2.0, 3.0, 2.0 - 1e-15];
        merge_near_ties(&mut v);
        assert_eq!(v, vec![2.0 - 1e-15, 1.0, 2.0 - 1e-15, 3.0, 2.0 - 1e-15]);
    }

    #[test]
    fn default_layout_is_260() {
        assert_eq!(TopoConfig::default().layout().len(), 260);
        assert_eq!(cfg(FiltrationSource::Degree).layout().len(), 26);
        assert_eq!(TopoConfig::default().layout().column_names().len(), 260);
    }

    #[test]
    fn single_node_hks() {
        let g = Graph::from_edges(1, vec![], 0).unwrap();
        let v = vectorize_graph(&g, &TopoConfig::default()).unwrap();
        let layout = v.layout;
        for s in 0..layout.scales {
            let d0 = &v.values[layout.offset(s, 0)..layout.offset(s, 1)];
            assert_eq!(d0[10], 0.0, "total persistence");
            assert_eq!(d0[12], 1.0, "count");
            let d1 = &v.values[layout.offset(s, 1)..layout.offset(s, 1) + layout.segment_len()];
            assert!(d1.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn cycle_degree_filtration() {
        let v = vectorize_graph(&c4(), &cfg(FiltrationSource::Degree)).unwrap();
        let d1 = &v.values[v.layout.offset(0, 1)..];
        assert!(d1[..10].iter().all(|&b| b == 1.0), "padded betti_1 samples");
        assert_eq!(d1[12], 1.0);
    }

    #[test]
    fn triangle_degree_filtration_has_no_loops() {
        let g = Graph::from_edges(3, vec![(0, 1), (1, 2), (0, 2)], 0).unwrap();
        let v = vectorize_graph(&g, &cfg(FiltrationSource::Degree)).unwrap();
        assert!(v.values[v.layout.offset(0, 1)..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn unknown_source_is_config_error() {
        assert!(matches!("ricci".parse::<FiltrationSource>(), Err(Error::Config(m)) if m.contains("closeness")));
        assert_eq!("closeness".parse::<FiltrationSource>().unwrap(), FiltrationSource::Closeness);
    }

    #[test]
    fn empty_graph_is_rejected() {
        let g = Graph::from_edges(0, vec![], 0).unwrap();
        assert!(vectorize_graph(&g, &TopoConfig::default()).is_err());
    }

    #[test]
    fn standardizer_examples() {
        let rows = [vec![1.0, 5.0], vec![3.0, 5.0]];
        let st = Standardizer::fit(rows.iter().map(Vec::as_slice)).unwrap();
        assert_eq!(st.apply(&[1.0, 5.0]), vec![-1.0, 0.0]);

        let single = [vec![2.0, -3.0]];
        let st = Standardizer::fit(single.iter().map(Vec::as_slice)).unwrap();
        assert_eq!(st.apply(&single[0]), vec![0.0, 0.0]);

        let id = Standardizer { mean: vec![0.0; 3], std: vec![1.0; 3] };
        let x = [0.3, -1.7, 2.5];
        for (a, b) in id.apply(&x).iter().zip(&x) {
            assert!(math::abs(a - b) <= 1e-12);
        }
        assert!(Standardizer::fit(core::iter::empty::<&[f64]>()).is_err());
    }
}
