//! Topological feature extraction for a whole dataset, and its text dumps.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use topoclasp_core::graph::Dataset;
use topoclasp_core::vectorize::{graph_diagrams, vectorize_graph, TopoConfig, HOMOLOGY_DIMS};

use crate::error::{AppError, Result};

pub(crate) fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| AppError::Internal(e.to_string()))
}


/// Unstandardized vector of every graph, in dataset order. Independent of `jobs`.
pub fn compute_topo_vectors(dataset: &Dataset, cfg: &TopoConfig, jobs: usize) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let one = |(i, g): (usize, &topoclasp_core::graph::Graph)| {
        vectorize_graph(g, cfg)
            .map(|v| v.values)
            .map_err(|e| AppError::Internal(format!("graph {i}: {e}")))
    };
    if jobs <= 1 {
        dataset.graphs.iter().enumerate().map(one).collect()
    } else {
        pool(jobs)?.install(|| dataset.graphs.par_iter().enumerate().map(one).collect())
    }
}

/// CSV with header `graph_index,label,<layout columns>` and one row per graph.
pub fn write_features_csv(dataset: &Dataset, cfg: &TopoConfig, vectors: &[Vec<f64>], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| AppError::Internal(format!("{}: {e}", path.display())))?;
    let mut header = vec!["graph_index".to_string(), "label".to_string()];
    header.extend(cfg.layout().column_names());
    let csv_err = |e: csv::Error| AppError::Internal(format!("{}: {e}", path.display()));
    w.write_record(&header).map_err(csv_err)?;
    for (i, (g, v)) in dataset.graphs.iter().zip(vectors).enumerate() {
        let mut row = vec![i.to_string(), g.label().to_string()];
        row.extend(v.iter().map(|x| x.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// One block per graph and scale, headed by `# graph <i> scale <s>`, then one
/// line per point: `dim birth death essential_flag` with 9 significant digits.
/// Essential deaths are written as the last threshold.
pub fn diagram_dump(dataset: &Dataset, cfg: &TopoConfig) -> Result<String> {
    let mut out = String::new();
    for (i, g) in dataset.graphs.iter().enumerate() {
        for (s, (_, diagram)) in graph_diagrams(g, cfg)?.iter().enumerate() {
            writeln!(out, "# graph {i} scale {s}").unwrap();
            for dim in 0..HOMOLOGY_DIMS {
                for (birth, death, essential) in diagram.sorted_points(dim) {
                    writeln!(out, "{dim} {birth:.8e} {death:.8e} {}", u8::from(essential)).unwrap();
                }
            }
        }
    }
    Ok(out)
}
