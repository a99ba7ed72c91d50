//! Reader and writer for the TU benchmark flat-file layout.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use topoclasp_core::graph::{Dataset, Graph};

use crate::error::{AppError, Result};

/// The directory holding `<name>_A.txt`: either `dir/<name>` or `dir` itself.
pub fn dataset_root(dir: &Path, name: &str) -> PathBuf {
    let nested = dir.join(name);
    if nested.join(format!("{name}_A.txt")).is_file() {
        nested
    } else {
        dir.to_path_buf()
    }
}

fn read_required(root: &Path, name: &str, suffix: &str) -> Result<String> {
    let path = root.join(format!("{name}_{suffix}.txt"));
    fs::read_to_string(&path).map_err(|e| AppError::Parse(format!("cannot read {}: {e}", path.display())))
}

fn parse_ints(text: &str, file: &str) -> Result<Vec<i64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<i64>()
                .map_err(|e| AppError::Parse(format!("{file} line {}: '{}': {e}", i + 1, l.trim())))
        })
        .collect()
}

fn parse_pairs(text: &str, file: &str) -> Result<Vec<(i64, i64)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let bad = || AppError::Parse(format!("{file} line {}: expected 'i, j', got '{}'", i + 1, l.trim()));
            let (a, b) = l.split_once(',').ok_or_else(bad)?;
            Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

/// Dense 0-based codes of `values`, assigned in sorted order of the distinct values.
fn dense_codes(values: &[i64]) -> (Vec<usize>, usize) {
    let distinct: Vec<i64> = values.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let codes = values.iter().map(|v| distinct.binary_search(v).expect("value is present")).collect();
    (codes, distinct.len())
}

/// Parses `<name>_A.txt`, `<name>_graph_indicator.txt`, `<name>_graph_labels.txt`
/// and, when present, `<name>_node_labels.txt` (one-hot encoded).
pub fn parse_tu_dataset(dir: &Path, name: &str) -> Result<Dataset> {
    let root = dataset_root(dir, name);
    let edges = parse_pairs(&read_required(&root, name, "A")?, "A")?;
    let indicator = parse_ints(&read_required(&root, name, "graph_indicator")?, "graph_indicator")?;
    let graph_labels = parse_ints(&read_required(&root, name, "graph_labels")?, "graph_labels")?;
    let node_label_path = root.join(format!("{name}_node_labels.txt"));
    let node_labels = if node_label_path.is_file() {
        Some(parse_ints(&read_required(&root, name, "node_labels")?, "node_labels")?)
    } else {
        None
    };

    let num_nodes = indicator.len();
    // graph ids must read 1, …, 1, 2, …, G without gaps or reordering
    let mut starts: Vec<usize> = Vec::new();
    for (v, &g) in indicator.iter().enumerate() {
        let expected_next = starts.len() as i64 + 1;
        if g == expected_next {
            starts.push(v);
        } else if g != expected_next - 1 {
            return Err(AppError::Parse(format!(
                "non-consecutive graph indicator: node {} has graph id {g} after graph {}",
                v + 1,
                expected_next - 1
            )));
        }
    }
    let num_graphs = starts.len();
    if graph_labels.len() != num_graphs {
        return Err(AppError::Parse(format!(
            "{} graph labels for {num_graphs} graphs",
            graph_labels.len()
        )));
    }
    let (one_hot, d_in) = match &node_labels {
        Some(labels) if labels.len() != num_nodes => {
            return Err(AppError::Parse(format!("{} node labels for {num_nodes} nodes", labels.len())));
        }
        Some(labels) => {
            let (codes, width) = dense_codes(labels);
            (Some(codes), width)
        }
        None => (None, 0),
    };

    let mut per_graph: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); num_graphs];
    let mut self_loops = 0usize;
    for &(a, b) in &edges {
        let in_range = |x: i64| x >= 1 && x as usize <= num_nodes;
        if !in_range(a) || !in_range(b) {
            return Err(AppError::Parse(format!("edge ({a}, {b}) references a node outside 1..={num_nodes}")));
        }
        let (a, b) = (a as usize - 1, b as usize - 1);
        let g = indicator[a] as usize - 1;
        if indicator[b] as usize - 1 != g {
            return Err(AppError::Parse(format!("edge ({}, {}) joins two different graphs", a + 1, b + 1)));
        }
        if a == b {
            self_loops += 1;
            continue;
        }
        let (la, lb) = (a - starts[g], b - starts[g]);
        per_graph[g].insert((la.min(lb), la.max(lb)));
    }
    let unique: usize = per_graph.iter().map(BTreeSet::len).sum();
    let surplus = (edges.len() - self_loops).saturating_sub(2 * unique);
    if self_loops > 0 || surplus > 0 {
        log::warn!("{name}: dropped {self_loops} self-loop entries and {surplus} duplicate edge entries");
    }

    let (label_codes, num_classes) = dense_codes(&graph_labels);
    let mut graphs = Vec::with_capacity(num_graphs);
    for (g, edge_set) in per_graph.into_iter().enumerate() {
        let start = starts[g];
        let end = starts.get(g + 1).copied().unwrap_or(num_nodes);
        let n = end - start;
        let mut features = vec![0.0; n * d_in];
        if let Some(codes) = &one_hot {
            for v in 0..n {
                features[v * d_in + codes[start + v]] = 1.0;
            }
        }
        graphs.push(Graph::new(n, edge_set.into_iter().collect(), d_in, features, label_codes[g])?);
    }
    Ok(Dataset::new(name.to_string(), graphs, num_classes, d_in)?)
}

/// Writes `dataset` in TU layout under `dir/<name>/`. Node labels are the
/// argmax of each feature row; graph labels are the dense class indices.
pub fn write_tu_dataset(dataset: &Dataset, dir: &Path) -> Result<PathBuf> {
    let name = &dataset.name;
    let root = dir.join(name);
    fs::create_dir_all(&root).map_err(|e| AppError::io(&root, e))?;
    let (mut a, mut indicator, mut labels, mut node_labels) = (String::new(), String::new(), String::new(), String::new());
    let mut offset = 0;
    for (g, graph) in dataset.graphs.iter().enumerate() {
        for &(u, v) in graph.edges() {
            let (u, v) = (u + offset + 1, v + offset + 1);
            writeln!(a, "{u}, {v}").unwrap();
            writeln!(a, "{v}, {u}").unwrap();
        }
        for v in 0..graph.num_nodes() {
            writeln!(indicator, "{}", g + 1).unwrap();
            if dataset.d_in > 0 {
                let row = graph.feature_row(v);
                let arg = (0..row.len()).fold(0, |best, c| if row[c] > row[best] { c } else { best });
                writeln!(node_labels, "{arg}").unwrap();
            }
        }
        writeln!(labels, "{}", graph.label()).unwrap();
        offset += graph.num_nodes();
    }
    let mut files = vec![("A", a), ("graph_indicator", indicator), ("graph_labels", labels)];
    if dataset.d_in > 0 {
        files.push(("node_labels", node_labels));
    }
    for (suffix, text) in files {
        let path = root.join(format!("{name}_{suffix}.txt"));
        fs::write(&path, text).map_err(|e| AppError::io(&path, e))?;
    }
    Ok(root)
}
