//! Whole-model gradient check on a small synthetic batch.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topoclasp_core::autodiff::{grad_check, Tape, Var};
use topoclasp_core::graph::Graph;
use topoclasp_core::loss::ContrastOn;
use topoclasp_core::model::{Batch, ModelConfig, ModelParams, Mode};
use topoclasp_core::train::{batch_loss, ExperimentConfig};

pub const STEP: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckSummary {
    /// Worst relative error per parameter tensor, over both contrast targets.
    pub per_group: Vec<(String, f64)>,
    pub max_rel_err: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub failure: Option<String>,
}

/// Three graphs (a triangle with a pendant, a path, a 5-cycle) with random
/// node features and topological rows, and a small model whose biases and
/// `ε` are randomized so no relu sits exactly at its kink.
pub fn synthetic_problem(seed: u64) -> (ModelParams, Batch) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d_in = 3;
    let topo_dim = 5;
    let shapes: [(usize, Vec<(usize, usize)>); 3] = [
        (4, vec![(0, 1), (1, 2), (0, 2), (2, 3)]),
        (3, vec![(0, 1), (1, 2)]),
        (5, vec![(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]),
    ];
    let graphs: Vec<Graph> = shapes
        .into_iter()
        .enumerate()
        .map(|(label, (n, edges))| {
            let feats = (0..n * d_in).map(|_| rng.random_range(-1.0..1.0)).collect();
            Graph::new(n, edges, d_in, feats, label).expect("valid synthetic graph")
        })
        .collect();
    let topo: Vec<Vec<f64>> = (0..3).map(|_| (0..topo_dim).map(|_| rng.random_range(-1.5..1.5)).collect()).collect();
    let config = ModelConfig { d_in, topo_dim, hidden: 6, layers: 3, classes: 3, proj_dim: 4 };
    let mut params = ModelParams::init(config, &mut rng).expect("valid config");
    for i in 0..params.set.len() {
        let name = params.set.entries()[i].name.clone();
        if name.ends_with(".b") || name.ends_with(".b1") || name.ends_with(".b2") || name.ends_with(".eps") {
            let t = params.set.tensor_mut(i);
            for x in t.data_mut() {
                *x = rng.random_range(-0.3..0.3);
            }
        }
    }
    let refs: Vec<&Graph> = graphs.iter().collect();
    let rows: Vec<&[f64]> = topo.iter().map(Vec::as_slice).collect();
    let batch = Batch::new(&refs, &rows).expect("valid batch");
    (params, batch)
}

/// Checks the joint objective under both contrast targets. `hook` runs on
/// every tape before the forward pass (used to plant faults in tests).
pub fn run_gradcheck_with(seed: u64, hook: impl Fn(&mut Tape)) -> GradCheckSummary {
    let (params, batch) = synthetic_problem(seed);
    let mut worst: BTreeMap<String, f64> = BTreeMap::new();
    let mut failure = None;
    for contrast_on in [ContrastOn::Zu, ContrastOn::Proj] {
        let cfg = ExperimentConfig { mode: Mode::Tcl, contrast_on, alpha: 0.5, ..ExperimentConfig::default() };
        let f = |tape: &mut Tape, vars: &[Var]| {
            hook(tape);
            batch_loss(tape, &params, vars, &batch, &cfg).map(|(loss, _)| loss)
        };
        let report = grad_check(f, &params.set, STEP, TOLERANCE);
        if report.failure.is_some() && failure.is_none() {
            failure = report.failure.clone();
        }
        for (name, err) in report.per_param {
            let e = worst.entry(name).or_insert(0.0);
            *e = e.max(err);
        }
    }
    // keep parameter order rather than alphabetical
    let per_group: Vec<(String, f64)> = params
        .set
        .entries()
        .iter()
        .map(|e| (e.name.clone(), worst.get(&e.name).copied().unwrap_or(f64::INFINITY)))
        .collect();
    let max_rel_err = per_group.iter().map(|p| p.1).fold(0.0, f64::max);
    GradCheckSummary {
        passed: failure.is_none() && max_rel_err <= TOLERANCE,
        per_group,
        max_rel_err,
        tolerance: TOLERANCE,
        failure,
    }
}

pub fn run_gradcheck(seed: u64) -> GradCheckSummary {
    run_gradcheck_with(seed, |_| {})
}
