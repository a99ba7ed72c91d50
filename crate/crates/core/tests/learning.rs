//! Model, loss and training-loop properties on small synthetic data.

mod common;

use common::{random_graph, rng};
use proptest::prelude::*;
use rand::Rng;
use topoclasp_core::autodiff::{grad_check, Tape};
use topoclasp_core::graph::{degree_features, Dataset, Graph};
use topoclasp_core::loss::info_nce;
use topoclasp_core::model::{forward, Batch, ModelConfig, ModelParams, Mode};
use topoclasp_core::train::{batch_loss, stratified_kfold, topo_vectors, train_fold, ExperimentConfig};
use topoclasp_core::vectorize::{vectorize_graph, FiltrationSource, Standardizer};

fn featured(seed: u64, n: usize, d_in: usize) -> Graph {
    let mut r = rng(seed);
    let g = random_graph(&mut r, n, 0.4);
    let feats = (0..n * d_in).map(|_| r.random_range(-1.0..1.0)).collect();
    g.with_features(d_in, feats).unwrap()
}

fn small_model(d_in: usize, topo_dim: usize, seed: u64) -> ModelParams {
    ModelParams::seeded(ModelConfig { d_in, topo_dim, hidden: 8, layers: 3, classes: 2, proj_dim: 4 }, seed).unwrap()
}

fn logits(params: &ModelParams, graphs: &[&Graph], topo: &[&[f64]], mode: Mode) -> Vec<Vec<f64>> {
    let batch = Batch::new(graphs, topo).unwrap();
    let mut tape = Tape::new();
    let vars = params.register(&mut tape);
    let out = forward(&mut tape, params, &vars, &batch, mode).unwrap();
    let t = tape.value(out.logits);
    (0..t.rows()).map(|r| t.row(r).to_vec()).collect()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn logits_ignore_node_order(seed in any::<u64>(), n in 1usize..9) {
        use rand::seq::SliceRandom;
        let g = featured(seed, n, 3);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng(seed ^ 1));
        let h = g.relabel(&perm).unwrap();
        let p = small_model(3, 2, seed);
        let topo: &[f64] = &[0.5, -1.0];
        for mode in Mode::ALL {
            let a = logits(&p, &[&g], &[topo], mode);
            let b = logits(&p, &[&h], &[topo], mode);
            prop_assert!(close(&a[0], &b[0], 1e-10));
        }
    }

    #[test]
    fn batch_members_do_not_interact(seed in any::<u64>()) {
        let (g, h) = (featured(seed, 5, 2), featured(seed.wrapping_add(1), 7, 2));
        let p = small_model(2, 3, seed);
        let (tg, th): (&[f64], &[f64]) = (&[0.1, 0.2, 0.3], &[-1.0, 0.0, 2.0]);
        for mode in Mode::ALL {
            let together = logits(&p, &[&g, &h], &[tg, th], mode);
            let alone_g = logits(&p, &[&g], &[tg], mode);
            let alone_h = logits(&p, &[&h], &[th], mode);
            prop_assert!(close(&together[0], &alone_g[0], 1e-10));
            prop_assert!(close(&together[1], &alone_h[0], 1e-10));
        }
    }

    #[test]
    fn contrastive_loss_is_symmetric_and_permutation_invariant(seed in any::<u64>(), b in 1usize..6) {
        use topoclasp_core::autodiff::Tensor;
        let mut r = rng(seed);
        let z: Vec<f64> = (0..b * 3).map(|_| r.random_range(-1.0..1.0)).collect();
        let u: Vec<f64> = (0..b * 3).map(|_| r.random_range(-1.0..1.0)).collect();
        let eval = |z: &[f64], u: &[f64], scale: f64| {
            let mut t = Tape::new();
            let zv = t.constant(Tensor::from_vec(b, 3, z.iter().map(|x| x * scale).collect()).unwrap());
            let uv = t.constant(Tensor::from_vec(b, 3, u.to_vec()).unwrap());
            let l = info_nce(&mut t, zv, uv, 0.5).unwrap();
            t.value(l).item()
        };
        let base = eval(&z, &u, 1.0);
        prop_assert!((base - eval(&u, &z, 1.0)).abs() < 1e-12);
        prop_assert!((base - eval(&z, &u, 3.7)).abs() < 1e-9);
        let rev = |x: &[f64]| x.chunks(3).rev().flatten().copied().collect::<Vec<f64>>();
        prop_assert!((base - eval(&rev(&z), &rev(&u), 1.0)).abs() < 1e-12);
        prop_assert!(base >= 0.0);
    }
}

#[test]
fn every_mode_has_correct_gradients() {
    let graphs = [featured(1, 4, 2), featured(2, 3, 2), featured(3, 5, 2)];
    let refs: Vec<&Graph> = graphs.iter().collect();
    let topo = [vec![0.3, -0.2], vec![1.0, 0.5], vec![-0.7, 0.1]];
    let rows: Vec<&[f64]> = topo.iter().map(Vec::as_slice).collect();
    let mut batch = Batch::new(&refs, &rows).unwrap();
    batch.labels = vec![0, 1, 1];
    let params = small_model(2, 2, 11);
    for mode in Mode::ALL {
        let cfg = ExperimentConfig { mode, alpha: 0.7, ..Default::default() };
        let f = |t: &mut Tape, v: &[topoclasp_core::autodiff::Var]| batch_loss(t, &params, v, &batch, &cfg).map(|x| x.0);
        let report = grad_check(f, &params.set, 1e-5, 1e-4);
        assert!(report.passed, "{mode}: {report:?}");
    }
}

fn toy_dataset() -> Dataset {
    // two classes: sparse vs dense random graphs
    let mut r = rng(42);
    let graphs: Vec<Graph> = (0..24)
        .map(|i| {
            let label = i % 2;
            let g = random_graph(&mut r, 6 + i % 4, if label == 0 { 0.25 } else { 0.6 });
            Graph::new(g.num_nodes(), g.edges().to_vec(), 0, vec![], label).unwrap()
        })
        .collect();
    degree_features(&Dataset::new("toy".into(), graphs, 2, 0).unwrap())
}

fn toy_config(mode: Mode) -> ExperimentConfig {
    ExperimentConfig {
        mode,
        hidden: 8,
        proj_dim: 4,
        epochs: 4,
        batch: 5,
        folds: 3,
        scales: 2,
        thresholds: 3,
        seed: 5,
        ..Default::default()
    }
}

#[test]
fn zero_weight_alignment_coincides_with_plain_fusion() {
    let data = toy_dataset();
    let cfg = toy_config(Mode::Tcl);
    let topo = topo_vectors(&data, &cfg.topo_config()).unwrap();
    let splits = stratified_kfold(&data.labels(), cfg.folds, cfg.seed).unwrap();
    for (fold, split) in splits.iter().enumerate() {
        let tcl = train_fold(&ExperimentConfig { alpha: 0.0, ..cfg.clone() }, &data, &topo, split, fold).unwrap();
        let concat = train_fold(&ExperimentConfig { mode: Mode::Concat, ..cfg.clone() }, &data, &topo, split, fold).unwrap();
        assert_eq!(tcl.accuracy, concat.accuracy);
        assert_eq!(tcl.losses, concat.losses);
        assert_eq!(tcl.params, concat.params);
        let aligned = train_fold(&cfg, &data, &topo, split, fold).unwrap();
        assert_ne!(aligned.losses, concat.losses);
    }
}

#[test]
fn topological_mode_ignores_structure() {
    let data = toy_dataset();
    let cfg = toy_config(Mode::Topo);
    let topo = topo_vectors(&data, &cfg.topo_config()).unwrap();
    // rewire every graph into a path; node features and topo vectors stay
    let rewired = Dataset::new(
        data.name.clone(),
        data.graphs
            .iter()
            .map(|g| {
                let edges = (1..g.num_nodes()).map(|v| (v - 1, v)).collect();
                Graph::new(g.num_nodes(), edges, g.d_in(), g.node_features().to_vec(), g.label()).unwrap()
            })
            .collect(),
        data.num_classes,
        data.d_in,
    )
    .unwrap();
    let split = &stratified_kfold(&data.labels(), 3, 1).unwrap()[0];
    let a = train_fold(&cfg, &data, &topo, split, 0).unwrap();
    let b = train_fold(&cfg, &rewired, &topo, split, 0).unwrap();
    assert_eq!(a.accuracy, b.accuracy);
    assert_eq!(a.losses, b.losses);
}

#[test]
fn standardizer_sees_training_rows_only() {
    let data = toy_dataset();
    let cfg = toy_config(Mode::Tcl);
    let topo = topo_vectors(&data, &cfg.topo_config()).unwrap();
    for (fold, split) in stratified_kfold(&data.labels(), 3, 0).unwrap().iter().enumerate() {
        let out = train_fold(&cfg, &data, &topo, split, fold).unwrap();
        let expected = Standardizer::fit(split.train.iter().map(|&i| topo[i].as_slice())).unwrap();
        assert_eq!(out.standardizer, expected);
        let with_test = Standardizer::fit(topo.iter().map(Vec::as_slice)).unwrap();
        assert_ne!(out.standardizer, with_test);
    }
}

#[test]
fn training_is_deterministic_and_records_each_epoch() {
    let data = toy_dataset();
    let cfg = toy_config(Mode::Tcl);
    let topo = topo_vectors(&data, &cfg.topo_config()).unwrap();
    let split = &stratified_kfold(&data.labels(), 3, 0).unwrap()[1];
    let a = train_fold(&cfg, &data, &topo, split, 1).unwrap();
    let b = train_fold(&cfg, &data, &topo, split, 1).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.losses.len(), cfg.epochs);
    assert!(a.losses.iter().all(|l| l.is_finite()));
    let one = train_fold(&ExperimentConfig { epochs: 1, ..cfg }, &data, &topo, split, 1).unwrap();
    assert_eq!(one.losses.len(), 1);
}

#[test]
fn topo_vectors_are_node_order_invariant() {
    use rand::seq::SliceRandom;
    let mut r = rng(8);
    for source in FiltrationSource::ALL {
        let cfg = topoclasp_core::vectorize::TopoConfig { source, ..Default::default() };
        for _ in 0..10 {
            let g = random_graph(&mut r, 9, 0.35);
            let mut perm: Vec<usize> = (0..9).collect();
            perm.shuffle(&mut r);
            let a = vectorize_graph(&g, &cfg).unwrap();
            let b = vectorize_graph(&g.relabel(&perm).unwrap(), &cfg).unwrap();
            assert_eq!(a.values.len(), cfg.layout().len());
            assert!(close(&a.values, &b.values, 1e-9), "{source}");
        }
    }
}
