//! Cross-validated training: fold splitting, per-fold standardization,
//! minibatch Adam, evaluation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{adam_step, AdamConfig, AdamState, Tape, Tensor, Var};
use crate::graph::{degree_features, Dataset, Graph};
use crate::loss::{cross_entropy, info_nce, ContrastOn};
use crate::model::{forward, project, Batch, ModelConfig, ModelParams, Mode};
use crate::vectorize::{vectorize_graph, FiltrationSource, Standardizer, TopoConfig};
use crate::{math, Error, Result};

/// Every knob of one cross-validated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset_dir: String,
    pub dataset: String,
    pub mode: Mode,
    pub filtration: FiltrationSource,
    pub seed: u64,
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub alpha: f64,
    pub tau: f64,
    pub hidden: usize,
    pub layers: usize,
    pub proj_dim: usize,
    pub contrast_on: ContrastOn,
    pub folds: usize,
    pub scales: usize,
    pub thresholds: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let topo = TopoConfig::default();
        Self {
            dataset_dir: "data".into(),
            dataset: "MUTAG".into(),
            mode: Mode::Tcl,
            filtration: topo.source,
            seed: 0,
            epochs: 100,
            batch: 32,
            lr: 1e-3,
            alpha: 0.1,
            tau: 0.5,
            hidden: 128,
            layers: 3,
            proj_dim: 64,
            contrast_on: ContrastOn::Zu,
            folds: 10,
            scales: topo.scales,
            thresholds: topo.thresholds,
            t_min: topo.t_min,
            t_max: topo.t_max,
            jobs: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn topo_config(&self) -> TopoConfig {
        TopoConfig {
            source: self.filtration,
            scales: self.scales,
            thresholds: self.thresholds,
            t_min: self.t_min,
            t_max: self.t_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.folds < 2 {
            return bad(format!("folds must be at least 2, got {}", self.folds));
        }
        if self.epochs == 0 || self.batch == 0 {
            return bad("epochs and batch must be positive".into());
        }
        if self.hidden == 0 || self.layers == 0 || self.proj_dim == 0 {
            return bad("hidden, layers and proj_dim must be positive".into());
        }
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return bad(format!("learning rate must be positive, got {}", self.lr));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return bad(format!("alpha must be non-negative, got {}", self.alpha));
        }
        if self.jobs == 0 {
            return bad("jobs must be at least 1".into());
        }
        self.topo_config().validate()
    }

    pub fn model_config(&self, dataset: &Dataset, topo_dim: usize) -> ModelConfig {
        ModelConfig {
            d_in: dataset.d_in,
            topo_dim,
            hidden: self.hidden,
            layers: self.layers,
            classes: dataset.num_classes,
            proj_dim: self.proj_dim,
        }
    }
}

/// Node inputs for the structural encoder: the dataset's own features, or
/// one-hot degrees when it has none.
pub fn prepare_inputs(dataset: &Dataset) -> Dataset {
    if dataset.d_in == 0 {
        degree_features(dataset)
    } else {
        dataset.clone()
    }
}

/// Raw (unstandardized) topological vector of every graph, in dataset order.
pub fn topo_vectors(dataset: &Dataset, cfg: &TopoConfig) -> Result<Vec<Vec<f64>>> {
    dataset
        .graphs
        .iter()
        .enumerate()
        .map(|(i, g)| {
            vectorize_graph(g, cfg)
                .map(|v| v.values)
                .map_err(|e| Error::Contract(format!("graph {i}: {e}")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified k-fold split: each class is shuffled, classes are concatenated
/// in label order and position `i` goes to fold `i mod k`. Falls back to a
/// plain shuffled k-fold when some class has fewer than `k` members.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    if k > labels.len() {
        return Err(Error::Config(format!("{k} folds for {} graphs", labels.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let num_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = (0..num_classes).map(|_| Vec::new()).collect();
    for (i, &y) in labels.iter().enumerate() {
        by_class[y].push(i);
    }
    let order: Vec<usize> = if by_class.iter().any(|c| !c.is_empty() && c.len() < k) {
        log::warn!("a class has fewer than {k} graphs; using unstratified folds");
        let mut all: Vec<usize> = (0..labels.len()).collect();
        all.shuffle(&mut rng);
        all
    } else {
        by_class
            .into_iter()
            .flat_map(|mut members| {
                members.shuffle(&mut rng);
                members
            })
            .collect()
    };
    let mut tests: Vec<Vec<usize>> = (0..k).map(|_| Vec::new()).collect();
    for (pos, &idx) in order.iter().enumerate() {
        tests[pos % k].push(idx);
    }
    Ok(tests
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let train = (0..labels.len()).filter(|i| test.binary_search(i).is_err()).collect();
            FoldSplit { train, test }
        })
        .collect())
}

/// Builds the training objective for one batch; returns `(loss, logits)`.
pub fn batch_loss(tape: &mut Tape, params: &ModelParams, vars: &[Var], batch: &Batch, cfg: &ExperimentConfig) -> Result<(Var, Var)> {
    let out = forward(tape, params, vars, batch, cfg.mode)?;
    let ce = cross_entropy(tape, out.logits, &batch.labels)?;
    if cfg.mode != Mode::Tcl {
        return Ok((ce, out.logits));
    }
    let (mut z, mut u) = (out.structural.expect("tcl uses both views"), out.topological.expect("tcl uses both views"));
    if cfg.contrast_on == ContrastOn::Proj {
        z = project(tape, params, vars, z)?;
        u = project(tape, params, vars, u)?;
    }
    let con = info_nce(tape, z, u, cfg.tau)?;
    let weighted = tape.scalar_mul(con, cfg.alpha);
    Ok((tape.add(ce, weighted)?, out.logits))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub fold: usize,
    pub accuracy: f64,
    /// Mean training loss of every epoch.
    pub losses: Vec<f64>,
    pub standardizer: Standardizer,
    pub params: ModelParams,
}

fn make_batch(dataset: &Dataset, topo: &[Vec<f64>], idx: &[usize]) -> Result<Batch> {
    let graphs: Vec<&Graph> = idx.iter().map(|&i| &dataset.graphs[i]).collect();
    let rows: Vec<&[f64]> = idx.iter().map(|&i| topo[i].as_slice()).collect();
    Batch::new(&graphs, &rows)
}

/// Predicted class of each listed graph.
pub fn predict(params: &ModelParams, dataset: &Dataset, topo: &[Vec<f64>], idx: &[usize], mode: Mode, batch: usize) -> Result<Vec<usize>> {
    let mut preds = Vec::with_capacity(idx.len());
    for chunk in idx.chunks(batch.max(1)) {
        let b = make_batch(dataset, topo, chunk)?;
        let mut tape = Tape::new();
        let vars = params.register(&mut tape);
        let out = forward(&mut tape, params, &vars, &b, mode)?;
        preds.extend(tape.value(out.logits).argmax_rows());
    }
    Ok(preds)
}

/// Trains a fresh model on `split.train` and scores it on `split.test`.
/// `raw_topo` holds unstandardized vectors for the whole dataset; the
/// standardizer is fitted on the training rows only.
pub fn train_fold(cfg: &ExperimentConfig, dataset: &Dataset, raw_topo: &[Vec<f64>], split: &FoldSplit, fold: usize) -> Result<FoldOutcome> {
    cfg.validate()?;
    if split.train.is_empty() || split.test.is_empty() {
        return Err(Error::Config(format!("fold {fold} has an empty train or test set")));
    }
    if raw_topo.len() != dataset.len() {
        return Err(Error::Contract(format!("{} topological vectors for {} graphs", raw_topo.len(), dataset.len())));
    }
    let standardizer = Standardizer::fit(split.train.iter().map(|&i| raw_topo[i].as_slice()))?;
    let topo: Vec<Vec<f64>> = raw_topo.iter().map(|r| standardizer.apply(r)).collect();
    let topo_dim = topo.first().map_or(0, Vec::len);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(fold as u64));
    let mut params = ModelParams::init(cfg.model_config(dataset, topo_dim), &mut rng)?;
    let adam = AdamConfig::with_lr(cfg.lr);
    let mut state = AdamState::new(&params.set);
    let mut order = split.train.clone();
    let mut losses = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut steps = 0usize;
        for chunk in order.chunks(cfg.batch) {
            let batch = make_batch(dataset, &topo, chunk)?;
            let mut tape = Tape::new();
            let vars = params.register(&mut tape);
            let (loss, _) = batch_loss(&mut tape, &params, &vars, &batch, cfg)?;
            let value = tape.value(loss).item();
            if !value.is_finite() {
                return Err(Error::TrainingAborted(format!(
                    "fold {fold}, epoch {epoch}, step {steps}: loss is {value}"
                )));
            }
            let grads = tape.backward(loss)?;
            let grads: Vec<Tensor> = params
                .set
                .entries()
                .iter()
                .zip(&vars)
                .map(|(e, &v)| grads.get_or_zeros(v, e.tensor.shape()))
                .collect();
            adam_step(&mut params.set, &grads, &mut state, &adam)?;
            total += value;
            steps += 1;
        }
        losses.push(total / steps as f64);
    }

    let preds = predict(&params, dataset, &topo, &split.test, cfg.mode, cfg.batch)?;
    let correct = preds.iter().zip(&split.test).filter(|(&p, &i)| p == dataset.graphs[i].label()).count();
    Ok(FoldOutcome {
        fold,
        accuracy: correct as f64 / split.test.len() as f64,
        losses,
        standardizer,
        params,
    })
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, math::sqrt(var))
}

/// Runs every fold in sequence on prepared inputs.
pub fn cross_validate(cfg: &ExperimentConfig, dataset: &Dataset, raw_topo: &[Vec<f64>]) -> Result<Vec<FoldOutcome>> {
    cfg.validate()?;
    let splits = stratified_kfold(&dataset.labels(), cfg.folds, cfg.seed)?;
    splits
        .iter()
        .enumerate()
        .map(|(fold, split)| train_fold(cfg, dataset, raw_topo, split, fold))
        .collect()
}
