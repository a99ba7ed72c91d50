//! The dual-view network: a GIN encoder for structure, an MLP encoder for the
//! topological vector, and a fusion head producing class logits and a
//! normalized projection.

use alloc::format;
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Adjacency, ParamSet, Tape, Tensor, Var};
use crate::graph::Graph;
use crate::{math, Error, Result};

/// Which branches feed the classifier, and whether the views are aligned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Topological MLP followed by the linear classifier.
    Topo,
    /// GIN followed by the linear classifier.
    Gnn,
    /// Fusion head on both views, classification loss only.
    Concat,
    /// Fusion head plus the cross-view contrastive term.
    Tcl,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Topo, Mode::Gnn, Mode::Concat, Mode::Tcl];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Topo => "topo",
            Mode::Gnn => "gnn",
            Mode::Concat => "concat",
            Mode::Tcl => "tcl",
        }
    }

    /// Row label used in ablation tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Mode::Topo => "Topo",
            Mode::Gnn => "GIN",
            Mode::Concat => "Topo-GIN",
            Mode::Tcl => "GraphTCL",
        }
    }

    pub fn uses_structure(self) -> bool {
        self != Mode::Topo
    }

    pub fn uses_topology(self) -> bool {
        self != Mode::Gnn
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown mode '{s}' (valid: topo, gnn, concat, tcl)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub d_in: usize,
    pub topo_dim: usize,
    pub hidden: usize,
    pub layers: usize,
    pub classes: usize,
    pub proj_dim: usize,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.layers == 0 || self.classes == 0 || self.proj_dim == 0 {
            return Err(Error::Config(format!("degenerate model dimensions {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct GinSlots {
    eps: usize,
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Slots {
    topo_w1: usize,
    topo_b1: usize,
    topo_w2: usize,
    topo_b2: usize,
    fusion_w: usize,
    fusion_b: usize,
    cls_w: usize,
    cls_b: usize,
    proj_w: usize,
}

/// All trainable tensors. Weights are stored `fan_in × fan_out` so layers are
/// `x · W + b` on row-major activations.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub set: ParamSet,
    gin: Vec<GinSlots>,
    slots: Slots,
}

fn expected_shapes(cfg: &ModelConfig) -> Vec<(String, [usize; 2])> {
    let h = cfg.hidden;
    let mut shapes = Vec::new();
    for k in 0..cfg.layers {
        let fan_in = if k == 0 { cfg.d_in } else { h };
        shapes.push((format!("gin{k}.eps"), [1, 1]));
        shapes.push((format!("gin{k}.w1"), [fan_in, h]));
        shapes.push((format!("gin{k}.b1"), [1, h]));
        shapes.push((format!("gin{k}.w2"), [h, h]));
        shapes.push((format!("gin{k}.b2"), [1, h]));
    }
    shapes.push(("topo.w1".into(), [cfg.topo_dim, h]));
    shapes.push(("topo.b1".into(), [1, h]));
    shapes.push(("topo.w2".into(), [h, h]));
    shapes.push(("topo.b2".into(), [1, h]));
    shapes.push(("fusion.w".into(), [2 * h, h]));
    shapes.push(("fusion.b".into(), [1, h]));
    shapes.push(("cls.w".into(), [h, cfg.classes]));
    shapes.push(("cls.b".into(), [1, cfg.classes]));
    shapes.push(("proj.w".into(), [h, cfg.proj_dim]));
    shapes
}

fn glorot(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Tensor {
    let bound = math::sqrt(6.0 / (rows + cols) as f64);
    let data = (0..rows * cols).map(|_| rng.random_range(-bound..bound)).collect();
    Tensor::from_vec(rows, cols, data).expect("sized from shape")
}

impl ModelParams {
    /// Glorot-uniform weights, zero biases, `ε = 0`.
    pub fn init(config: ModelConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        config.validate()?;
        let mut set = ParamSet::new();
        for (name, [r, c]) in expected_shapes(&config) {
            let is_weight = name.ends_with(".w") || name.ends_with(".w1") || name.ends_with(".w2");
            let t = if is_weight { glorot(rng, r, c) } else { Tensor::zeros(r, c) };
            set.push(name, t);
        }
        Self::from_set(config, set)
    }

    pub fn seeded(config: ModelConfig, seed: u64) -> Result<Self> {
        Self::init(config, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// Rebuilds the parameter layout from named tensors (e.g. a checkpoint).
    pub fn from_set(config: ModelConfig, set: ParamSet) -> Result<Self> {
        config.validate()?;
        let find = |name: &str, shape: [usize; 2]| -> Result<usize> {
            let i = set
                .position(name)
                .ok_or_else(|| Error::Contract(format!("missing parameter '{name}'")))?;
            if set.tensor(i).shape() != shape {
                return Err(Error::Contract(format!(
                    "parameter '{name}' has shape {:?}, expected {shape:?}",
                    set.tensor(i).shape()
                )));
            }
            Ok(i)
        };
        let shapes = expected_shapes(&config);
        if shapes.len() != set.len() {
            return Err(Error::Contract(format!(
                "{} parameter tensors, expected {}",
                set.len(),
                shapes.len()
            )));
        }
        let lookup = |name: &str| -> Result<usize> {
            let shape = shapes.iter().find(|(n, _)| n == name).map(|s| s.1).expect("known name");
            find(name, shape)
        };
        let mut gin = Vec::with_capacity(config.layers);
        for k in 0..config.layers {
            gin.push(GinSlots {
                eps: lookup(&format!("gin{k}.eps"))?,
                w1: lookup(&format!("gin{k}.w1"))?,
                b1: lookup(&format!("gin{k}.b1"))?,
                w2: lookup(&format!("gin{k}.w2"))?,
                b2: lookup(&format!("gin{k}.b2"))?,
            });
        }
        let slots = Slots {
            topo_w1: lookup("topo.w1")?,
            topo_b1: lookup("topo.b1")?,
            topo_w2: lookup("topo.w2")?,
            topo_b2: lookup("topo.b2")?,
            fusion_w: lookup("fusion.w")?,
            fusion_b: lookup("fusion.b")?,
            cls_w: lookup("cls.w")?,
            cls_b: lookup("cls.b")?,
            proj_w: lookup("proj.w")?,
        };
        Ok(Self { config, set, gin, slots })
    }

    /// Records the parameters on a tape; pass the result to the forward functions.
    pub fn register(&self, tape: &mut Tape) -> Vec<Var> {
        self.set.register(tape)
    }
}

/// A minibatch of graphs stacked into one disconnected graph.
#[derive(Debug, Clone)]
pub struct Batch {
    /// `[total nodes × d_in]`.
    pub features: Tensor,
    pub adjacency: Rc<Adjacency>,
    /// Graph id (0-based position in the batch) of every node.
    pub graph_ids: Vec<usize>,
    /// `[B × topo_dim]`, already standardized.
    pub topo: Tensor,
    pub labels: Vec<usize>,
}

impl Batch {
    pub fn new(graphs: &[&Graph], topo_rows: &[&[f64]]) -> Result<Self> {
        if graphs.is_empty() {
            return Err(Error::Contract("empty batch".into()));
        }
        if graphs.len() != topo_rows.len() {
            return Err(Error::Contract(format!(
                "{} graphs but {} topological vectors",
                graphs.len(),
                topo_rows.len()
            )));
        }
        let d_in = graphs[0].d_in();
        let topo_dim = topo_rows[0].len();
        let total: usize = graphs.iter().map(|g| g.num_nodes()).sum();
        let mut features = Vec::with_capacity(total * d_in);
        let mut edges = Vec::new();
        let mut graph_ids = Vec::with_capacity(total);
        let mut topo = Vec::with_capacity(graphs.len() * topo_dim);
        let mut offset = 0;
        for (b, (g, t)) in graphs.iter().zip(topo_rows).enumerate() {
            if g.num_nodes() == 0 {
                return Err(Error::Contract(format!("graph {b} of the batch has no nodes")));
            }
            if g.d_in() != d_in || t.len() != topo_dim {
                return Err(Error::Contract("batch members disagree on feature widths".into()));
            }
            features.extend_from_slice(g.node_features());
            edges.extend(g.edges().iter().map(|&(u, v)| (u + offset, v + offset)));
            graph_ids.extend(core::iter::repeat_n(b, g.num_nodes()));
            topo.extend_from_slice(t);
            offset += g.num_nodes();
        }
        Ok(Self {
            features: Tensor::from_vec(total, d_in, features)?,
            adjacency: Rc::new(Adjacency::from_undirected(total, &edges)?),
            graph_ids,
            topo: Tensor::from_vec(graphs.len(), topo_dim, topo)?,
            labels: graphs.iter().map(|g| g.label()).collect(),
        })
    }

    pub fn num_graphs(&self) -> usize {
        self.labels.len()
    }
}

fn linear(tape: &mut Tape, x: Var, w: Var, b: Var) -> Result<Var> {
    let xw = tape.matmul(x, w)?;
    tape.add_row(xw, b)
}

/// GIN layers `h ← MLP((1 + ε) h + Σ_neighbours h)` with a two-layer relu MLP,
/// then mean pooling per graph. Returns `[B × hidden]`.
pub fn gin_forward(tape: &mut Tape, params: &ModelParams, vars: &[Var], batch: &Batch) -> Result<Var> {
    let mut h = tape.constant(batch.features.clone());
    for slots in &params.gin {
        let scaled = tape.scale(h, vars[slots.eps])?;
        let self_term = tape.add(h, scaled)?;
        let neighbours = tape.neighbor_sum(h, &batch.adjacency)?;
        let agg = tape.add(self_term, neighbours)?;
        let hidden = linear(tape, agg, vars[slots.w1], vars[slots.b1])?;
        let hidden = tape.relu(hidden);
        let out = linear(tape, hidden, vars[slots.w2], vars[slots.b2])?;
        h = tape.relu(out);
    }
    tape.segment_mean(h, &batch.graph_ids, batch.num_graphs())
}

/// Linear → relu → linear on the standardized topological vectors.
pub fn topo_forward(tape: &mut Tape, params: &ModelParams, vars: &[Var], batch: &Batch) -> Result<Var> {
    let s = &params.slots;
    let t = tape.constant(batch.topo.clone());
    let hidden = linear(tape, t, vars[s.topo_w1], vars[s.topo_b1])?;
    let hidden = tape.relu(hidden);
    linear(tape, hidden, vars[s.topo_w2], vars[s.topo_b2])
}

/// Logits from a single embedding through the shared linear classifier.
pub fn classify(tape: &mut Tape, params: &ModelParams, vars: &[Var], embedding: Var) -> Result<Var> {
    linear(tape, embedding, vars[params.slots.cls_w], vars[params.slots.cls_b])
}

/// `l2_normalize(x · W_proj)`.
pub fn project(tape: &mut Tape, params: &ModelParams, vars: &[Var], x: Var) -> Result<Var> {
    let p = tape.matmul(x, vars[params.slots.proj_w])?;
    Ok(tape.l2_normalize(p))
}

#[derive(Debug, Clone, Copy)]
pub struct FusionOutput {
    pub logits: Var,
    pub fused: Var,
    pub projection: Var,
}

/// `f = relu([z ‖ u] W + b)`, `logits = f W_c + b_c`, `p = l2_normalize(f W_p)`.
pub fn fuse_and_classify(tape: &mut Tape, params: &ModelParams, vars: &[Var], z: Var, u: Var) -> Result<FusionOutput> {
    if tape.shape(z) != tape.shape(u) {
        return Err(Error::Contract(format!(
            "views differ in shape: {:?} vs {:?}",
            tape.shape(z),
            tape.shape(u)
        )));
    }
    let s = &params.slots;
    let joined = tape.concat(z, u)?;
    let fused = linear(tape, joined, vars[s.fusion_w], vars[s.fusion_b])?;
    let fused = tape.relu(fused);
    let logits = classify(tape, params, vars, fused)?;
    let projection = project(tape, params, vars, fused)?;
    Ok(FusionOutput { logits, fused, projection })
}

/// Variables produced by one forward pass in a given mode.
#[derive(Debug, Clone, Copy)]
pub struct ForwardOutput {
    pub logits: Var,
    pub structural: Option<Var>,
    pub topological: Option<Var>,
    pub fusion: Option<FusionOutput>,
}

pub fn forward(tape: &mut Tape, params: &ModelParams, vars: &[Var], batch: &Batch, mode: Mode) -> Result<ForwardOutput> {
    let z = if mode.uses_structure() { Some(gin_forward(tape, params, vars, batch)?) } else { None };
    let u = if mode.uses_topology() { Some(topo_forward(tape, params, vars, batch)?) } else { None };
    match (z, u) {
        (Some(z), Some(u)) => {
            let fusion = fuse_and_classify(tape, params, vars, z, u)?;
            Ok(ForwardOutput { logits: fusion.logits, structural: Some(z), topological: Some(u), fusion: Some(fusion) })
        }
        (Some(z), None) => {
            let logits = classify(tape, params, vars, z)?;
            Ok(ForwardOutput { logits, structural: Some(z), topological: None, fusion: None })
        }
        (None, Some(u)) => {
            let logits = classify(tape, params, vars, u)?;
            Ok(ForwardOutput { logits, structural: None, topological: Some(u), fusion: None })
        }
        (None, None) => unreachable!("every mode uses at least one view"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cfg(d_in: usize, topo_dim: usize) -> ModelConfig {
        ModelConfig { d_in, topo_dim, hidden: 6, layers: 2, classes: 3, proj_dim: 4 }
    }

    fn one_node(x: f64) -> Graph {
        Graph::new(1, vec![], 1, vec![x], 0).unwrap()
    }

    #[test]
    fn parameter_layout() {
        let p = ModelParams::seeded(cfg(2, 5), 1).unwrap();
        assert_eq!(p.set.len(), 2 * 5 + 9);
        assert_eq!(p.set.get("gin0.w1").unwrap().shape(), [2, 6]);
        assert_eq!(p.set.get("gin1.w1").unwrap().shape(), [6, 6]);
        assert_eq!(p.set.get("fusion.w").unwrap().shape(), [12, 6]);
        assert_eq!(p.set.get("gin1.eps").unwrap().item(), 0.0);
        let rebuilt = ModelParams::from_set(p.config, p.set.clone()).unwrap();
        assert_eq!(rebuilt, p);
        assert!(ModelParams::from_set(cfg(3, 5), p.set.clone()).is_err());
    }

    #[test]
    fn single_node_gin_with_identity_mlp() {
        // d_in = hidden = 1, identity weights: output is relu(relu(x)) per layer
        let config = ModelConfig { d_in: 1, topo_dim: 1, hidden: 1, layers: 1, classes: 2, proj_dim: 1 };
        let mut p = ModelParams::seeded(config, 0).unwrap();
        for name in ["gin0.w1", "gin0.w2"] {
            let i = p.set.position(name).unwrap();
            *p.set.tensor_mut(i) = Tensor::scalar(1.0);
        }
        for x in [2.5, -1.0] {
            let g = one_node(x);
            let batch = Batch::new(&[&g], &[&[0.0]]).unwrap();
            let mut tape = Tape::new();
            let vars = p.register(&mut tape);
            let z = gin_forward(&mut tape, &p, &vars, &batch).unwrap();
            assert_eq!(tape.value(z).item(), x.max(0.0));
        }
    }

    #[test]
    fn isomorphic_graphs_embed_identically() {
        let p = ModelParams::seeded(cfg(2, 3), 7).unwrap();
        let a = Graph::new(3, vec![(0, 1), (1, 2)], 2, vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.0], 0).unwrap();
        let b = a.relabel(&[2, 0, 1]).unwrap();
        let topo = [0.1, -0.2, 0.3];
        let batch = Batch::new(&[&a, &b], &[&topo, &topo]).unwrap();
        let mut tape = Tape::new();
        let vars = p.register(&mut tape);
        let z = gin_forward(&mut tape, &p, &vars, &batch).unwrap();
        let zv = tape.value(z);
        for (x, y) in zv.row(0).iter().zip(zv.row(1)) {
            assert!(math::abs(x - y) < 1e-12);
        }
    }

    #[test]
    fn zero_fusion_weights_give_uniform_logits() {
        let mut p = ModelParams::seeded(cfg(1, 2), 3).unwrap();
        for name in ["cls.w", "cls.b"] {
            let i = p.set.position(name).unwrap();
            let shape = p.set.tensor(i).shape();
            *p.set.tensor_mut(i) = Tensor::zeros(shape[0], shape[1]);
        }
        let g = one_node(1.0);
        let batch = Batch::new(&[&g], &[&[1.0, 2.0]]).unwrap();
        let mut tape = Tape::new();
        let vars = p.register(&mut tape);
        let out = forward(&mut tape, &p, &vars, &batch, Mode::Concat).unwrap();
        let logits = tape.value(out.logits);
        assert!(logits.data().iter().all(|&x| x == logits.data()[0]));
        let proj = tape.value(out.fusion.unwrap().projection);
        let norm: f64 = proj.row(0).iter().map(|x| x * x).sum();
        assert!(norm == 0.0 || math::abs(math::sqrt(norm) - 1.0) < 1e-9);
    }

    #[test]
    fn topo_forward_zero_input_zero_bias() {
        let p = ModelParams::seeded(cfg(1, 4), 5).unwrap();
        let g = one_node(0.0);
        let batch = Batch::new(&[&g], &[&[0.0; 4]]).unwrap();
        let mut tape = Tape::new();
        let vars = p.register(&mut tape);
        let u = topo_forward(&mut tape, &p, &vars, &batch).unwrap();
        assert!(tape.value(u).data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn batch_rejects_empty_graph() {
        let empty = Graph::new(0, vec![], 1, vec![], 0).unwrap();
        assert!(matches!(Batch::new(&[&empty], &[&[0.0]]), Err(Error::Contract(_))));
        assert!(Batch::new(&[], &[]).is_err());
    }

    #[test]
    fn mode_names_round_trip() {
        for m in Mode::ALL {
            assert_eq!(m.name().parse::<Mode>().unwrap(), m);
        }
        assert!("gcn".parse::<Mode>().is_err());
    }
}
