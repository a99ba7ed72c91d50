use alloc::format;
use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;

use super::tensor::{gemm, Tensor};
use crate::math;
use crate::{Error, Result};

/// Denominator guard of [`Tape::l2_normalize`].
pub const L2_EPS: f64 = 1e-12;

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Symmetric adjacency lists in compressed form, used by [`Tape::neighbor_sum`].
#[derive(Debug, Clone, PartialEq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Adjacency {
    /// From undirected edges; each edge is stored in both directions.
    pub fn from_undirected(num_nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut degree = vec![0usize; num_nodes];
        for &(u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::Contract(format!("edge ({u}, {v}) outside {num_nodes} nodes")));
            }
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(num_nodes + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0; offsets[num_nodes]];
        for &(u, v) in edges {
            targets[fill[u]] = v;
            fill[u] += 1;
            targets[fill[v]] = u;
            fill[v] += 1;
        }
        Ok(Self { offsets, targets })
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Matmul(Var, Var),
    Transpose(Var),
    Add(Var, Var),
    Sub(Var, Var),
    AddRow(Var, Var),
    Relu(Var),
    Concat(Var, Var),
    SegmentMean { x: Var, segments: Rc<[usize]>, counts: Rc<[usize]> },
    L2Normalize(Var),
    ScalarMul(Var, f64),
    Scale(Var, Var),
    LogSumExpRows(Var),
    GatherRows { x: Var, index: Rc<[usize]> },
    SelectPerRow { x: Var, cols: Rc<[usize]> },
    Sum(Var),
    NeighborSum { x: Var, adjacency: Rc<Adjacency> },
}

#[derive(Debug, Clone)]
struct Node {
    value: Tensor,
    op: Op,
    needs_grad: bool,
}

/// Record of primitive operations for reverse-mode differentiation. A tape is
/// built per forward pass and discarded after [`Tape::backward`].
#[derive(Debug, Clone, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    #[cfg(any(test, feature = "fault-injection"))]
    relu_fault: bool,
}

/// Gradients of one backward pass, indexed by [`Var`].
#[derive(Debug, Clone)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// Gradient of `v`, or zeros of `shape` when nothing flowed into it.
    pub fn get_or_zeros(&self, v: Var, shape: [usize; 2]) -> Tensor {
        self.get(v).cloned().unwrap_or_else(|| Tensor::zeros(shape[0], shape[1]))
    }
}

fn shape_err(op: &str, a: [usize; 2], b: [usize; 2]) -> Error {
    Error::Contract(format!("{op}: incompatible shapes {a:?} and {b:?}"))
}

fn accumulate(grads: &mut [Option<Tensor>], v: Var, g: Tensor) {
    match &mut grads[v.0] {
        Some(acc) => acc.add_assign(&g),
        slot @ None => *slot = Some(g),
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Makes the relu backward rule deliberately wrong (scaled by 1.5); used
    /// to confirm that gradient checking catches a broken rule.
    #[cfg(any(test, feature = "fault-injection"))]
    pub fn inject_relu_fault(&mut self) {
        self.relu_fault = true;
    }

    fn push(&mut self, value: Tensor, op: Op, needs_grad: bool) -> Var {
        self.nodes.push(Node { value, op, needs_grad });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    /// A value that gradients do not flow into.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, false)
    }

    /// A trainable leaf.
    pub fn param(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, true)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> [usize; 2] {
        self.nodes[v.0].value.shape()
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa[1] != sb[0] {
            return Err(shape_err("matmul", sa, sb));
        }
        let mut out = Tensor::zeros(sa[0], sb[1]);
        gemm(sa[0], sa[1], sb[1], self.value(a).data(), false, self.value(b).data(), false, 0.0, out.data_mut());
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(out, Op::Matmul(a, b), ng))
    }

    pub fn transpose(&mut self, x: Var) -> Var {
        let out = self.value(x).transpose();
        let ng = self.needs(x);
        self.push(out, Op::Transpose(x), ng)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa != sb {
            return Err(shape_err("add", sa, sb));
        }
        let mut out = self.value(a).clone();
        out.add_assign(self.value(b));
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(out, Op::Add(a, b), ng))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa != sb {
            return Err(shape_err("sub", sa, sb));
        }
        let mut out = self.value(a).clone();
        for (o, &y) in out.data_mut().iter_mut().zip(self.value(b).data()) {
            *o -= y;
        }
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(out, Op::Sub(a, b), ng))
    }

    /// Adds a `1 × cols` row to every row of `x`.
    pub fn add_row(&mut self, x: Var, row: Var) -> Result<Var> {
        let (sx, sr) = (self.shape(x), self.shape(row));
        if sr != [1, sx[1]] {
            return Err(shape_err("add_row", sx, sr));
        }
        let mut out = self.value(x).clone();
        let bias = self.value(row).data();
        for r in 0..sx[0] {
            for (o, &b) in out.row_mut(r).iter_mut().zip(bias) {
                *o += b;
            }
        }
        let ng = self.needs(x) || self.needs(row);
        Ok(self.push(out, Op::AddRow(x, row), ng))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let mut out = self.value(x).clone();
        for v in out.data_mut() {
            if *v <= 0.0 {
                *v = 0.0;
            }
        }
        let ng = self.needs(x);
        self.push(out, Op::Relu(x), ng)
    }

    /// Column-wise concatenation `[a ‖ b]`.
    pub fn concat(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa[0] != sb[0] {
            return Err(shape_err("concat", sa, sb));
        }
        let cols = sa[1] + sb[1];
        let mut out = Tensor::zeros(sa[0], cols);
        for r in 0..sa[0] {
            out.row_mut(r)[..sa[1]].copy_from_slice(self.value(a).row(r));
            out.row_mut(r)[sa[1]..].copy_from_slice(self.value(b).row(r));
        }
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(out, Op::Concat(a, b), ng))
    }

    /// Mean of the rows sharing a segment id; output row `s` is segment `s`.
    pub fn segment_mean(&mut self, x: Var, segments: &[usize], num_segments: usize) -> Result<Var> {
        let sx = self.shape(x);
        if segments.len() != sx[0] {
            return Err(Error::Contract(format!(
                "segment_mean: {} segment ids for {} rows",
                segments.len(),
                sx[0]
            )));
        }
        let mut counts = vec![0usize; num_segments];
        for &s in segments {
            if s >= num_segments {
                return Err(Error::Contract(format!("segment id {s} >= {num_segments}")));
            }
            counts[s] += 1;
        }
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            return Err(Error::Contract(format!("segment {empty} has no rows")));
        }
        let mut out = Tensor::zeros(num_segments, sx[1]);
        let xv = self.value(x);
        for (r, &s) in segments.iter().enumerate() {
            let inv = 1.0 / counts[s] as f64;
            for (o, &v) in out.row_mut(s).iter_mut().zip(xv.row(r)) {
                *o += v * inv;
            }
        }
        let ng = self.needs(x);
        Ok(self.push(out, Op::SegmentMean { x, segments: segments.into(), counts: counts.into() }, ng))
    }

    /// Divides each row by `‖row‖₂ + L2_EPS`.
    pub fn l2_normalize(&mut self, x: Var) -> Var {
        let mut out = self.value(x).clone();
        for r in 0..out.rows() {
            let row = out.row_mut(r);
            let norm = math::sqrt(row.iter().map(|v| v * v).sum());
            let inv = 1.0 / (norm + L2_EPS);
            row.iter_mut().for_each(|v| *v *= inv);
        }
        let ng = self.needs(x);
        self.push(out, Op::L2Normalize(x), ng)
    }

    pub fn scalar_mul(&mut self, x: Var, c: f64) -> Var {
        let mut out = self.value(x).clone();
        out.data_mut().iter_mut().for_each(|v| *v *= c);
        let ng = self.needs(x);
        self.push(out, Op::ScalarMul(x, c), ng)
    }

    /// `s · x` for a `1 × 1` variable `s`.
    pub fn scale(&mut self, x: Var, s: Var) -> Result<Var> {
        if self.shape(s) != [1, 1] {
            return Err(shape_err("scale", self.shape(x), self.shape(s)));
        }
        let k = self.value(s).item();
        let mut out = self.value(x).clone();
        out.data_mut().iter_mut().for_each(|v| *v *= k);
        let ng = self.needs(x) || self.needs(s);
        Ok(self.push(out, Op::Scale(x, s), ng))
    }

    /// `log Σ_c exp(x[r, c])` per row, as a column.
    pub fn logsumexp_rows(&mut self, x: Var) -> Result<Var> {
        let sx = self.shape(x);
        if sx[1] == 0 {
            return Err(Error::Contract("logsumexp over zero columns".into()));
        }
        let xv = self.value(x);
        let mut out = Tensor::zeros(sx[0], 1);
        for r in 0..sx[0] {
            let row = xv.row(r);
            let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let s: f64 = row.iter().map(|&v| math::exp(v - m)).sum();
            out.set(r, 0, m + math::ln(s));
        }
        let ng = self.needs(x);
        Ok(self.push(out, Op::LogSumExpRows(x), ng))
    }

    /// Output row `i` is `x[index[i]]`.
    pub fn gather_rows(&mut self, x: Var, index: &[usize]) -> Result<Var> {
        let sx = self.shape(x);
        let mut out = Tensor::zeros(index.len(), sx[1]);
        for (i, &src) in index.iter().enumerate() {
            if src >= sx[0] {
                return Err(Error::Contract(format!("gather_rows: row {src} of {}", sx[0])));
            }
            out.row_mut(i).copy_from_slice(self.value(x).row(src));
        }
        let ng = self.needs(x);
        Ok(self.push(out, Op::GatherRows { x, index: index.into() }, ng))
    }

    /// Column of `x[r, cols[r]]`.
    pub fn select_per_row(&mut self, x: Var, cols: &[usize]) -> Result<Var> {
        let sx = self.shape(x);
        if cols.len() != sx[0] {
            return Err(Error::Contract(format!(
                "select_per_row: {} indices for {} rows",
                cols.len(),
                sx[0]
            )));
        }
        let mut out = Tensor::zeros(sx[0], 1);
        for (r, &c) in cols.iter().enumerate() {
            if c >= sx[1] {
                return Err(Error::Contract(format!("select_per_row: column {c} of {}", sx[1])));
            }
            out.set(r, 0, self.value(x).get(r, c));
        }
        let ng = self.needs(x);
        Ok(self.push(out, Op::SelectPerRow { x, cols: cols.into() }, ng))
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let s = self.value(x).data().iter().sum();
        let ng = self.needs(x);
        self.push(Tensor::scalar(s), Op::Sum(x), ng)
    }

    pub fn mean(&mut self, x: Var) -> Var {
        let n = self.value(x).len().max(1);
        let s = self.sum(x);
        self.scalar_mul(s, 1.0 / n as f64)
    }

    /// Row `v` of the output is the sum of the rows of `x` at `v`'s neighbours.
    pub fn neighbor_sum(&mut self, x: Var, adjacency: &Rc<Adjacency>) -> Result<Var> {
        let sx = self.shape(x);
        if adjacency.num_nodes() != sx[0] {
            return Err(Error::Contract(format!(
                "neighbor_sum: adjacency over {} nodes, input has {} rows",
                adjacency.num_nodes(),
                sx[0]
            )));
        }
        let out = neighbor_sum_values(self.value(x), adjacency);
        let ng = self.needs(x);
        Ok(self.push(out, Op::NeighborSum { x, adjacency: Rc::clone(adjacency) }, ng))
    }

    /// Reverse pass from a `1 × 1` output. Every use of a value contributes to
    /// its gradient exactly once.
    pub fn backward(&self, output: Var) -> Result<Gradients> {
        if self.shape(output) != [1, 1] {
            return Err(Error::Contract(format!(
                "backward needs a scalar output, got {:?}",
                self.shape(output)
            )));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[output.0] = Some(Tensor::scalar(1.0));
        for i in (0..=output.0).rev() {
            let node = &self.nodes[i];
            if !node.needs_grad {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            self.backward_node(node, &g, &mut grads);
            grads[i] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn backward_node(&self, node: &Node, g: &Tensor, grads: &mut [Option<Tensor>]) {
        match &node.op {
            Op::Leaf => {}
            &Op::Matmul(a, b) => {
                let (av, bv) = (self.value(a), self.value(b));
                let (m, p, q) = (av.rows(), av.cols(), bv.cols());
                if self.needs(a) {
                    let mut da = Tensor::zeros(m, p);
                    gemm(m, q, p, g.data(), false, bv.data(), true, 0.0, da.data_mut());
                    accumulate(grads, a, da);
                }
                if self.needs(b) {
                    let mut db = Tensor::zeros(p, q);
                    gemm(p, m, q, av.data(), true, g.data(), false, 0.0, db.data_mut());
                    accumulate(grads, b, db);
                }
            }
            &Op::Transpose(x) => accumulate(grads, x, g.transpose()),
            &Op::Add(a, b) => {
                if self.needs(a) {
                    accumulate(grads, a, g.clone());
                }
                if self.needs(b) {
                    accumulate(grads, b, g.clone());
                }
            }
            &Op::Sub(a, b) => {
                if self.needs(a) {
                    accumulate(grads, a, g.clone());
                }
                if self.needs(b) {
                    let mut neg = g.clone();
                    neg.data_mut().iter_mut().for_each(|v| *v = -*v);
                    accumulate(grads, b, neg);
                }
            }
            &Op::AddRow(x, row) => {
                if self.needs(x) {
                    accumulate(grads, x, g.clone());
                }
                if self.needs(row) {
                    let mut db = Tensor::zeros(1, g.cols());
                    for r in 0..g.rows() {
                        for (d, &v) in db.data_mut().iter_mut().zip(g.row(r)) {
                            *d += v;
                        }
                    }
                    accumulate(grads, row, db);
                }
            }
            &Op::Relu(x) => {
                #[cfg(any(test, feature = "fault-injection"))]
                let slope = if self.relu_fault { 1.5 } else { 1.0 };
                #[cfg(not(any(test, feature = "fault-injection")))]
                let slope = 1.0;
                let mut dx = g.clone();
                for (d, &v) in dx.data_mut().iter_mut().zip(self.value(x).data()) {
                    *d = if v > 0.0 { *d * slope } else { 0.0 };
                }
                accumulate(grads, x, dx);
            }
            &Op::Concat(a, b) => {
                let ca = self.value(a).cols();
                let cb = self.value(b).cols();
                if self.needs(a) {
                    let mut da = Tensor::zeros(g.rows(), ca);
                    for r in 0..g.rows() {
                        da.row_mut(r).copy_from_slice(&g.row(r)[..ca]);
                    }
                    accumulate(grads, a, da);
                }
                if self.needs(b) {
                    let mut db = Tensor::zeros(g.rows(), cb);
                    for r in 0..g.rows() {
                        db.row_mut(r).copy_from_slice(&g.row(r)[ca..]);
                    }
                    accumulate(grads, b, db);
                }
            }
            Op::SegmentMean { x, segments, counts } => {
                let mut dx = Tensor::zeros(segments.len(), g.cols());
                for (r, &s) in segments.iter().enumerate() {
                    let inv = 1.0 / counts[s] as f64;
                    for (d, &v) in dx.row_mut(r).iter_mut().zip(g.row(s)) {
                        *d = v * inv;
                    }
                }
                accumulate(grads, *x, dx);
            }
            &Op::L2Normalize(x) => {
                let xv = self.value(x);
                let mut dx = Tensor::zeros(xv.rows(), xv.cols());
                for r in 0..xv.rows() {
                    let row = xv.row(r);
                    let gr = g.row(r);
                    let norm = math::sqrt(row.iter().map(|v| v * v).sum());
                    let denom = norm + L2_EPS;
                    let radial = if norm > 0.0 {
                        row.iter().zip(gr).map(|(a, b)| a * b).sum::<f64>() / (norm * denom * denom)
                    } else {
                        0.0
                    };
                    for ((d, &xi), &gi) in dx.row_mut(r).iter_mut().zip(row).zip(gr) {
                        *d = gi / denom - xi * radial;
                    }
                }
                accumulate(grads, x, dx);
            }
            &Op::ScalarMul(x, c) => {
                let mut dx = g.clone();
                dx.data_mut().iter_mut().for_each(|v| *v *= c);
                accumulate(grads, x, dx);
            }
            &Op::Scale(x, s) => {
                let xv = self.value(x);
                if self.needs(x) {
                    let k = self.value(s).item();
                    let mut dx = g.clone();
                    dx.data_mut().iter_mut().for_each(|v| *v *= k);
                    accumulate(grads, x, dx);
                }
                if self.needs(s) {
                    let ds: f64 = g.data().iter().zip(xv.data()).map(|(a, b)| a * b).sum();
                    accumulate(grads, s, Tensor::scalar(ds));
                }
            }
            &Op::LogSumExpRows(x) => {
                let xv = self.value(x);
                let mut dx = Tensor::zeros(xv.rows(), xv.cols());
                for r in 0..xv.rows() {
                    let lse = node.value.get(r, 0);
                    let gr = g.get(r, 0);
                    for (d, &v) in dx.row_mut(r).iter_mut().zip(xv.row(r)) {
                        *d = gr * math::exp(v - lse);
                    }
                }
                accumulate(grads, x, dx);
            }
            Op::GatherRows { x, index } => {
                let [rows, cols] = self.shape(*x);
                let mut dx = Tensor::zeros(rows, cols);
                for (i, &src) in index.iter().enumerate() {
                    for (d, &v) in dx.row_mut(src).iter_mut().zip(g.row(i)) {
                        *d += v;
                    }
                }
                accumulate(grads, *x, dx);
            }
            Op::SelectPerRow { x, cols } => {
                let [rows, ncols] = self.shape(*x);
                let mut dx = Tensor::zeros(rows, ncols);
                for (r, &c) in cols.iter().enumerate() {
                    dx.set(r, c, g.get(r, 0));
                }
                accumulate(grads, *x, dx);
            }
            &Op::Sum(x) => {
                let [rows, cols] = self.shape(x);
                accumulate(grads, x, Tensor::filled(rows, cols, g.item()));
            }
            Op::NeighborSum { x, adjacency } => {
                // the adjacency is symmetric, so the transpose is itself
                accumulate(grads, *x, neighbor_sum_values(g, adjacency));
            }
        }
    }
}

fn neighbor_sum_values(x: &Tensor, adjacency: &Adjacency) -> Tensor {
    let mut out = Tensor::zeros(x.rows(), x.cols());
    for v in 0..x.rows() {
        for &u in adjacency.neighbors(v) {
            let src = x.row(u);
            for (o, &s) in out.row_mut(v).iter_mut().zip(src) {
                *o += s;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(rows: usize, cols: usize, data: &[f64]) -> Tensor {
        Tensor::from_vec(rows, cols, data.to_vec()).unwrap()
    }

    #[test]
    fn relu_subgradient() {
        let mut tape = Tape::new();
        let x = tape.param(t(1, 3, &[-1.0, 0.0, 2.0]));
        let y = tape.relu(x);
        let s = tape.sum(y);
        let g = tape.backward(s).unwrap();
        assert_eq!(g.get(x).unwrap().data(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn segment_mean_forward_backward() {
        let mut tape = Tape::new();
        let x = tape.param(t(2, 2, &[1.0, 2.0, 3.0, 6.0]));
        let m = tape.segment_mean(x, &[0, 0], 1).unwrap();
        assert_eq!(tape.value(m).data(), &[2.0, 4.0]);
        let s = tape.sum(m);
        let g = tape.backward(s).unwrap();
        assert_eq!(g.get(x).unwrap().data(), &[0.5; 4]);
    }

    #[test]
    fn segment_mean_rejects_empty_segment() {
        let mut tape = Tape::new();
        let x = tape.param(t(2, 1, &[1.0, 2.0]));
        assert!(tape.segment_mean(x, &[0, 0], 2).is_err());
    }

    #[test]
    fn l2_normalize_unit_row() {
        let mut tape = Tape::new();
        let x = tape.param(t(1, 2, &[0.6, 0.8]));
        let y = tape.l2_normalize(x);
        for (a, b) in tape.value(y).data().iter().zip([0.6, 0.8]) {
            assert!(math::abs(a - b) < 1e-11);
        }
        // d/dx of <y, x> at a unit row: radial component removed from x
        let w = tape.constant(t(1, 2, &[0.6, 0.8]));
        let wt = tape.transpose(w);
        let prod = tape.matmul(y, wt).unwrap();
        let g = tape.backward(prod).unwrap();
        for v in g.get(x).unwrap().data() {
            assert!(math::abs(*v) < 1e-11);
        }
    }

    #[test]
    fn shape_mismatch_is_contract_error() {
        let mut tape = Tape::new();
        let a = tape.constant(Tensor::zeros(2, 3));
        let b = tape.constant(Tensor::zeros(2, 3));
        assert!(matches!(tape.matmul(a, b), Err(Error::Contract(_))));
        let c = tape.constant(Tensor::zeros(3, 2));
        assert!(tape.add(a, c).is_err());
        assert!(tape.backward(a).is_err());
    }

    #[test]
    fn reused_value_accumulates() {
        // y = x·x summed twice through different paths
        let mut tape = Tape::new();
        let x = tape.param(Tensor::scalar(3.0));
        let y = tape.matmul(x, x).unwrap();
        let z = tape.add(y, x).unwrap();
        let g = tape.backward(z).unwrap();
        assert_eq!(g.get(x).unwrap().item(), 7.0);
    }

    #[test]
    fn constants_get_no_gradient() {
        let mut tape = Tape::new();
        let c = tape.constant(Tensor::scalar(2.0));
        let p = tape.param(Tensor::scalar(5.0));
        let y = tape.matmul(c, p).unwrap();
        let g = tape.backward(y).unwrap();
        assert!(g.get(c).is_none());
        assert_eq!(g.get(p).unwrap().item(), 2.0);
    }

    #[test]
    fn neighbor_sum_path() {
        let adj = Rc::new(Adjacency::from_undirected(3, &[(0, 1), (1, 2)]).unwrap());
        let mut tape = Tape::new();
        let x = tape.param(t(3, 1, &[1.0, 10.0, 100.0]));
        let y = tape.neighbor_sum(x, &adj).unwrap();
        assert_eq!(tape.value(y).data(), &[10.0, 101.0, 10.0]);
        let s = tape.sum(y);
        let g = tape.backward(s).unwrap();
        // each node contributes once per neighbour
        assert_eq!(g.get(x).unwrap().data(), &[1.0, 2.0, 1.0]);
    }
}
