use std::collections::HashMap;

use crate::error::{DmgError, Result};
use crate::numcore::tensor::{ParamStore, Tensor};

pub type NodeId = usize;

/// Numerically stable softmax of a nonempty slice.
pub fn softmax(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(DmgError::invalid("softmax of empty input"));
    }
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = xs.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.iter().map(|e| e / sum).collect())
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(NodeId, NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    Sigmoid(NodeId),
    Tanh(NodeId),
    SoftmaxRows(NodeId),
    LogSoftmaxRows(NodeId),
    ConcatCols(Vec<NodeId>),
    ConcatRows(Vec<NodeId>),
    BroadcastRows(NodeId, usize),
    Transpose(NodeId),
    Row(NodeId, usize),
    SliceCols(NodeId, usize, usize),
    MeanRows(NodeId),
    Pick(NodeId, usize, usize),
}

#[derive(Debug, Clone)]
struct Node {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    op: Op,
}

/// Records primitive ops in topological order; `backward` replays them in
/// reverse, accumulating gradients additively at fan-out points.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    param_nodes: HashMap<usize, NodeId>,
}

/// Gradients for every parameter leaf touched by a tape.
#[derive(Debug)]
pub struct Grads {
    by_param: HashMap<usize, Tensor>,
}

impl Grads {
    /// Gradient for a parameter; untouched parameters get zeros.
    pub fn get(&self, store: &ParamStore, idx: usize) -> Tensor {
        self.by_param
            .get(&idx)
            .cloned()
            .unwrap_or_else(|| Tensor::zeros(store.get(idx).shape.clone()))
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, rows: usize, cols: usize, data: Vec<f64>, op: Op) -> NodeId {
        self.nodes.push(Node { rows, cols, data, op });
        self.nodes.len() - 1
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        &self.nodes[id].data
    }

    pub fn dims(&self, id: NodeId) -> (usize, usize) {
        (self.nodes[id].rows, self.nodes[id].cols)
    }

    pub fn leaf(&mut self, t: &Tensor) -> NodeId {
        let (r, c) = t.dims2();
        self.push(r, c, t.data.clone(), Op::Leaf)
    }

    pub fn scalar(&mut self, v: f64) -> NodeId {
        self.push(1, 1, vec![v], Op::Leaf)
    }

    /// Leaf node for a parameter. Re-loading the same parameter returns the
    /// same node so fan-out gradients accumulate in one place.
    pub fn param(&mut self, store: &ParamStore, idx: usize) -> NodeId {
        if let Some(&id) = self.param_nodes.get(&idx) {
            return id;
        }
        let t = store.get(idx);
        let (r, c) = t.dims2();
        let id = self.push(r, c, t.data.clone(), Op::Leaf);
        self.param_nodes.insert(idx, id);
        id
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (m, ka) = self.dims(a);
        let (kb, n) = self.dims(b);
        if ka != kb {
            return Err(DmgError::ShapeMismatch {
                op: "matmul",
                lhs: vec![m, ka],
                rhs: vec![kb, n],
            });
        }
        let mut out = vec![0.0; m * n];
        {
            let av = &self.nodes[a].data;
            let bv = &self.nodes[b].data;
            for i in 0..m {
                for k in 0..ka {
                    let aik = av[i * ka + k];
                    if aik == 0.0 {
                        continue;
                    }
                    let brow = &bv[k * n..(k + 1) * n];
                    let orow = &mut out[i * n..(i + 1) * n];
                    for j in 0..n {
                        orow[j] += aik * brow[j];
                    }
                }
            }
        }
        Ok(self.push(m, n, out, Op::MatMul(a, b)))
    }

    fn binary(&mut self, op: &'static str, a: NodeId, b: NodeId) -> Result<(usize, usize)> {
        let da = self.dims(a);
        let db = self.dims(b);
        if da != db {
            return Err(DmgError::ShapeMismatch {
                op,
                lhs: vec![da.0, da.1],
                rhs: vec![db.0, db.1],
            });
        }
        Ok(da)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (r, c) = self.binary("add", a, b)?;
        let data = self.nodes[a]
            .data
            .iter()
            .zip(&self.nodes[b].data)
            .map(|(x, y)| x + y)
            .collect();
        Ok(self.push(r, c, data, Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (r, c) = self.binary("sub", a, b)?;
        let data = self.nodes[a]
            .data
            .iter()
            .zip(&self.nodes[b].data)
            .map(|(x, y)| x - y)
            .collect();
        Ok(self.push(r, c, data, Op::Sub(a, b)))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (r, c) = self.binary("mul", a, b)?;
        let data = self.nodes[a]
            .data
            .iter()
            .zip(&self.nodes[b].data)
            .map(|(x, y)| x * y)
            .collect();
        Ok(self.push(r, c, data, Op::Mul(a, b)))
    }

    pub fn scale(&mut self, a: NodeId, c: f64) -> NodeId {
        let (r, cl) = self.dims(a);
        let data = self.nodes[a].data.iter().map(|x| x * c).collect();
        self.push(r, cl, data, Op::Scale(a, c))
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        let (r, c) = self.dims(a);
        let data = self.nodes[a]
            .data
            .iter()
            .map(|x| 1.0 / (1.0 + (-x).exp()))
            .collect();
        self.push(r, c, data, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        let (r, c) = self.dims(a);
        let data = self.nodes[a].data.iter().map(|x| x.tanh()).collect();
        self.push(r, c, data, Op::Tanh(a))
    }

    pub fn softmax_rows(&mut self, a: NodeId) -> Result<NodeId> {
        let (r, c) = self.dims(a);
        let mut data = Vec::with_capacity(r * c);
        for i in 0..r {
            data.extend(softmax(&self.nodes[a].data[i * c..(i + 1) * c])?);
        }
        Ok(self.push(r, c, data, Op::SoftmaxRows(a)))
    }

    pub fn log_softmax_rows(&mut self, a: NodeId) -> Result<NodeId> {
        let (r, c) = self.dims(a);
        let mut data = Vec::with_capacity(r * c);
        for i in 0..r {
            let row = &self.nodes[a].data[i * c..(i + 1) * c];
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if row.is_empty() {
                return Err(DmgError::invalid("log_softmax of empty row"));
            }
            let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            data.extend(row.iter().map(|v| v - lse));
        }
        Ok(self.push(r, c, data, Op::LogSoftmaxRows(a)))
    }

    /// Concatenate along columns; all inputs must share a row count.
    pub fn concat_cols(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        if parts.is_empty() {
            return Err(DmgError::invalid("concat_cols of nothing"));
        }
        let r = self.dims(parts[0]).0;
        let mut total = 0;
        for &p in parts {
            let (pr, pc) = self.dims(p);
            if pr != r {
                return Err(DmgError::ShapeMismatch {
                    op: "concat_cols",
                    lhs: vec![r],
                    rhs: vec![pr],
                });
            }
            total += pc;
        }
        let mut data = Vec::with_capacity(r * total);
        for i in 0..r {
            for &p in parts {
                let c = self.dims(p).1;
                data.extend_from_slice(&self.nodes[p].data[i * c..(i + 1) * c]);
            }
        }
        Ok(self.push(r, total, data, Op::ConcatCols(parts.to_vec())))
    }

    /// Stack along rows; all inputs must share a column count.
    pub fn concat_rows(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        if parts.is_empty() {
            return Err(DmgError::invalid("concat_rows of nothing"));
        }
        let c = self.dims(parts[0]).1;
        let mut rows = 0;
        let mut data = Vec::new();
        for &p in parts {
            let (pr, pc) = self.dims(p);
            if pc != c {
                return Err(DmgError::ShapeMismatch {
                    op: "concat_rows",
                    lhs: vec![c],
                    rhs: vec![pc],
                });
            }
            rows += pr;
            data.extend_from_slice(&self.nodes[p].data);
        }
        Ok(self.push(rows, c, data, Op::ConcatRows(parts.to_vec())))
    }

    /// Repeat a single-row node `n` times.
    pub fn broadcast_rows(&mut self, a: NodeId, n: usize) -> Result<NodeId> {
        let (r, c) = self.dims(a);
        if r != 1 {
            return Err(DmgError::invalid("broadcast_rows needs a single row"));
        }
        let mut data = Vec::with_capacity(n * c);
        for _ in 0..n {
            data.extend_from_slice(&self.nodes[a].data);
        }
        Ok(self.push(n, c, data, Op::BroadcastRows(a, n)))
    }

    pub fn transpose(&mut self, a: NodeId) -> NodeId {
        let (r, c) = self.dims(a);
        let mut data = vec![0.0; r * c];
        for i in 0..r {
            for j in 0..c {
                data[j * r + i] = self.nodes[a].data[i * c + j];
            }
        }
        self.push(c, r, data, Op::Transpose(a))
    }

    pub fn row(&mut self, a: NodeId, i: usize) -> Result<NodeId> {
        let (r, c) = self.dims(a);
        if i >= r {
            return Err(DmgError::invalid(format!("row {i} out of {r}")));
        }
        let data = self.nodes[a].data[i * c..(i + 1) * c].to_vec();
        Ok(self.push(1, c, data, Op::Row(a, i)))
    }

    pub fn slice_cols(&mut self, a: NodeId, start: usize, len: usize) -> Result<NodeId> {
        let (r, c) = self.dims(a);
        if start + len > c {
            return Err(DmgError::invalid(format!(
                "slice_cols {start}..{} out of {c}",
                start + len
            )));
        }
        let mut data = Vec::with_capacity(r * len);
        for i in 0..r {
            data.extend_from_slice(&self.nodes[a].data[i * c + start..i * c + start + len]);
        }
        Ok(self.push(r, len, data, Op::SliceCols(a, start, len)))
    }

    /// Column-wise mean over rows, yielding a single row.
    pub fn mean_rows(&mut self, a: NodeId) -> Result<NodeId> {
        let (r, c) = self.dims(a);
        if r == 0 {
            return Err(DmgError::invalid("mean_rows of empty"));
        }
        // Each column is summed in value order so the result is bit-identical
        // under any permutation of the rows.
        let mut data = vec![0.0; c];
        let mut col = vec![0.0; r];
        for (j, out) in data.iter_mut().enumerate() {
            for i in 0..r {
                col[i] = self.nodes[a].data[i * c + j];
            }
            col.sort_by(f64::total_cmp);
            *out = col.iter().sum::<f64>() / r as f64;
        }
        Ok(self.push(1, c, data, Op::MeanRows(a)))
    }

    /// Extract one element as a 1x1 node.
    pub fn pick(&mut self, a: NodeId, i: usize, j: usize) -> Result<NodeId> {
        let (r, c) = self.dims(a);
        if i >= r || j >= c {
            return Err(DmgError::invalid(format!("pick ({i},{j}) out of ({r},{c})")));
        }
        let v = self.nodes[a].data[i * c + j];
        Ok(self.push(1, 1, vec![v], Op::Pick(a, i, j)))
    }

    /// Reverse sweep from a scalar loss. Returns per-parameter gradients.
    pub fn backward(&mut self, loss: NodeId) -> Result<Grads> {
        let (r, c) = self.dims(loss);
        if r * c != 1 {
            return Err(DmgError::invalid(format!(
                "backward needs a scalar loss, got {r}x{c}"
            )));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[loss] = Some(vec![1.0]);

        for id in (0..=loss).rev() {
            let g = match grads[id].take() {
                Some(g) => g,
                None => continue,
            };
            let node = &self.nodes[id];
            let (rows, cols) = (node.rows, node.cols);
            macro_rules! acc {
                ($target:expr, $f:expr) => {{
                    let t: NodeId = $target;
                    let n = self.nodes[t].data.len();
                    let slot = grads[t].get_or_insert_with(|| vec![0.0; n]);
                    #[allow(clippy::redundant_closure_call)]
                    ($f)(slot.as_mut_slice());
                }};
            }
            match self.nodes[id].op.clone() {
                Op::Leaf => {
                    grads[id] = Some(g);
                }
                Op::MatMul(a, b) => {
                    let (m, k) = self.dims(a);
                    let n = self.dims(b).1;
                    let av = self.nodes[a].data.clone();
                    let bv = self.nodes[b].data.clone();
                    // dA = dC B^T
                    acc!(a, |ga: &mut [f64]| {
                        for i in 0..m {
                            for kk in 0..k {
                                let mut s = 0.0;
                                for j in 0..n {
                                    s += g[i * n + j] * bv[kk * n + j];
                                }
                                ga[i * k + kk] += s;
                            }
                        }
                    });
                    // dB = A^T dC
                    acc!(b, |gb: &mut [f64]| {
                        for kk in 0..k {
                            for i in 0..m {
                                let aik = av[i * k + kk];
                                if aik == 0.0 {
                                    continue;
                                }
                                for j in 0..n {
                                    gb[kk * n + j] += aik * g[i * n + j];
                                }
                            }
                        }
                    });
                }
                Op::Add(a, b) => {
                    acc!(a, |ga: &mut [f64]| for (x, y) in ga.iter_mut().zip(&g) {
                        *x += y
                    });
                    acc!(b, |gb: &mut [f64]| for (x, y) in gb.iter_mut().zip(&g) {
                        *x += y
                    });
                }
                Op::Sub(a, b) => {
                    acc!(a, |ga: &mut [f64]| for (x, y) in ga.iter_mut().zip(&g) {
                        *x += y
                    });
                    acc!(b, |gb: &mut [f64]| for (x, y) in gb.iter_mut().zip(&g) {
                        *x -= y
                    });
                }
                Op::Mul(a, b) => {
                    let av = self.nodes[a].data.clone();
                    let bv = self.nodes[b].data.clone();
                    acc!(a, |ga: &mut [f64]| for i in 0..ga.len() {
                        ga[i] += g[i] * bv[i]
                    });
                    acc!(b, |gb: &mut [f64]| for i in 0..gb.len() {
                        gb[i] += g[i] * av[i]
                    });
                }
                Op::Scale(a, s) => {
                    acc!(a, |ga: &mut [f64]| for i in 0..ga.len() {
                        ga[i] += g[i] * s
                    });
                }
                Op::Sigmoid(a) => {
                    let y = node.data.clone();
                    acc!(a, |ga: &mut [f64]| for i in 0..ga.len() {
                        ga[i] += g[i] * y[i] * (1.0 - y[i])
                    });
                }
                Op::Tanh(a) => {
                    let y = node.data.clone();
                    acc!(a, |ga: &mut [f64]| for i in 0..ga.len() {
                        ga[i] += g[i] * (1.0 - y[i] * y[i])
                    });
                }
                Op::SoftmaxRows(a) => {
                    let y = node.data.clone();
                    acc!(a, |ga: &mut [f64]| {
                        for i in 0..rows {
                            let yr = &y[i * cols..(i + 1) * cols];
                            let gr = &g[i * cols..(i + 1) * cols];
                            let dot: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
                            for j in 0..cols {
                                ga[i * cols + j] += yr[j] * (gr[j] - dot);
                            }
                        }
                    });
                }
                Op::LogSoftmaxRows(a) => {
                    let y = node.data.clone();
                    acc!(a, |ga: &mut [f64]| {
                        for i in 0..rows {
                            let gr = &g[i * cols..(i + 1) * cols];
                            let gsum: f64 = gr.iter().sum();
                            for j in 0..cols {
                                let p = y[i * cols + j].exp();
                                ga[i * cols + j] += gr[j] - p * gsum;
                            }
                        }
                    });
                }
                Op::ConcatCols(parts) => {
                    let mut start = 0;
                    for p in parts {
                        let pc = self.dims(p).1;
                        acc!(p, |gp: &mut [f64]| {
                            for i in 0..rows {
                                for j in 0..pc {
                                    gp[i * pc + j] += g[i * cols + start + j];
                                }
                            }
                        });
                        start += pc;
                    }
                }
                Op::ConcatRows(parts) => {
                    let mut start = 0;
                    for p in parts {
                        let (pr, _) = self.dims(p);
                        acc!(p, |gp: &mut [f64]| {
                            for i in 0..pr * cols {
                                gp[i] += g[start * cols + i];
                            }
                        });
                        start += pr;
                    }
                }
                Op::BroadcastRows(a, n) => {
                    acc!(a, |ga: &mut [f64]| {
                        for i in 0..n {
                            for j in 0..cols {
                                ga[j] += g[i * cols + j];
                            }
                        }
                    });
                }
                Op::Transpose(a) => {
                    acc!(a, |ga: &mut [f64]| {
                        // node is c x r relative to a
                        for i in 0..rows {
                            for j in 0..cols {
                                ga[j * rows + i] += g[i * cols + j];
                            }
                        }
                    });
                }
                Op::Row(a, i) => {
                    acc!(a, |ga: &mut [f64]| for j in 0..cols {
                        ga[i * cols + j] += g[j]
                    });
                }
                Op::SliceCols(a, start, len) => {
                    let ac = self.dims(a).1;
                    acc!(a, |ga: &mut [f64]| {
                        for i in 0..rows {
                            for j in 0..len {
                                ga[i * ac + start + j] += g[i * len + j];
                            }
                        }
                    });
                }
                Op::MeanRows(a) => {
                    let ar = self.dims(a).0;
                    let inv = 1.0 / ar as f64;
                    acc!(a, |ga: &mut [f64]| {
                        for i in 0..ar {
                            for j in 0..cols {
                                ga[i * cols + j] += g[j] * inv;
                            }
                        }
                    });
                }
                Op::Pick(a, i, j) => {
                    let ac = self.dims(a).1;
                    acc!(a, |ga: &mut [f64]| ga[i * ac + j] += g[0]);
                }
            }
        }

        let mut by_param = HashMap::new();
        for (&pidx, &nid) in &self.param_nodes {
            if let Some(g) = &grads[nid] {
                let shape = vec![self.nodes[nid].rows, self.nodes[nid].cols];
                by_param.insert(pidx, Tensor::new(shape, g.clone())?);
            }
        }
        Ok(Grads { by_param })
    }
}
