//! Reverse-mode differentiation over the fixed operation set the encoder and
//! the losses are built from.
//!
//! Values are computed eagerly when an operation is recorded; [`Tape::backward`]
//! walks the records in reverse and accumulates adjoints.

use alloc::vec::Vec;

use super::{logsigmoid, sigmoid, Tensor};
use crate::error::{Error, Result};
use crate::graph::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

/// Variable-length row groups in compressed form: group `g` owns
/// `members[offsets[g]..offsets[g + 1]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Groups {
    offsets: Vec<usize>,
    members: Vec<usize>,
}

impl Default for Groups {
    fn default() -> Self {
        Self::new()
    }
}

impl Groups {
    pub fn new() -> Self {
        Self {
            offsets: alloc::vec![0],
            members: Vec::new(),
        }
    }

    pub fn push(&mut self, members: impl IntoIterator<Item = usize>) {
        self.members.extend(members);
        self.offsets.push(self.members.len());
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn group(&self, g: usize) -> &[usize] {
        &self.members[self.offsets[g]..self.offsets[g + 1]]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> + '_ {
        (0..self.len()).map(move |g| self.group(g))
    }
}

enum Op<'a> {
    Leaf,
    MatMulNt {
        x: Var,
        w: Var,
    },
    Project {
        features: &'a FeatureMatrix,
        rows: Vec<usize>,
        w: Var,
    },
    GroupMean {
        x: Var,
        groups: Groups,
    },
    /// Column standardization followed by `gamma * xhat + beta`; `batch`
    /// marks statistics computed from `x` itself (gradient flows through them).
    Normalize {
        x: Var,
        gamma: Var,
        beta: Var,
        xhat: Tensor,
        inv_std: Vec<f64>,
        batch: bool,
    },
    Tanh(Var),
    Mask {
        x: Var,
        mask: Vec<f64>,
    },
    ConcatCols(Var, Var),
    GatherRows {
        x: Var,
        index: Vec<usize>,
    },
    PairDot {
        a: Var,
        b: Var,
        pairs: Vec<(usize, usize, f64)>,
    },
    LogSigmoid(Var),
    Scale(Var, f64),
    Sum(Var),
}

struct Node<'a> {
    value: Tensor,
    op: Op<'a>,
}

/// Column statistics produced by a batch-normalization record.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchStats {
    pub mean: Vec<f64>,
    /// Biased variance (divisor `n`).
    pub var: Vec<f64>,
    pub n: usize,
}

#[derive(Default)]
pub struct Tape<'a> {
    nodes: Vec<Node<'a>>,
}

impl<'a> Tape<'a> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op<'a>) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// Records an input (parameter or constant).
    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf)
    }

    /// `x · wᵀ` with `x: n×in`, `w: out×in`.
    pub fn matmul_nt(&mut self, x: Var, w: Var) -> Result<Var> {
        let (xv, wv) = (self.value(x), self.value(w));
        if xv.cols() != wv.cols() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "matmul of {:?} by transpose of {:?}",
                xv.shape(),
                wv.shape()
            )));
        }
        let out = xv.matmul_nt(wv);
        Ok(self.push(out, Op::MatMulNt { x, w }))
    }

    /// Projects the listed feature rows through `w: out×in`; row `i` of the
    /// result is `w · features[rows[i]]`.
    pub fn project(
        &mut self,
        features: &'a FeatureMatrix,
        rows: Vec<usize>,
        w: Var,
    ) -> Result<Var> {
        let wv = self.value(w);
        if wv.cols() != features.n_cols() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "weight {:?} against {} feature columns",
                wv.shape(),
                features.n_cols()
            )));
        }
        let wt = wv.transpose();
        let width = wt.cols();
        let mut out = Tensor::zeros(rows.len(), width);
        for (i, &r) in rows.iter().enumerate() {
            let dst = out.row_mut(i);
            features.for_each_entry(r, |c, v| {
                for (d, w) in dst.iter_mut().zip(wt.row(c)) {
                    *d += v * w;
                }
            });
        }
        Ok(self.push(out, Op::Project { features, rows, w }))
    }

    /// Row `g` of the result is the mean of the rows of `x` listed in group
    /// `g`. Every group must be non-empty.
    pub fn group_mean(&mut self, x: Var, groups: Groups) -> Result<Var> {
        let xv = self.value(x);
        let mut out = Tensor::zeros(groups.len(), xv.cols());
        for (g, members) in groups.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::ShapeMismatch(alloc::format!("group {g} is empty")));
            }
            let dst = out.row_mut(g);
            for &m in members {
                if m >= xv.rows() {
                    return Err(Error::ShapeMismatch(alloc::format!(
                        "group member {m} outside {} rows",
                        xv.rows()
                    )));
                }
                for (d, s) in dst.iter_mut().zip(xv.row(m)) {
                    *d += s;
                }
            }
            let inv = 1.0 / members.len() as f64;
            dst.iter_mut().for_each(|d| *d *= inv);
        }
        Ok(self.push(out, Op::GroupMean { x, groups }))
    }

    /// Batch normalization with statistics of `x` itself. Returns the output
    /// and the statistics used.
    pub fn batch_norm(
        &mut self,
        x: Var,
        gamma: Var,
        beta: Var,
        eps: f64,
    ) -> Result<(Var, BatchStats)> {
        let xv = self.value(x);
        let (n, c) = xv.shape();
        let mut mean = alloc::vec![0.0; c];
        let mut var = alloc::vec![0.0; c];
        if n > 0 {
            for r in 0..n {
                for (m, v) in mean.iter_mut().zip(xv.row(r)) {
                    *m += v;
                }
            }
            mean.iter_mut().for_each(|m| *m /= n as f64);
            for r in 0..n {
                for ((s, v), m) in var.iter_mut().zip(xv.row(r)).zip(&mean) {
                    *s += (v - m) * (v - m);
                }
            }
            var.iter_mut().for_each(|s| *s /= n as f64);
        }
        let stats = BatchStats { mean, var, n };
        let out = self.normalize_with(x, gamma, beta, &stats.mean, &stats.var, eps, true)?;
        Ok((out, stats))
    }

    /// Normalization with fixed statistics (inference-mode batch norm).
    pub fn normalize(
        &mut self,
        x: Var,
        gamma: Var,
        beta: Var,
        mean: &[f64],
        var: &[f64],
        eps: f64,
    ) -> Result<Var> {
        self.normalize_with(x, gamma, beta, mean, var, eps, false)
    }

    #[allow(clippy::too_many_arguments)]
    fn normalize_with(
        &mut self,
        x: Var,
        gamma: Var,
        beta: Var,
        mean: &[f64],
        var: &[f64],
        eps: f64,
        batch: bool,
    ) -> Result<Var> {
        let (xv, gv, bv) = (self.value(x), self.value(gamma), self.value(beta));
        let c = xv.cols();
        if gv.shape() != (1, c) || bv.shape() != (1, c) || mean.len() != c || var.len() != c {
            return Err(Error::ShapeMismatch(alloc::format!(
                "normalization of {c} columns with gamma {:?}, beta {:?}",
                gv.shape(),
                bv.shape()
            )));
        }
        let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / libm::sqrt(v + eps)).collect();
        let (gv, bv) = (gv.data(), bv.data());
        let mut xhat = xv.clone();
        let mut out = Tensor::zeros(xv.rows(), c);
        for r in 0..xv.rows() {
            let h = xhat.row_mut(r);
            for (((h, m), s), (o, (g, b))) in h
                .iter_mut()
                .zip(mean)
                .zip(&inv_std)
                .zip(out.row_mut(r).iter_mut().zip(gv.iter().zip(bv)))
            {
                *h = (*h - m) * s;
                *o = g * *h + b;
            }
        }
        Ok(self.push(
            out,
            Op::Normalize {
                x,
                gamma,
                beta,
                xhat,
                inv_std,
                batch,
            },
        ))
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        let mut out = self.value(x).clone();
        out.data_mut().iter_mut().for_each(|v| *v = libm::tanh(*v));
        self.push(out, Op::Tanh(x))
    }

    /// Elementwise product with a constant mask of the same shape.
    pub fn mask(&mut self, x: Var, mask: Vec<f64>) -> Result<Var> {
        let xv = self.value(x);
        if mask.len() != xv.data().len() {
            return Err(Error::ShapeMismatch("mask size differs from input".into()));
        }
        let mut out = xv.clone();
        out.data_mut()
            .iter_mut()
            .zip(&mask)
            .for_each(|(v, m)| *v *= m);
        Ok(self.push(out, Op::Mask { x, mask }))
    }

    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).concat_cols(self.value(b))?;
        Ok(self.push(out, Op::ConcatCols(a, b)))
    }

    pub fn gather_rows(&mut self, x: Var, index: Vec<usize>) -> Result<Var> {
        let xv = self.value(x);
        if let Some(&bad) = index.iter().find(|&&i| i >= xv.rows()) {
            return Err(Error::ShapeMismatch(alloc::format!(
                "row {bad} outside {} rows",
                xv.rows()
            )));
        }
        let out = xv.select_rows(&index);
        Ok(self.push(out, Op::GatherRows { x, index }))
    }

    /// Column vector with entry `k = sign_k * (a[i_k] · b[j_k])` for
    /// `pairs[k] = (i_k, j_k, sign_k)`.
    pub fn pair_dot(&mut self, a: Var, b: Var, pairs: Vec<(usize, usize, f64)>) -> Result<Var> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.cols() != bv.cols() {
            return Err(Error::ShapeMismatch("pair dot of differing widths".into()));
        }
        let mut out = Tensor::zeros(pairs.len(), 1);
        for (k, &(i, j, s)) in pairs.iter().enumerate() {
            if i >= av.rows() || j >= bv.rows() {
                return Err(Error::ShapeMismatch(alloc::format!(
                    "pair ({i}, {j}) out of range"
                )));
            }
            let d: f64 = av.row(i).iter().zip(bv.row(j)).map(|(x, y)| x * y).sum();
            out.data_mut()[k] = s * d;
        }
        Ok(self.push(out, Op::PairDot { a, b, pairs }))
    }

    pub fn logsigmoid(&mut self, x: Var) -> Var {
        let mut out = self.value(x).clone();
        out.data_mut().iter_mut().for_each(|v| *v = logsigmoid(*v));
        self.push(out, Op::LogSigmoid(x))
    }

    pub fn scale(&mut self, x: Var, factor: f64) -> Var {
        let mut out = self.value(x).clone();
        out.data_mut().iter_mut().for_each(|v| *v *= factor);
        self.push(out, Op::Scale(x, factor))
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let s = self.value(x).data().iter().sum();
        self.push(Tensor::filled(1, 1, s), Op::Sum(x))
    }

    /// Gradients of the scalar `output` with respect to every recorded node.
    pub fn backward(&self, output: Var) -> Result<Gradients> {
        if self.value(output).shape() != (1, 1) {
            return Err(Error::ShapeMismatch(alloc::format!(
                "backward needs a scalar output, got {:?}",
                self.value(output).shape()
            )));
        }
        let mut adj: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        adj[output.0] = Some(Tensor::filled(1, 1, 1.0));
        for idx in (0..=output.0).rev() {
            let node = &self.nodes[idx];
            if matches!(node.op, Op::Leaf) {
                continue;
            }
            let Some(g) = adj[idx].take() else { continue };
            match &node.op {
                Op::Leaf => unreachable!(),
                Op::MatMulNt { x, w } => {
                    // y = x wᵀ: dx = g w, dw = gᵀ x
                    let dx = g.matmul(self.value(*w));
                    let dw = g.matmul_tn(self.value(*x));
                    accumulate(&mut adj, *x, dx);
                    accumulate(&mut adj, *w, dw);
                }
                Op::Project { features, rows, w } => {
                    let (out_dim, in_dim) = self.value(*w).shape();
                    let mut dwt = Tensor::zeros(in_dim, out_dim);
                    for (i, &r) in rows.iter().enumerate() {
                        let gi = g.row(i);
                        features.for_each_entry(r, |c, v| {
                            for (d, s) in dwt.row_mut(c).iter_mut().zip(gi) {
                                *d += v * s;
                            }
                        });
                    }
                    accumulate(&mut adj, *w, dwt.transpose());
                }
                Op::GroupMean { x, groups } => {
                    let xv = self.value(*x);
                    let mut dx = Tensor::zeros(xv.rows(), xv.cols());
                    for (gi, members) in groups.iter().enumerate() {
                        let inv = 1.0 / members.len() as f64;
                        for &m in members {
                            for (d, s) in dx.row_mut(m).iter_mut().zip(g.row(gi)) {
                                *d += inv * s;
                            }
                        }
                    }
                    accumulate(&mut adj, *x, dx);
                }
                Op::Normalize {
                    x,
                    gamma,
                    beta,
                    xhat,
                    inv_std,
                    batch,
                } => {
                    let (n, c) = xhat.shape();
                    let gamma_v = self.value(*gamma).data();
                    let mut dgamma = Tensor::zeros(1, c);
                    let mut dbeta = Tensor::zeros(1, c);
                    for r in 0..n {
                        for ((dg, db), (gr, h)) in dgamma
                            .data_mut()
                            .iter_mut()
                            .zip(dbeta.data_mut().iter_mut())
                            .zip(g.row(r).iter().zip(xhat.row(r)))
                        {
                            *dg += gr * h;
                            *db += gr;
                        }
                    }
                    let scale: Vec<f64> = gamma_v.iter().zip(inv_std).map(|(g, s)| g * s).collect();
                    let inv_n = 1.0 / n.max(1) as f64;
                    let mut dx = g;
                    for r in 0..n {
                        let h = xhat.row(r);
                        let row = dx.row_mut(r);
                        if *batch {
                            for j in 0..c {
                                row[j] = scale[j]
                                    * (row[j]
                                        - dbeta.data()[j] * inv_n
                                        - h[j] * dgamma.data()[j] * inv_n);
                            }
                        } else {
                            for (d, s) in row.iter_mut().zip(&scale) {
                                *d *= s;
                            }
                        }
                    }
                    accumulate(&mut adj, *x, dx);
                    accumulate(&mut adj, *gamma, dgamma);
                    accumulate(&mut adj, *beta, dbeta);
                }
                Op::Tanh(x) => {
                    let mut dx = g;
                    dx.data_mut()
                        .iter_mut()
                        .zip(node.value.data())
                        .for_each(|(d, y)| *d *= 1.0 - y * y);
                    accumulate(&mut adj, *x, dx);
                }
                Op::Mask { x, mask } => {
                    let mut dx = g;
                    dx.data_mut()
                        .iter_mut()
                        .zip(mask)
                        .for_each(|(d, m)| *d *= m);
                    accumulate(&mut adj, *x, dx);
                }
                Op::ConcatCols(a, b) => {
                    let split = self.value(*a).cols();
                    accumulate(&mut adj, *a, g.slice_cols(0, split));
                    accumulate(&mut adj, *b, g.slice_cols(split, g.cols()));
                }
                Op::GatherRows { x, index } => {
                    let xv = self.value(*x);
                    let mut dx = Tensor::zeros(xv.rows(), xv.cols());
                    for (i, &r) in index.iter().enumerate() {
                        for (d, s) in dx.row_mut(r).iter_mut().zip(g.row(i)) {
                            *d += s;
                        }
                    }
                    accumulate(&mut adj, *x, dx);
                }
                Op::PairDot { a, b, pairs } => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    let mut da = Tensor::zeros(av.rows(), av.cols());
                    let mut db = Tensor::zeros(bv.rows(), bv.cols());
                    for (k, &(i, j, s)) in pairs.iter().enumerate() {
                        let coef = s * g.data()[k];
                        for (d, y) in da.row_mut(i).iter_mut().zip(bv.row(j)) {
                            *d += coef * y;
                        }
                        for (d, x) in db.row_mut(j).iter_mut().zip(av.row(i)) {
                            *d += coef * x;
                        }
                    }
                    accumulate(&mut adj, *a, da);
                    accumulate(&mut adj, *b, db);
                }
                Op::LogSigmoid(x) => {
                    let mut dx = g;
                    dx.data_mut()
                        .iter_mut()
                        .zip(self.value(*x).data())
                        .for_each(|(d, v)| *d *= sigmoid(-v));
                    accumulate(&mut adj, *x, dx);
                }
                Op::Scale(x, f) => {
                    let mut dx = g;
                    dx.data_mut().iter_mut().for_each(|d| *d *= f);
                    accumulate(&mut adj, *x, dx);
                }
                Op::Sum(x) => {
                    let (r, c) = self.value(*x).shape();
                    accumulate(&mut adj, *x, Tensor::filled(r, c, g.data()[0]));
                }
            }
        }
        for (slot, node) in adj.iter_mut().zip(&self.nodes) {
            if matches!(node.op, Op::Leaf) && slot.is_none() {
                *slot = Some(Tensor::zeros(node.value.rows(), node.value.cols()));
            }
        }
        Ok(Gradients { adj })
    }
}

fn accumulate(adj: &mut [Option<Tensor>], v: Var, delta: Tensor) {
    match &mut adj[v.0] {
        Some(existing) => existing.add_assign(&delta),
        slot @ None => *slot = Some(delta),
    }
}

/// Adjoints of the recorded leaves. Leaves that do not reach the output
/// have zero gradients.
pub struct Gradients {
    adj: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient for a leaf `v`; `None` for intermediate nodes.
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.adj.get(v.0).and_then(Option::as_ref)
    }
}
