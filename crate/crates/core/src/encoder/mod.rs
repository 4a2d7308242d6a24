//! The two-depth mean-aggregator encoder.
//!
//! For a node `u`, the depth-1 representation is built from `u` and a sample
//! of its neighbors (each drawn from raw features), and the depth-2
//! representation averages the depth-1 representations of `u` and a sample
//! of its neighbors. Each depth applies an aggregator block to the mean and
//! then an outer block; a block is `dropout(tanh(batchnorm(W x)))`. The
//! embedding is `[h1 | h2]`.
//!
//! Neighbor sampling keeps every neighbor when the degree is at most the
//! fanout and otherwise draws `fanout` neighbors without replacement.

mod params;
mod plan;

pub use params::{
    BatchNorm, DualEncoder, EncoderDims, EncoderParams, Layer, AGG1, AGG2, BN_EPS, BN_MOMENTUM,
    LAYER_NAMES, OUT1, OUT2,
};
pub use plan::{EncodePlan, EncodeRequest};

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{FeatureMatrix, Graph};
use crate::numeric::tape::BatchStats;
use crate::numeric::{Tape, Tensor, Var};
use crate::rng::Rng;

/// Neighbor sample sizes: `depth1` for the node's own neighbors, `depth2`
/// for each of those neighbors' neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fanouts {
    pub depth1: usize,
    pub depth2: usize,
}

impl Fanouts {
    pub fn new(depth1: usize, depth2: usize) -> Result<Self> {
        if depth1 == 0 || depth2 == 0 {
            return Err(Error::InvalidConfig("fanouts must be at least 1".into()));
        }
        Ok(Self { depth1, depth2 })
    }

    /// Node-classification default (10, 25).
    pub fn node_task() -> Self {
        Self {
            depth1: 10,
            depth2: 25,
        }
    }

    /// Small-graph default (4, 4).
    pub fn small_graph() -> Self {
        Self {
            depth1: 4,
            depth2: 4,
        }
    }

    /// Nodes that can influence one embedding: `1 + s1 + s1 * s2`.
    pub fn receptive_field_size(&self) -> usize {
        1 + self.depth1 + self.depth1 * self.depth2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Elementwise mean of `u_feat` together with all `neighbor_feats`.
pub fn mean_with_self(u_feat: &[f64], neighbor_feats: &[&[f64]]) -> Result<Vec<f64>> {
    if neighbor_feats.iter().any(|f| f.len() != u_feat.len()) {
        return Err(Error::ShapeMismatch(
            "neighbor feature width differs".into(),
        ));
    }
    let mut out = u_feat.to_vec();
    for f in neighbor_feats {
        for (o, v) in out.iter_mut().zip(*f) {
            *o += v;
        }
    }
    let inv = 1.0 / (1 + neighbor_feats.len()) as f64;
    out.iter_mut().for_each(|o| *o *= inv);
    Ok(out)
}

/// Tape handles for one encoder's trainable tensors.
#[derive(Debug, Clone, Copy)]
pub struct EncoderLeaves {
    pub weights: [Var; 4],
    pub gammas: [Var; 4],
    pub betas: [Var; 4],
}

impl EncoderLeaves {
    pub fn register(tape: &mut Tape<'_>, params: &EncoderParams) -> Self {
        let mut weights = [None; 4];
        let mut gammas = [None; 4];
        let mut betas = [None; 4];
        for (i, layer) in params.layers.iter().enumerate() {
            weights[i] = Some(tape.leaf(layer.weight.clone()));
            gammas[i] = Some(tape.leaf(layer.norm.gamma.clone()));
            betas[i] = Some(tape.leaf(layer.norm.beta.clone()));
        }
        Self {
            weights: weights.map(Option::unwrap),
            gammas: gammas.map(Option::unwrap),
            betas: betas.map(Option::unwrap),
        }
    }

    /// Leaves in `weights, gammas, betas` order, matching
    /// [`EncoderParams::trainable_mut`].
    pub fn all(&self) -> impl Iterator<Item = Var> + '_ {
        self.weights
            .iter()
            .chain(&self.gammas)
            .chain(&self.betas)
            .copied()
    }
}

impl EncoderParams {
    /// Mutable trainable tensors in the order of [`EncoderLeaves::all`].
    pub fn trainable_mut(&mut self) -> Vec<&mut Tensor> {
        let mut weights = Vec::new();
        let mut gammas = Vec::new();
        let mut betas = Vec::new();
        for layer in self.layers.iter_mut() {
            weights.push(&mut layer.weight);
            gammas.push(&mut layer.norm.gamma);
            betas.push(&mut layer.norm.beta);
        }
        weights.into_iter().chain(gammas).chain(betas).collect()
    }
}

/// Result of recording one encoder pass on a tape.
pub struct ForwardOutput {
    /// `requests × (depth1 + depth2)`.
    pub embedding: Var,
    /// Batch statistics of each block, present in train mode.
    pub stats: Option<[BatchStats; 4]>,
}

/// Records linear → batchnorm → tanh → dropout for block `i`. `linear` is
/// the already-computed `W x`.
fn block(
    tape: &mut Tape<'_>,
    linear: Var,
    i: usize,
    leaves: &EncoderLeaves,
    params: &EncoderParams,
    mask: Option<&Vec<f64>>,
    stats: &mut Vec<BatchStats>,
) -> Result<Var> {
    let (gamma, beta) = (leaves.gammas[i], leaves.betas[i]);
    let normed = match mask {
        Some(_) => {
            let (v, s) = tape.batch_norm(linear, gamma, beta, BN_EPS)?;
            stats.push(s);
            v
        }
        None => {
            let n = &params.layers[i].norm;
            tape.normalize(linear, gamma, beta, &n.running_mean, &n.running_var, BN_EPS)?
        }
    };
    let act = tape.tanh(normed);
    match mask {
        Some(m) => tape.mask(act, m.clone()),
        None => Ok(act),
    }
}

/// Records the encoder forward pass for a prepared plan. Train mode is
/// signalled by the plan carrying dropout masks.
pub fn forward<'a>(
    tape: &mut Tape<'a>,
    leaves: &EncoderLeaves,
    params: &EncoderParams,
    features: &'a FeatureMatrix,
    plan: &EncodePlan,
) -> Result<ForwardOutput> {
    let masks = plan.masks();
    let mask = |i: usize| masks.map(|m| &m[i]);
    let mut stats = Vec::new();

    // W·mean(x) = mean(W·x), so project each distinct feature row once.
    let projected = tape.project(features, plan.base_rows().to_vec(), leaves.weights[AGG1])?;
    let agg1 = tape.group_mean(projected, plan.base_groups().clone())?;
    let a1 = block(tape, agg1, AGG1, leaves, params, mask(AGG1), &mut stats)?;
    let lin1 = tape.matmul_nt(a1, leaves.weights[OUT1])?;
    let h1 = block(tape, lin1, OUT1, leaves, params, mask(OUT1), &mut stats)?;

    let agg2 = tape.group_mean(h1, plan.instance_groups().clone())?;
    let lin_agg2 = tape.matmul_nt(agg2, leaves.weights[AGG2])?;
    let a2 = block(tape, lin_agg2, AGG2, leaves, params, mask(AGG2), &mut stats)?;
    let lin2 = tape.matmul_nt(a2, leaves.weights[OUT2])?;
    let h2 = block(tape, lin2, OUT2, leaves, params, mask(OUT2), &mut stats)?;

    let centers = tape.gather_rows(h1, plan.centers().to_vec())?;
    let embedding = tape.concat_cols(centers, h2)?;
    if masks.is_some() && !tape.value(embedding).is_finite() {
        return Err(Error::NumericFault(
            "non-finite activations in encoder".into(),
        ));
    }
    let stats = <[BatchStats; 4]>::try_from(stats).ok();
    Ok(ForwardOutput { embedding, stats })
}

fn check_inputs(graph: &Graph, features: &FeatureMatrix, params: &EncoderParams) -> Result<()> {
    if features.n_rows() < graph.n_nodes() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{} feature rows for {} nodes",
            features.n_rows(),
            graph.n_nodes()
        )));
    }
    if features.n_cols() != params.dims.input {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{} feature columns but encoder expects {}",
            features.n_cols(),
            params.dims.input
        )));
    }
    Ok(())
}

/// Embeds the given requests, returning one `depth1 + depth2` row each.
pub fn encode_requests(
    graph: &Graph,
    features: &FeatureMatrix,
    requests: &[EncodeRequest],
    params: &EncoderParams,
    fanouts: Fanouts,
    mode: Mode,
    rng: &mut Rng,
) -> Result<Tensor> {
    check_inputs(graph, features, params)?;
    let plan = EncodePlan::build(
        graph,
        requests,
        fanouts,
        &params.dims,
        params.dropout,
        mode,
        rng,
    )?;
    let mut tape = Tape::new();
    let leaves = EncoderLeaves::register(&mut tape, params);
    let out = forward(&mut tape, &leaves, params, features, &plan)?;
    Ok(tape.value(out.embedding).clone())
}

/// Embeds `nodes`. When `adjacency_override` maps a node to a list, that
/// list stands in for the node's own neighbors wherever the node is the
/// center of an aggregation; neighbors further out keep their true lists.
#[allow(clippy::too_many_arguments)]
pub fn encode(
    graph: &Graph,
    features: &FeatureMatrix,
    nodes: &[usize],
    params: &EncoderParams,
    fanouts: Fanouts,
    mode: Mode,
    rng: &mut Rng,
    adjacency_override: Option<&BTreeMap<usize, Vec<usize>>>,
) -> Result<Tensor> {
    let requests: Vec<EncodeRequest> = nodes
        .iter()
        .map(|&u| EncodeRequest {
            node: u,
            top_neighbors: adjacency_override.and_then(|m| m.get(&u).cloned()),
        })
        .collect();
    encode_requests(graph, features, &requests, params, fanouts, mode, rng)
}

/// Embeds every node of the graph, in id order, in inference mode.
pub fn embed_all(
    graph: &Graph,
    features: &FeatureMatrix,
    params: &EncoderParams,
    fanouts: Fanouts,
    rng: &mut Rng,
) -> Result<Tensor> {
    let nodes: Vec<usize> = (0..graph.n_nodes()).collect();
    encode(
        graph,
        features,
        &nodes,
        params,
        fanouts,
        Mode::Infer,
        rng,
        None,
    )
}

/// One block applied to a batch of rows outside any encoder.
pub fn apply_layer(
    x: &Tensor,
    layer: &Layer,
    dropout: f64,
    mode: Mode,
    rng: &mut Rng,
) -> Result<Tensor> {
    let mut tape = Tape::new();
    let input = tape.leaf(x.clone());
    let w = tape.leaf(layer.weight.clone());
    let gamma = tape.leaf(layer.norm.gamma.clone());
    let beta = tape.leaf(layer.norm.beta.clone());
    let lin = tape.matmul_nt(input, w)?;
    let out = match mode {
        Mode::Train => {
            let (normed, _) = tape.batch_norm(lin, gamma, beta, BN_EPS)?;
            let act = tape.tanh(normed);
            let mask = plan::dropout_mask(tape.value(act).data().len(), dropout, rng);
            tape.mask(act, mask)?
        }
        Mode::Infer => {
            let n = &layer.norm;
            let normed =
                tape.normalize(lin, gamma, beta, &n.running_mean, &n.running_var, BN_EPS)?;
            tape.tanh(normed)
        }
    };
    let value = tape.value(out).clone();
    if !value.is_finite() {
        return Err(Error::NumericFault("non-finite activations".into()));
    }
    Ok(value)
}

#[cfg(test)]
mod tests;
