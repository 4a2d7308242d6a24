//! Training loop: one batch per epoch, Adam over both encoders.

use alloc::string::String;
use alloc::vec::Vec;

use crate::encoder::{
    self, forward, DualEncoder, EncodePlan, EncodeRequest, EncoderDims, EncoderLeaves,
    EncoderParams, Fanouts, Mode,
};
use crate::error::{Error, Result};
use crate::graph::{FeatureMatrix, Graph};
use crate::loss::{record_loss, PairIndex};
use crate::numeric::{AdamConfig, AdamState, Tape, Tensor};
use crate::rng::Rng;
use crate::sampling::{build_batch, Batch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Within,
    Neighbor,
    /// Two independent models, one per loss, with concatenated embeddings.
    ConcatBoth,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Within => "within",
            LossKind::Neighbor => "neighbor",
            LossKind::ConcatBoth => "concat",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "within" => Ok(LossKind::Within),
            "neighbor" => Ok(LossKind::Neighbor),
            "concat" | "both" => Ok(LossKind::ConcatBoth),
            other => Err(Error::InvalidConfig(alloc::format!(
                "unknown loss `{other}`"
            ))),
        }
    }

    /// Single losses that make up this kind, in embedding-column order.
    pub fn components(self) -> &'static [LossKind] {
        match self {
            LossKind::Within => &[LossKind::Within],
            LossKind::Neighbor => &[LossKind::Neighbor],
            LossKind::ConcatBoth => &[LossKind::Within, LossKind::Neighbor],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub loss: LossKind,
    pub fanouts: Fanouts,
    pub depth1: usize,
    pub depth2: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// One batch per epoch.
    pub epochs: usize,
    /// Positive pairs per anchor.
    pub positives: usize,
    /// Negatives per anchor (`Q`).
    pub negatives: usize,
    /// Share of the within-node negatives drawn by neighbor shuffling.
    pub shuffle_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            loss: LossKind::Within,
            fanouts: Fanouts::node_task(),
            depth1: 192,
            depth2: 64,
            dropout: 0.6,
            learning_rate: 0.01,
            batch_size: 256,
            epochs: 200,
            positives: 5,
            negatives: 20,
            shuffle_fraction: 0.5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.fanouts.depth1 == 0 || self.fanouts.depth2 == 0 {
            return bad("fanouts must be at least 1".into());
        }
        if self.depth1 == 0 || self.depth2 == 0 {
            return bad("layer widths must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(alloc::format!("dropout {} outside [0, 1)", self.dropout));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(alloc::format!(
                "learning rate {} must be positive",
                self.learning_rate
            ));
        }
        if self.batch_size == 0 || self.positives == 0 || self.negatives == 0 {
            return bad("batch size, positives and negatives must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.shuffle_fraction) {
            return bad(alloc::format!(
                "shuffle fraction {} outside [0, 1]",
                self.shuffle_fraction
            ));
        }
        Ok(())
    }

    /// Training examples seen over the run.
    pub fn total_examples(&self) -> usize {
        self.epochs * self.batch_size
    }

    pub fn dims(&self, input: usize) -> Result<EncoderDims> {
        EncoderDims::new(input, self.depth1, self.depth2)
    }
}

/// A trained (or untrained) model: one dual encoder per loss component.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub kind: LossKind,
    pub fanouts: Fanouts,
    pub components: Vec<DualEncoder>,
}

impl Model {
    pub fn xavier(config: &TrainConfig, input: usize, rng: &mut Rng) -> Result<Self> {
        let dims = config.dims(input)?;
        let components = config
            .loss
            .components()
            .iter()
            .map(|_| DualEncoder::xavier(dims, config.dropout, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kind: config.loss,
            fanouts: config.fanouts,
            components,
        })
    }

    pub fn embedding_dim(&self) -> usize {
        self.components
            .iter()
            .map(|c| c.target.dims.embedding())
            .sum()
    }

    /// Target-encoder embeddings of every node in inference mode, with
    /// component embeddings side by side.
    pub fn embed(&self, graph: &Graph, features: &FeatureMatrix, rng: &mut Rng) -> Result<Tensor> {
        let mut out: Option<Tensor> = None;
        for c in &self.components {
            let z = encoder::embed_all(graph, features, &c.target, self.fanouts, rng)?;
            out = Some(match out {
                None => z,
                Some(prev) => prev.concat_cols(&z)?,
            });
        }
        out.ok_or_else(|| Error::InvalidArgument("model has no components".into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: Model,
    /// Per-epoch loss of each component, aligned with `model.components`.
    pub losses: Vec<Vec<f64>>,
}

/// Encoder inputs and row pairing for one batch.
pub(crate) fn batch_requests(
    batch: &Batch,
    graph: &Graph,
) -> (Vec<EncodeRequest>, Vec<EncodeRequest>, PairIndex) {
    let mut target = Vec::new();
    let mut context = Vec::new();
    let mut pairs = PairIndex::default();
    for (i, &u) in batch.anchors.iter().enumerate() {
        let first_target = target.len();
        for &v in &batch.positives[i] {
            pairs.positives.push((target.len(), context.len()));
            target.push(EncodeRequest::node(u));
            context.push(EncodeRequest::node(v));
        }
        for neg in &batch.negatives[i] {
            let row = context.len();
            context.push(EncodeRequest {
                node: neg.node,
                top_neighbors: neg.donor.map(|d| graph.neighbors(d).to_vec()),
            });
            for t in first_target..target.len() {
                pairs.negatives.push((t, row));
            }
        }
    }
    (target, context, pairs)
}

/// One optimizer step on `dual`; returns the batch loss.
fn step(
    graph: &Graph,
    features: &FeatureMatrix,
    dual: &mut DualEncoder,
    kind: LossKind,
    config: &TrainConfig,
    adam: &mut AdamState,
    rng: &mut Rng,
) -> Result<f64> {
    let batch = build_batch(graph, kind, config, rng)?;
    let (target_req, context_req, pairs) = batch_requests(&batch, graph);
    let dims = dual.target.dims;
    let target_plan = EncodePlan::build(
        graph,
        &target_req,
        config.fanouts,
        &dims,
        config.dropout,
        Mode::Train,
        rng,
    )?;
    let context_plan = EncodePlan::build(
        graph,
        &context_req,
        config.fanouts,
        &dims,
        config.dropout,
        Mode::Train,
        rng,
    )?;

    let mut tape = Tape::new();
    let target_leaves = EncoderLeaves::register(&mut tape, &dual.target);
    let context_leaves = EncoderLeaves::register(&mut tape, &dual.context);
    let target_out = forward(
        &mut tape,
        &target_leaves,
        &dual.target,
        features,
        &target_plan,
    )?;
    let context_out = forward(
        &mut tape,
        &context_leaves,
        &dual.context,
        features,
        &context_plan,
    )?;
    let loss = record_loss(
        &mut tape,
        target_out.embedding,
        context_out.embedding,
        &pairs,
    )?;
    let value = tape.value(loss).get(0, 0);
    if !value.is_finite() {
        return Err(Error::NumericFault(alloc::format!("loss became {value}")));
    }

    let grads = tape.backward(loss)?;
    let grad_refs: Vec<&Tensor> = target_leaves
        .all()
        .chain(context_leaves.all())
        .map(|v| {
            grads
                .get(v)
                .ok_or_else(|| Error::NumericFault("missing gradient".into()))
        })
        .collect::<Result<_>>()?;
    {
        let DualEncoder { target, context } = dual;
        let mut params: Vec<&mut Tensor> = target.trainable_mut();
        params.extend(context.trainable_mut());
        adam.step(&mut params, &grad_refs)?;
    }

    for (params, out) in [
        (&mut dual.target, target_out),
        (&mut dual.context, context_out),
    ] {
        if let Some(stats) = out.stats {
            update_norms(params, &stats);
        }
    }
    Ok(value)
}

fn update_norms(params: &mut EncoderParams, stats: &[crate::numeric::tape::BatchStats; 4]) {
    for (layer, s) in params.layers.iter_mut().zip(stats) {
        layer.norm.update_running(&s.mean, &s.var, s.n);
    }
}

/// Trains a model from Xavier initialization. With `epochs = 0` the
/// initial parameters are returned unchanged.
pub fn train(
    graph: &Graph,
    features: &FeatureMatrix,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if features.n_rows() != graph.n_nodes() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{} feature rows for {} nodes",
            features.n_rows(),
            graph.n_nodes()
        )));
    }
    let mut init_rng = Rng::for_run(config.seed, 0);
    let mut model = Model::xavier(config, features.n_cols(), &mut init_rng)?;
    let mut losses = Vec::with_capacity(model.components.len());
    for (c, (&kind, dual)) in config
        .loss
        .components()
        .iter()
        .zip(model.components.iter_mut())
        .enumerate()
    {
        let mut rng = Rng::for_run(config.seed, 1 + c as u64);
        let mut adam = AdamState::new(AdamConfig {
            lr: config.learning_rate,
            ..AdamConfig::default()
        });
        let mut trace = Vec::with_capacity(config.epochs);
        for epoch in 0..config.epochs {
            let value = step(graph, features, dual, kind, config, &mut adam, &mut rng)?;
            log::debug!("{} epoch {epoch} loss {value}", kind.name());
            trace.push(value);
        }
        losses.push(trace);
    }
    Ok(TrainOutcome { model, losses })
}
