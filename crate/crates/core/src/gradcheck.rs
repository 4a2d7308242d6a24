//! Finite-difference checks of the analytic gradients.

use alloc::vec::Vec;

use crate::encoder::{forward, DualEncoder, EncodePlan, EncoderDims, EncoderLeaves, Fanouts, Mode};
use crate::error::Result;
use crate::graph::{FeatureMatrix, Graph};
use crate::loss::{record_loss, PairIndex};
use crate::numeric::{Tape, Tensor};
use crate::rng::Rng;
use crate::sampling::build_batch;
use crate::train::{batch_requests, LossKind, TrainConfig};

/// Finite-difference step.
pub const STEP: f64 = 1e-3;

/// Five-point central difference of `f` around zero offset. Batch
/// normalization over ten-row batches has enough curvature that the
/// three-point stencil's O(h²) error alone reaches 3e-4 at this step.
pub fn central_diff(f: impl Fn(f64) -> f64) -> f64 {
    (-f(2.0 * STEP) + 8.0 * f(STEP) - 8.0 * f(-STEP) + f(-2.0 * STEP)) / (12.0 * STEP)
}

/// `|a - b| / max(|a|, |b|, 1e-3)`: relative, except near zero.
pub fn relative_error(a: f64, b: f64) -> f64 {
    libm::fabs(a - b) / libm::fabs(a).max(libm::fabs(b)).max(1e-3)
}

/// Erdős–Rényi graph plus a spanning path, so that no node is isolated.
pub fn random_connected_graph(n: usize, p: f64, rng: &mut Rng) -> Result<Graph> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 2..n {
            if rng.unit() < p {
                edges.push((u, v));
            }
        }
    }
    edges.extend((1..n).map(|u| (u - 1, u)));
    Ok(Graph::from_edges(n, edges)?.0)
}

/// Largest relative error between the analytic gradient of one batch loss
/// and its finite-difference estimate, over every trainable entry of both
/// encoders. Uses a random 10-node graph, embedding width 4, and train-mode
/// sampling and dropout frozen in advance.
pub fn loss_gradient_error(kind: LossKind, seed: u64) -> Result<f64> {
    let mut rng = Rng::new(seed);
    let graph = random_connected_graph(10, 0.25, &mut rng)?;
    let feats = FeatureMatrix::dense(3, (0..30).map(|_| rng.uniform(0.0, 2.0)).collect())?;
    let config = TrainConfig {
        loss: kind,
        fanouts: Fanouts::new(2, 3)?,
        depth1: 2,
        depth2: 2,
        dropout: 0.3,
        batch_size: 4,
        positives: 2,
        negatives: 3,
        ..TrainConfig::default()
    };
    let dims = EncoderDims::new(3, 2, 2)?;
    let dual = DualEncoder::xavier(dims, config.dropout, &mut rng)?;
    let batch = build_batch(&graph, kind, &config, &mut rng)?;
    let (target_req, context_req, pairs): (_, _, PairIndex) = batch_requests(&batch, &graph);
    let tp = EncodePlan::build(
        &graph,
        &target_req,
        config.fanouts,
        &dims,
        config.dropout,
        Mode::Train,
        &mut rng,
    )?;
    let cp = EncodePlan::build(
        &graph,
        &context_req,
        config.fanouts,
        &dims,
        config.dropout,
        Mode::Train,
        &mut rng,
    )?;

    let loss_of = |d: &DualEncoder, with_grad: bool| -> Result<(f64, Vec<Tensor>)> {
        let mut tape = Tape::new();
        let tl = EncoderLeaves::register(&mut tape, &d.target);
        let cl = EncoderLeaves::register(&mut tape, &d.context);
        let t = forward(&mut tape, &tl, &d.target, &feats, &tp)?;
        let c = forward(&mut tape, &cl, &d.context, &feats, &cp)?;
        let l = record_loss(&mut tape, t.embedding, c.embedding, &pairs)?;
        let value = tape.value(l).get(0, 0);
        if !with_grad {
            return Ok((value, Vec::new()));
        }
        let grads = tape.backward(l)?;
        let g = tl
            .all()
            .chain(cl.all())
            .filter_map(|v| grads.get(v).cloned())
            .collect();
        Ok((value, g))
    };

    let (_, analytic) = loss_of(&dual, true)?;
    let mut worst = 0.0f64;
    for (k, g) in analytic.iter().enumerate() {
        for idx in 0..g.data().len() {
            let perturbed = |delta: f64| {
                let mut d = dual.clone();
                let mut params = d.target.trainable_mut();
                params.extend(d.context.trainable_mut());
                params[k].data_mut()[idx] += delta;
                loss_of(&d, false).map_or(f64::NAN, |(v, _)| v)
            };
            let numeric = central_diff(perturbed);
            worst = worst.max(relative_error(g.data()[idx], numeric));
        }
    }
    Ok(worst)
}
