//! Negative-sampling objectives.
//!
//! Both losses share one form over (anchor, positive, negatives) triples:
//! `-[logσ(a·p) + Q · mean_w logσ(-a·w)]`, summed over triples. They differ
//! only in how positives and negatives are chosen (see [`crate::sampling`]).

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numeric::{logsigmoid, Tape, Var};

/// One positive pair and the negatives contrasted with its anchor.
#[derive(Debug, Clone, Copy)]
pub struct Triple<'a> {
    pub anchor: &'a [f64],
    pub positive: &'a [f64],
    pub negatives: &'a [&'a [f64]],
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn negative_sampling(triples: &[Triple<'_>], q: usize) -> Result<f64> {
    let mut total = 0.0;
    for t in triples {
        if t.positive.len() != t.anchor.len()
            || t.negatives.iter().any(|w| w.len() != t.anchor.len())
        {
            return Err(Error::ShapeMismatch("embedding widths differ".into()));
        }
        let mut term = logsigmoid(dot(t.anchor, t.positive));
        if !t.negatives.is_empty() {
            let mean: f64 = t
                .negatives
                .iter()
                .map(|w| logsigmoid(-dot(t.anchor, w)))
                .sum::<f64>()
                / t.negatives.len() as f64;
            term += q as f64 * mean;
        }
        total -= term;
    }
    Ok(total)
}

/// Within-node loss: anchor and positive are two encodings of one node.
pub fn loss_within(triples: &[Triple<'_>], q: usize) -> Result<f64> {
    negative_sampling(triples, q)
}

/// Neighbor loss: the positive is an encoding of a graph neighbor.
pub fn loss_neighbor(triples: &[Triple<'_>], q: usize) -> Result<f64> {
    negative_sampling(triples, q)
}

/// Row pairing of a batch on the tape: rows of the target embedding against
/// rows of the context embedding.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairIndex {
    pub positives: Vec<(usize, usize)>,
    pub negatives: Vec<(usize, usize)>,
}

/// Records the summed loss for `pairs`, where every anchor row carries
/// exactly `Q` negative pairs so that `Q · mean` is a plain sum.
pub fn record_loss(
    tape: &mut Tape<'_>,
    target: Var,
    context: Var,
    pairs: &PairIndex,
) -> Result<Var> {
    let signed: Vec<(usize, usize, f64)> = pairs
        .positives
        .iter()
        .map(|&(i, j)| (i, j, 1.0))
        .chain(pairs.negatives.iter().map(|&(i, j)| (i, j, -1.0)))
        .collect();
    let scores = tape.pair_dot(target, context, signed)?;
    let logs = tape.logsigmoid(scores);
    let total = tape.sum(logs);
    Ok(tape.scale(total, -1.0))
}
