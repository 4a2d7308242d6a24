//! Sum readout and stratified cross-validation for graph classification.

use alloc::vec::Vec;

use super::probe::{accuracy, fit_logreg_l2};
use crate::error::{Error, Result};
use crate::numeric::{sigmoid, Tensor};
use crate::rng::Rng;

/// Per-graph elementwise sum of node embeddings. `membership[u]` is the
/// graph of node `u`; graphs are numbered `0..n_graphs`.
pub fn graph_readout_sum(
    node_embeddings: &Tensor,
    membership: &[usize],
    n_graphs: usize,
) -> Result<Tensor> {
    if membership.len() != node_embeddings.rows() {
        return Err(Error::ShapeMismatch(
            "one graph id per node required".into(),
        ));
    }
    let mut out = Tensor::zeros(n_graphs, node_embeddings.cols());
    for (u, &g) in membership.iter().enumerate() {
        if g >= n_graphs {
            return Err(Error::InvalidArgument(alloc::format!(
                "node {u} assigned to graph {g} of {n_graphs}"
            )));
        }
        for (o, v) in out.row_mut(g).iter_mut().zip(node_embeddings.row(u)) {
            *o += v;
        }
    }
    Ok(out)
}

/// Assigns each sample a fold in `0..folds`, keeping class proportions
/// balanced: each class is shuffled and dealt round-robin, continuing where
/// the previous class stopped.
pub fn stratified_folds(labels: &[usize], folds: usize, rng: &mut Rng) -> Result<Vec<usize>> {
    if folds < 2 || labels.len() < folds {
        return Err(Error::InvalidConfig(alloc::format!(
            "{} samples cannot fill {folds} folds",
            labels.len()
        )));
    }
    let n_classes = labels.iter().max().map_or(0, |&m| m + 1);
    let mut assignment = alloc::vec![0; labels.len()];
    let mut next = 0;
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        rng.shuffle(&mut members);
        for i in members {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

/// Best accuracy over every cutoff on `scores`, thresholding at `score ≥ c`.
/// The 0.5 cutoff is always a candidate.
pub fn best_cutoff_accuracy(scores: &[f64], truth: &[bool]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let mut cutoffs: Vec<f64> = scores.to_vec();
    cutoffs.push(0.5);
    cutoffs.push(f64::INFINITY);
    cutoffs
        .iter()
        .map(|&c| {
            let hits = scores
                .iter()
                .zip(truth)
                .filter(|(&s, &t)| (s >= c) == t)
                .count();
            hits as f64 / truth.len() as f64
        })
        .fold(0.0, f64::max)
}

/// Mean fold accuracies of one cross-validation pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvScores {
    /// Standard prediction (argmax, or probability 0.5 for binary tasks).
    pub accuracy: f64,
    /// Binary tasks: best cutoff chosen on each test fold. Equal to
    /// `accuracy` for multiclass tasks.
    pub cutoff_accuracy: f64,
}

/// Stratified `folds`-fold cross-validation of the L2 probe.
pub fn cross_validate(
    vectors: &Tensor,
    labels: &[usize],
    folds: usize,
    reg_strength: f64,
    rng: &mut Rng,
) -> Result<CvScores> {
    if vectors.rows() != labels.len() {
        return Err(Error::ShapeMismatch("one label per vector required".into()));
    }
    let assignment = stratified_folds(labels, folds, rng)?;
    let binary = labels.iter().all(|&c| c < 2);
    let (mut plain, mut cut) = (0.0, 0.0);
    for f in 0..folds {
        let train: Vec<usize> = (0..labels.len()).filter(|&i| assignment[i] != f).collect();
        let test: Vec<usize> = (0..labels.len()).filter(|&i| assignment[i] == f).collect();
        let x_train = vectors.select_rows(&train);
        let y_train: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
        let x_test = vectors.select_rows(&test);
        let y_test: Vec<usize> = test.iter().map(|&i| labels[i]).collect();
        let probe = fit_logreg_l2(&x_train, &y_train, reg_strength)?;
        let acc = accuracy(&probe.predict(&x_test), &y_test);
        plain += acc;
        cut += if binary && probe.n_classes == 2 {
            let scores: Vec<f64> = (0..x_test.rows())
                .map(|i| sigmoid(probe.models[0].decision(x_test.row(i))))
                .collect();
            let truth: Vec<bool> = y_test.iter().map(|&c| c == 1).collect();
            best_cutoff_accuracy(&scores, &truth)
        } else {
            acc
        };
    }
    Ok(CvScores {
        accuracy: plain / folds as f64,
        cutoff_accuracy: cut / folds as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn readout_single_node_graph() {
        let z = Tensor::from_rows(&[
            alloc::vec![1.0, 2.0],
            alloc::vec![3.0, 4.0],
            alloc::vec![5.0, 6.0],
        ])
        .unwrap();
        let r = graph_readout_sum(&z, &[0, 1, 0], 2).unwrap();
        assert_eq!(r.row(0), &[6.0, 8.0]);
        assert_eq!(r.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn folds_are_stratified() {
        let labels: Vec<usize> = (0..100).map(|i| usize::from(i < 30)).collect();
        let a = stratified_folds(&labels, 10, &mut Rng::new(1)).unwrap();
        for f in 0..10 {
            let members: Vec<usize> = (0..100).filter(|&i| a[i] == f).collect();
            assert_eq!(members.len(), 10);
            assert_eq!(members.iter().filter(|&&i| labels[i] == 1).count(), 3);
        }
    }

    #[test]
    fn too_few_samples_for_folds() {
        assert!(matches!(
            stratified_folds(&[0, 1, 0], 10, &mut Rng::new(0)),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn cutoff_sweep_finds_separating_threshold() {
        let scores = [0.1, 0.2, 0.3, 0.35];
        let truth = [false, false, true, true];
        assert_eq!(best_cutoff_accuracy(&scores, &truth), 1.0);
    }

    #[test]
    fn label_correlated_vectors_classify_perfectly() {
        let labels: Vec<usize> = (0..40).map(|i| i % 2).collect();
        let rows: Vec<Vec<f64>> = labels
            .iter()
            .map(|&c| alloc::vec![if c == 1 { 3.0 } else { -3.0 }])
            .collect();
        let x = Tensor::from_rows(&rows).unwrap();
        let s = cross_validate(&x, &labels, 10, 1.0, &mut Rng::new(2)).unwrap();
        assert_eq!(s.accuracy, 1.0);
        assert_eq!(s.cutoff_accuracy, 1.0);
    }
}
