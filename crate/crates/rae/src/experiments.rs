//! The evaluation protocols, fanned out over runs.

use rae_core::eval::{
    exemplar_run, graph_eval_run, node_eval_run, EvalReport, GraphCollection, Split,
};
use rae_core::graph::{make_barbell, make_house_cycle};
use rae_core::{Fanouts, LabeledGraph, LossKind, Rng, TrainConfig};

use crate::data::{per_class_split, NodeDataset};
use crate::error::{Error, Result};
use crate::runner::run_parallel;

pub const EXEMPLAR_EPOCHS: usize = 100;
pub const EXEMPLAR_FANOUTS: (usize, usize) = (2, 4);

/// Exemplar training setup: 2 then 4 sampled neighbors, 100 epochs, other
/// hyperparameters at their defaults.
pub fn exemplar_config(loss: LossKind) -> TrainConfig {
    TrainConfig {
        loss,
        fanouts: Fanouts::new(EXEMPLAR_FANOUTS.0, EXEMPLAR_FANOUTS.1).expect("nonzero"),
        epochs: EXEMPLAR_EPOCHS,
        ..TrainConfig::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exemplar {
    House { cycle_len: usize, n_houses: usize },
    Barbell { clique_size: usize, path_len: usize },
}

impl Exemplar {
    /// Five houses on a 15-cycle, one every third cycle node.
    pub const HOUSE: Exemplar = Exemplar::House {
        cycle_len: 15,
        n_houses: 5,
    };
    pub const BARBELL: Exemplar = Exemplar::Barbell {
        clique_size: 10,
        path_len: 10,
    };

    pub fn build(self) -> Result<LabeledGraph> {
        Ok(match self {
            Exemplar::House {
                cycle_len,
                n_houses,
            } => make_house_cycle(cycle_len, n_houses)?,
            Exemplar::Barbell {
                clique_size,
                path_len,
            } => make_barbell(clique_size, path_len)?,
        })
    }
}

/// Silhouette of the role labels over `runs` independently seeded runs.
pub fn exemplar_report(
    exemplar: Exemplar,
    config: &TrainConfig,
    runs: usize,
    jobs: usize,
) -> Result<EvalReport> {
    let graph = exemplar.build()?;
    let values = run_parallel(runs, jobs, |r| {
        Ok(exemplar_run(&graph, config, config.seed, r)?)
    })?;
    Ok(EvalReport::new("silhouette", values))
}

/// The dataset's split, or 20 training nodes per class with 500 validation
/// and 1000 test nodes drawn with `seed` when it has none.
pub fn node_split(data: &NodeDataset, seed: u64) -> Result<Split> {
    if let Some(s) = &data.split {
        return Ok(s.clone());
    }
    let labels = data
        .labels
        .as_ref()
        .ok_or_else(|| Error::Usage("node evaluation needs a labels file".into()))?;
    per_class_split(labels, data.n_classes(), 20, 500, 1000, &mut Rng::new(seed))
}

/// Test accuracy of the linear probe over `runs` trainings.
pub fn node_report(
    data: &NodeDataset,
    config: &TrainConfig,
    runs: usize,
    jobs: usize,
    reg: f64,
) -> Result<EvalReport> {
    let labels = data
        .labels
        .as_ref()
        .ok_or_else(|| Error::Usage("node evaluation needs a labels file".into()))?;
    let split = node_split(data, config.seed)?;
    let values = run_parallel(runs, jobs, |r| {
        Ok(node_eval_run(
            &data.graph,
            &data.features,
            config,
            &split,
            labels,
            config.seed,
            r,
            reg,
        )?)
    })?;
    Ok(EvalReport::new("test_accuracy", values))
}

/// Cross-validated graph classification: plain probe accuracy and the
/// best-cutoff accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphReports {
    pub accuracy: EvalReport,
    pub cutoff_accuracy: EvalReport,
}

pub fn graph_report(
    data: &GraphCollection,
    config: &TrainConfig,
    folds: usize,
    runs: usize,
    jobs: usize,
    reg: f64,
) -> Result<GraphReports> {
    let scores = run_parallel(runs, jobs, |r| {
        Ok(graph_eval_run(data, config, folds, config.seed, r, reg)?)
    })?;
    Ok(GraphReports {
        accuracy: EvalReport::new("cv_accuracy", scores.iter().map(|s| s.accuracy).collect()),
        cutoff_accuracy: EvalReport::new(
            "cv_cutoff_accuracy",
            scores.iter().map(|s| s.cutoff_accuracy).collect(),
        ),
    })
}
