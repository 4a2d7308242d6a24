//! Downstream evaluation of embeddings.

mod cv;
mod probe;
mod silhouette;

pub use cv::{best_cutoff_accuracy, cross_validate, graph_readout_sum, stratified_folds, CvScores};
pub use probe::{accuracy, fit_binary, fit_logreg_l2, BinaryLogit, LogisticProbe, GRAD_TOL};
pub use silhouette::silhouette;

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{neighbor_degree_features, FeatureMatrix, Graph, LabeledGraph};
use crate::rng::{mix_seed, Rng};
use crate::train::{train, Model, TrainConfig};

/// Default L2 strength of the probe (penalty `λ/2 · |w|²`).
pub const DEFAULT_REG_STRENGTH: f64 = 1.0;

/// Disjoint train/validation/test node sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    pub fn new(
        train: Vec<usize>,
        validation: Vec<usize>,
        test: Vec<usize>,
        n_nodes: usize,
    ) -> Result<Self> {
        let mut owner = alloc::vec![0u8; n_nodes];
        for (tag, set) in [(1u8, &train), (2, &validation), (3, &test)] {
            for &u in set {
                if u >= n_nodes {
                    return Err(Error::InvalidNode { node: u, n_nodes });
                }
                if owner[u] != 0 {
                    return Err(Error::InvalidArgument(alloc::format!(
                        "node {u} appears in more than one split"
                    )));
                }
                owner[u] = tag;
            }
        }
        Ok(Self {
            train,
            validation,
            test,
        })
    }
}

/// Per-run values of one metric with their summary.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub metric: String,
    pub values: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (zero for a single run).
    pub std: f64,
}

impl EvalReport {
    pub fn new(metric: impl Into<String>, values: Vec<f64>) -> Self {
        let n = values.len() as f64;
        let mean = if values.is_empty() {
            0.0
        } else {
            values.iter().sum::<f64>() / n
        };
        let std = if values.len() < 2 {
            0.0
        } else {
            libm::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0))
        };
        Self {
            metric: metric.into(),
            values,
            mean,
            std,
        }
    }

    pub fn runs(&self) -> usize {
        self.values.len()
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.std / libm::sqrt(self.values.len() as f64)
        }
    }
}

/// Config of run `run`: same hyperparameters, seed derived from `base_seed`.
pub fn run_config(config: &TrainConfig, base_seed: u64, run: usize) -> TrainConfig {
    TrainConfig {
        seed: mix_seed(base_seed, run as u64),
        ..config.clone()
    }
}

/// Probe accuracy on `split.test` after fitting on `split.train`.
pub fn probe_accuracy(
    embeddings: &crate::numeric::Tensor,
    labels: &[usize],
    split: &Split,
    reg: f64,
) -> Result<f64> {
    if labels.len() != embeddings.rows() {
        return Err(Error::ShapeMismatch("one label per node required".into()));
    }
    let x_train = embeddings.select_rows(&split.train);
    let y_train: Vec<usize> = split.train.iter().map(|&u| labels[u]).collect();
    let probe = fit_logreg_l2(&x_train, &y_train, reg)?;
    let x_test = embeddings.select_rows(&split.test);
    let y_test: Vec<usize> = split.test.iter().map(|&u| labels[u]).collect();
    Ok(probe.accuracy(&x_test, &y_test))
}

/// One node-classification run: train with the run's seed, embed every node
/// in inference mode, fit the probe on the training nodes, score the test
/// nodes. The validation nodes are not used.
#[allow(clippy::too_many_arguments)]
pub fn node_eval_run(
    graph: &Graph,
    features: &FeatureMatrix,
    config: &TrainConfig,
    split: &Split,
    labels: &[usize],
    base_seed: u64,
    run: usize,
    reg: f64,
) -> Result<f64> {
    let cfg = run_config(config, base_seed, run);
    let outcome = train(graph, features, &cfg)?;
    let z = outcome
        .model
        .embed(graph, features, &mut Rng::for_run(cfg.seed, 1000))?;
    probe_accuracy(&z, labels, split, reg)
}

#[allow(clippy::too_many_arguments)]
pub fn node_eval(
    graph: &Graph,
    features: &FeatureMatrix,
    config: &TrainConfig,
    split: &Split,
    labels: &[usize],
    runs: usize,
    base_seed: u64,
    reg: f64,
) -> Result<EvalReport> {
    let values = (0..runs)
        .map(|r| node_eval_run(graph, features, config, split, labels, base_seed, r, reg))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::new("test_accuracy", values))
}

/// Feature cap used for neighbor-degree features throughout.
pub const DEGREE_FEATURE_CAP: usize = 30;

/// One exemplar run: neighbor-degree features, training, inference-mode
/// embeddings, silhouette against the role labels.
pub fn exemplar_run(
    exemplar: &LabeledGraph,
    config: &TrainConfig,
    base_seed: u64,
    run: usize,
) -> Result<f64> {
    let cfg = run_config(config, base_seed, run);
    let mut rng = Rng::for_run(cfg.seed, 1000);
    let feats = neighbor_degree_features(&exemplar.graph, DEGREE_FEATURE_CAP, &mut rng)?;
    let outcome = train(&exemplar.graph, &feats, &cfg)?;
    let z = outcome.model.embed(&exemplar.graph, &feats, &mut rng)?;
    silhouette(&z, &exemplar.role_labels)
}

/// A collection of small graphs stored as one disjoint union.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphCollection {
    pub union: Graph,
    /// Graph id of every node of `union`.
    pub membership: Vec<usize>,
    pub graph_labels: Vec<usize>,
    /// Optional per-node categories appended as one-hot features.
    pub node_categories: Option<(Vec<usize>, usize)>,
}

impl GraphCollection {
    pub fn n_graphs(&self) -> usize {
        self.graph_labels.len()
    }

    /// Neighbor-degree features (capped at 30) with node categories appended.
    pub fn features(&self, rng: &mut Rng) -> Result<FeatureMatrix> {
        let base = neighbor_degree_features(&self.union, DEGREE_FEATURE_CAP, rng)?;
        match &self.node_categories {
            Some((cats, k)) => base.append_one_hot(cats, *k),
            None => Ok(base),
        }
    }
}

/// One graph-classification run: fresh features and model for the run's
/// seed (trained only when `config.epochs > 0`), sum readout, stratified
/// cross-validation.
pub fn graph_eval_run(
    data: &GraphCollection,
    config: &TrainConfig,
    folds: usize,
    base_seed: u64,
    run: usize,
    reg: f64,
) -> Result<CvScores> {
    let cfg = run_config(config, base_seed, run);
    let mut rng = Rng::for_run(cfg.seed, 1000);
    let feats = data.features(&mut rng)?;
    let model = if cfg.epochs == 0 {
        Model::xavier(&cfg, feats.n_cols(), &mut Rng::for_run(cfg.seed, 0))?
    } else {
        train(&data.union, &feats, &cfg)?.model
    };
    let z = model.embed(&data.union, &feats, &mut rng)?;
    let vectors = graph_readout_sum(&z, &data.membership, data.n_graphs())?;
    cross_validate(&vectors, &data.graph_labels, folds, reg, &mut rng)
}
