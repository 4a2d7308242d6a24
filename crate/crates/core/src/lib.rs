//! Unsupervised role embeddings with a two-depth mean-aggregator GNN.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure
//! computation over in-memory graphs; file formats, configuration parsing
//! and the command line live in the `rae` companion crate.
//!
//! Layout:
//!
//! * [`graph`]: adjacency storage, feature matrices, exemplar generators.
//! * [`numeric`]: dense matrices, the reverse-mode tape, Xavier init, Adam.
//! * [`encoder`]: the forward pass and its parameters.
//! * [`sampling`]: positive/negative samplers and batch construction.
//! * [`loss`] and [`train`]: the two objectives and the training loop.
//! * [`eval`]: linear probe, silhouette, sum readout, cross-validation.
//! * [`gradcheck`] and [`checks`]: gradient checks, sampler distribution
//!   tests and metric oracles, runnable on any build.
#![no_std]

extern crate alloc;

pub mod checks;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod gradcheck;
pub mod graph;
pub mod loss;
pub mod numeric;
pub mod rng;
pub mod sampling;
pub mod train;

pub use encoder::{DualEncoder, EncoderDims, EncoderParams, Fanouts, Mode};
pub use error::{Error, Result};
pub use graph::{FeatureMatrix, Graph, LabeledGraph};
pub use rng::Rng;
pub use train::{LossKind, Model, TrainConfig, TrainOutcome};
