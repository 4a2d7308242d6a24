use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("node {node} out of range for graph with {n_nodes} nodes")]
    InvalidNode { node: usize, n_nodes: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("no valid negative example for node {node}")]
    NoValidNegative { node: usize },
    #[error("cannot derange a batch of {len} node(s)")]
    CannotDerange { len: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("numeric fault: {0}")]
    NumericFault(String),
    #[error("labels must contain at least two classes")]
    DegenerateLabels,
    #[error("silhouette is undefined for fewer than two non-empty clusters")]
    UndefinedSilhouette,
}
