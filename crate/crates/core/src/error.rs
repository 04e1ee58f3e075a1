use thiserror::Error;

use crate::model::{EdgeId, NodeId, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),

    #[error("no edge between nodes {0} and {1}")]
    NoSuchEdge(NodeId, NodeId),

    #[error("labeling coverage mismatch: {0}")]
    Coverage(String),

    #[error("label {label} out of range for node {node} with {count} labels")]
    LabelOutOfRange {
        node: NodeId,
        label: usize,
        count: usize,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("node {0} has no finite unary cost")]
    InfeasibleNode(NodeId),

    #[error("edge {0} has no finite pairwise cost")]
    InfeasibleEdge(EdgeId),

    #[error("search space of {size} labelings exceeds the cap of {cap}")]
    CapExceeded { size: u128, cap: u128 },

    #[error("invalid model: {}", format_violations(.0))]
    InvalidModel(Vec<Violation>),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("factor {factor} has unsupported arity {arity}")]
    UnsupportedArity { factor: usize, arity: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
