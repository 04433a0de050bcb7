use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid drawing: {}", .0.join("; "))]
    InvalidDrawing(Vec<String>),
    #[error("unknown metric id `{0}`")]
    UnknownMetric(String),
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("edge {edge} is degenerate: its endpoints coincide")]
    DegenerateEdge { edge: usize },
    #[error("edge index {edge} out of range")]
    NoSuchEdge { edge: usize },
    #[error("incident angles undefined for node {node} of degree {degree}")]
    UndefinedForNode { node: usize, degree: usize },
}
