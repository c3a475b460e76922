use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resource limit: {what} (requested {requested}, cap {cap})")]
    Resource { what: &'static str, requested: u64, cap: u64 },

    #[error("degenerate edge at vertex {index}")]
    DegenerateEdge { index: usize },

    #[error("discrete derivative vanishes at piece {piece}, edge {edge}")]
    ZeroDiscreteDerivative { piece: usize, edge: usize },

    #[error("regularity unverified: {0}")]
    RegularityUnverified(String),

    #[error("curve is not simple: {0}")]
    NotSimple(String),

    #[error("inconsistent constants: {0}")]
    InconsistentConstants(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    /// A modelling assumption (C¹ junctions, regularity, ...) does not hold.
    #[error("validation failed ({assumption}): {detail}")]
    Validation { assumption: &'static str, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
