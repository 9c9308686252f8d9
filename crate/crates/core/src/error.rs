use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Byte-offset parse failure for the text formats and literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: expected {}", self.offset, self.expected)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("bad literal `{input}`: {reason}")]
    Literal { input: String, reason: String },

    #[error("unsupported mechanism: {0}")]
    Unsupported(String),

    #[error("ODE integration failed at a={a}, lambda={lambda} (last u={last_u})")]
    IntegrationFailure { a: f64, lambda: f64, last_u: f64 },

    #[error("quadrature did not converge (partial value {partial}, error estimate {est_error})")]
    QuadratureFailure { partial: f64, est_error: f64 },

    #[error("tree size cap {cap} exceeded (partial size {partial_size})")]
    SizeCapExceeded { partial_size: usize, cap: usize },

    #[error("population cap {cap} exceeded at generation {generation}")]
    PopulationCapExceeded { generation: usize, cap: u64 },

    #[error("malformed Lukasiewicz path at index {index}: {reason}")]
    MalformedPath { index: usize, reason: String },

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("vertex {0:?} is not in the tree")]
    VertexNotInTree(Vec<u32>),

    #[error(
        "spine truncation too shallow: {needed} left-part vertices requested, {available} available at spine depth {spine_depth}"
    )]
    TruncationTooShallow {
        needed: usize,
        available: usize,
        spine_depth: usize,
    },

    #[error("parse error {0}")]
    Parse(#[from] ParseError),

    #[error("epsilon {eps} is below the lattice resolution {resolution}")]
    DegenerateEpsilon { eps: f64, resolution: f64 },

    #[error("degenerate configuration: {0}")]
    DegenerateConfig(String),

    #[error("inconclusive: enumeration leak {leak} exceeds tolerance {tolerance}")]
    Inconclusive { leak: f64, tolerance: f64 },

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn literal(input: &str, reason: impl Into<String>) -> Self {
        Error::Literal {
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}
