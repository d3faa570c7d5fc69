use thiserror::Error;

use crate::cfcore::Enclosure;

#[derive(Debug, Clone, Error)]
pub enum CfError {
    #[error("invalid coefficient at index {index}: {detail}")]
    InvalidCoefficient { index: usize, detail: String },

    /// A finite stream was asked for a term past its end.
    #[error("stream has no term at index {index}")]
    StreamExhausted { index: usize },

    #[error("requested width not reached within {max_terms} terms (last width {})", last.width)]
    NonConvergence { max_terms: usize, last: Box<Enclosure> },

    #[error("denominator needs {bits} bits, above the cap of {cap}")]
    ResourceExhausted { bits: u64, cap: u64 },

    #[error("equivalence scaling factor vanishes at index {index}")]
    InvalidScaling { index: usize },

    #[error("invalid linear fractional map: {0}")]
    InvalidMap(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("condition violated: {0}")]
    ConditionViolated(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("ceiling for f({n}) unresolved at {precision_bits} bits of precision")]
    TieUnresolved { n: usize, precision_bits: u32 },

    #[error("enclosure too wide to decide at n={n}: {detail}")]
    NeedsMorePrecision { n: usize, detail: String },

    #[error("invalid family parameters: {0}")]
    FamilyParam(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CfError>;
