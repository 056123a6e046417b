use thiserror::Error;

use crate::asymptotics::Witness;
use crate::rational::format_rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },

    #[error("unknown relation `{0}`")]
    UnknownRelation(String),

    #[error("relation `{relation}` has arity {expected} but was applied to {found} argument(s)")]
    ArityMismatch { relation: String, expected: usize, found: usize },

    #[error("comparison threshold must be non-negative, got {0}")]
    NegativeThreshold(String),

    #[error("bound variable `{0}` is repeated")]
    RepeatedBoundVariable(String),

    #[error("invalid signature: {0}")]
    Signature(String),

    #[error("invalid network: {0}")]
    Network(String),

    #[error("signature is not parent-closed: `{relation}` needs parent `{parent}`")]
    NotParentClosed { relation: String, parent: String },

    #[error("free variable `{0}` is not assigned")]
    UnassignedVariable(String),

    #[error("invalid structure: {0}")]
    Structure(String),

    #[error("formula is not quantifier-free")]
    NotQuantifierFree,

    #[error("world count 2^{bits} exceeds the cap 2^{cap}")]
    WorldCapExceeded { bits: usize, cap: usize },

    #[error("{what} = {value} exceeds the configured bound {bound}")]
    BoundExceeded { what: String, value: usize, bound: usize },

    #[error("critical threshold: r = {} = {} - {}", format_rational(&.0.r), format_rational(&.0.alpha), format_rational(&.0.beta))]
    Critical(Box<Witness>),

    #[error("conditioning type has asymptotic probability 0")]
    ZeroMass,

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
