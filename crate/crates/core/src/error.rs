use thiserror::Error;

use crate::atoms::Atom;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at column {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("invalid variable name `{name}` at column {pos}")]
    InvalidVariable { name: String, pos: usize },

    #[error("line {line}: {error}")]
    Line { line: usize, error: Box<Error> },

    #[error("conditional atom `{0}` given to the marginal engine")]
    ConditionalInMarginal(Atom),

    #[error("universe of {size} variables exceeds the supported maximum of {max}")]
    UniverseTooLarge { size: usize, max: usize },

    #[error("goal `{0}` is derivable")]
    GoalDerivable(Atom),

    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("element {0} is not integral, required by the lattice model")]
    NonIntegral(String),

    #[error("sequence contains a repeated element {0}")]
    DuplicateElement(String),

    #[error("sequence is not independent over the base (fails at position {0})")]
    NotIndependent(usize),

    #[error("requested length {n} exceeds the ambient dimension {dim}")]
    LengthExceedsDimension { n: usize, dim: usize },

    #[error("chain step {step}: property {property} violated: {detail}")]
    ChainStep {
        step: usize,
        property: &'static str,
        detail: String,
    },

    #[error("invalid proof at step {step}: {msg}")]
    InvalidProof { step: usize, msg: String },

    #[error("invalid model descriptor `{0}`")]
    ModelDescriptor(String),

    #[error("invalid vector literal `{0}`")]
    VectorLiteral(String),

    #[error("invalid team: {0}")]
    Team(String),

    #[error("{0}")]
    Invalid(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn at_line(self, line: usize) -> Error {
        Error::Line {
            line,
            error: Box::new(self),
        }
    }
}
