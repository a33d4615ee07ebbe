use thiserror::Error;

use crate::rational::{fmt_q, Q};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("embedding index {index} out of range for f = {f}")]
    EmbeddingOutOfRange { index: usize, f: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("embedding {tau} is degenerate (q_tau is 0 or h)")]
    DegenerateEmbedding { tau: usize },
    #[error("multiplicity must be positive, got {}", fmt_q(.0))]
    InvalidMultiplicity(Q),
    #[error("polygon domains differ: [0, {}] vs [0, {}]", fmt_q(.left), fmt_q(.right))]
    DomainMismatch { left: Q, right: Q },
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("renormalization factor must be positive")]
    InvalidFactor,
    #[error("not a lattice: {0}")]
    NotALattice(String),
    #[error("additivity violated between nodes {lower} and {upper}")]
    AdditivityViolation { lower: usize, upper: usize },
    #[error("ambiguous lattice: distinct maximal destabilizing candidates at step {step}")]
    AmbiguousLattice { step: usize },
    #[error("subobject height {found} does not match the expected {expected}")]
    HeightMismatch { expected: u64, found: u64 },
    #[error("containment test needs d <= c, got d = {d}, c = {c}")]
    OrderViolation { d: u64, c: u64 },
    #[error("negative valuation {}", fmt_q(.0))]
    NegativeValuation(Q),
    #[error("negative exponent in period monomial")]
    NegativeExponent,
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid Raynaud datum: {0}")]
    InvalidDatum(String),
    #[error("Hasse input invalid: {0}")]
    InvalidHasse(String),
    #[error("recursion window violated; fallback lower bound {}", fmt_q(.fallback))]
    WindowViolation { fallback: Q },
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("the check applies to the mu-ordinary model only (Hasse valuations must vanish)")]
    NotMuOrdinary,
    #[error("enumeration needs {required} nodes, above the cap {cap}")]
    EnumerationCapExceeded { cap: u64, required: String },
    #[error("internal invariant breach: {0}")]
    Internal(String),
    #[error("non-integral exponent while building a crystal vector")]
    InternalNonIntegral,
    #[error("generator valuation is not below 1/(p-1)")]
    ValuationOverflow,
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// True for failures that signal a bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::Internal(_) | Error::InternalNonIntegral | Error::ValuationOverflow
        )
    }
}
