use std::fmt;

use thiserror::Error;

use crate::bigraded::Bidegree;

/// Which structural condition a validator found broken.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// A block of a map has the wrong shape or sits at a bidegree outside the support.
    BlockShape,
    /// A differential has the wrong bidegree for its page.
    WrongBidegree,
    /// `d ∘ d ≠ 0`.
    NotSquareZero,
    /// `dim H(A_m) ≠ dim A_{m+1}` at some bidegree.
    CharacteristicDimension { homology: usize, next_page: usize },
    /// A characteristic map is not invertible.
    CharacteristicNotInvertible,
    /// The last stored page has a nonzero differential.
    NotStable,
    /// Wrong number of characteristic maps for the number of pages.
    PageCount,
    /// Multicomplex relation `Σ_{i+j=l} (-1)^i d_i d_j = 0` fails at this `l`.
    MulticomplexRelation { l: usize },
    /// Filtration levels inconsistent with the differential.
    Filtration,
}

/// Diagnostic returned by the validators: the first failure found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub page: Option<usize>,
    pub bidegree: Option<Bidegree>,
    pub kind: ViolationKind,
    pub detail: String,
}

impl Violation {
    pub fn new(kind: ViolationKind, detail: impl Into<String>) -> Self {
        Violation {
            page: None,
            bidegree: None,
            kind,
            detail: detail.into(),
        }
    }

    pub fn at_page(mut self, page: usize) -> Self {
        self.page = Some(page);
        self
    }

    pub fn at(mut self, bidegree: Bidegree) -> Self {
        self.bidegree = Some(bidegree);
        self
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.kind)?;
        if let Some(p) = self.page {
            write!(f, " on page {p}")?;
        }
        if let Some(b) = self.bidegree {
            write!(f, " at {b}")?;
        }
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Error)]
pub enum SseqError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid object: {0}")]
    Invalid(Violation),
    #[error("map does not commute with the differentials at {bidegree}")]
    NonChainMap { bidegree: Bidegree },
    #[error("derived page {page} map is not a morphism of {page}-bigraded complexes")]
    NotAMorphism { page: usize },
    #[error("morphism is not surjective on page {page} at {bidegree}")]
    NotASurjection { page: usize, bidegree: Bidegree },
    #[error("unsupported generator: {0}")]
    UnsupportedGenerator(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl From<Violation> for SseqError {
    fn from(v: Violation) -> Self {
        SseqError::Invalid(v)
    }
}

pub type Result<T, E = SseqError> = std::result::Result<T, E>;
