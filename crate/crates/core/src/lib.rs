//! Exact computations with spectral sequences, their morphisms, and the
//! model-category structures they carry.

pub mod bigraded;
pub mod error;
pub mod field;
pub mod filtered;
pub mod format;
pub mod harness;
pub mod linalg;
pub mod multicomplex;
pub mod paths;
pub mod representables;
pub mod spectral;

pub use bigraded::{Bidegree, BigradedMap, BigradedModule, RComplex};
pub use error::{Result, SseqError, Violation, ViolationKind};
pub use field::{Field, Fp, Rational, F7};
pub use linalg::Matrix;
pub use spectral::{SpectralMorphism, SpectralSequence, Ss};
