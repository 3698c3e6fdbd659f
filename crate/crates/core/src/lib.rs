//! Exact and floating-point evaluation of terminating basic hypergeometric
//! series, their transformations, and a verifiable corpus of identities.

pub mod error;
pub mod corpus;
pub mod expr;
pub mod polys;
pub mod qpoch;
pub mod scalar;
pub mod series;
pub mod transforms;

pub use error::{CorpusError, EvalError, ParseError, ScalarError, TransformError, Violation};
pub use scalar::{ExactScalar, FloatScalar, Mode, Scalar};
