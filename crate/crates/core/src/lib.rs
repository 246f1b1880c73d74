//! Exact decomposability testing for elements of `∧^p k^n`.

pub mod cli;
pub mod corpus;
pub mod decide;
pub mod error;
pub mod exterior;
pub mod gcp;
pub mod matrix;
pub mod param;
pub mod poly;
pub mod relations;
pub mod scalar;
pub mod witness;

pub use error::{Error, Result};
pub use exterior::{IndexTuple, Multivector};
pub use scalar::{FieldSpec, Scalar};
