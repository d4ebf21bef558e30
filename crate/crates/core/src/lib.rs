//! Chase-like soft-input decoding of binary BCH codes, three evaluators for
//! the list error rate of a test-pattern set, and pattern-set design.

pub mod channel;
pub mod codes;
pub mod coverage;
pub mod decoder;
pub mod design;
pub mod error;
pub mod harness;
pub mod numeric;
pub mod order_stats;
pub mod patterns;
pub mod stats;

pub use error::{Error, Result};
