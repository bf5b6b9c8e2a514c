//! Quasidistribution representations of multi-qubit density operators and
//! a local realistic hidden-variable model of bulk-ensemble NMR quantum
//! information processing.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bell;
pub mod cli;
pub mod error;
pub mod frames;
pub mod lrhv;
pub mod measurement;
pub mod nmr;
pub mod oracle;
pub mod pauli;
pub mod quasi;

pub use error::{Error, Result};
