//! Scenario files, data formats and the batch pipeline behind the `mvmf`
//! command.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod formats;
pub mod pipeline;
pub mod scenario;

pub use error::{CliError, Result};
pub use scenario::Scenario;
