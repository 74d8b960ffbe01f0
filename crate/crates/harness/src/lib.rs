//! Validation, benchmarking and export on top of `tsou-core`, plus the
//! `tsou` command-line tool.

pub mod bench;
pub mod error;
pub mod export;
pub mod report;
pub mod validate;

pub use error::{Error, Result};

/// Crate version plus `git describe` of the tree it was built from.
pub const BUILD_ID: &str = env!("TSOU_BUILD_ID");
