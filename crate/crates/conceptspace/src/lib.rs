//! File formats, run manifests, threaded drivers and the `conceptspace`
//! command-line tool built on [`conceptspace_core`].

pub mod cli;
pub mod error;
pub mod format;
pub mod output;
pub mod parallel;

pub use error::{AppError, Result};
