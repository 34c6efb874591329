//! Parallel drivers, text descriptors, config and output formats, and the
//! named experiments behind the `powerfree` command.
//!
//! Every driver splits its range into fixed segments, computes them on a
//! rayon pool and merges in segment order, so results do not depend on the
//! thread count.

pub mod cli;
pub mod config;
pub mod descriptor;
mod error;
pub mod output;
pub mod parallel;
pub mod repro;

pub use error::{LabError, Result};
pub use parallel::Runner;
