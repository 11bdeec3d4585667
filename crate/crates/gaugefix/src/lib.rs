//! Files, reports and the command-line driver around [`gaugefix_core`].

pub use gaugefix_core as core;

pub mod cli;
pub mod config;
mod error;
pub mod fft;
pub mod report;
pub mod series;
pub mod snapshot;

pub use error::{HarnessError, Result};
