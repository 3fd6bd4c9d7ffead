//! File formats, batch runner, studies and command-line interface built on
//! `sosnav-core`.

pub mod cli;
pub mod config;
mod error;
pub mod formats;
pub mod runner;
pub mod study;
pub mod svg;

pub use error::Error;
