//! Command-line front end: `sample`, `analyze`, `trials` and `bench`.

pub mod bench;
pub mod commands;
pub mod report;
pub mod svg;
pub mod trials;

pub use commands::{run, Cli};
