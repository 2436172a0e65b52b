//! File formats, chat endpoints, and run orchestration around the pure
//! algorithms of `nestweak-core`. The `nestweak` binary in this crate wires
//! everything into subcommands.

pub mod assets;
pub mod config;
pub mod error;
pub mod format;
pub mod llm;
pub mod provenance;
pub mod report;

pub use error::ToolError;
