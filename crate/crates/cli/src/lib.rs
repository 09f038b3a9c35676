//! Command-line companion to `midpoint-core`: experiment configuration,
//! binary checkpoints, CSV/text reports, SVG path plots, and the
//! train / eval / compare / oracle / plot subcommands.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod report;
pub mod svg;
