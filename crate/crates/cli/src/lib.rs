//! Command-line front end: run configuration, subcommands and SVG output.

pub mod commands;
pub mod config;
pub mod svg;

pub use commands::{BdpcArgs, FigureName, Outcome, RegionScheme};
pub use config::{RunConfig, UserConfig};
