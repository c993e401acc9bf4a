//! Command-line front end: JSON configuration, subcommands, CSV/JSON/SVG output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

pub use commands::{main_with_args, run, Cli};
pub use config::{load_config, parse_config, RunConfig};
pub use error::{CliError, CliResult};
