//! Configuration, orchestration and file formats for the `nls` command-line tool.

pub mod config;
pub mod formats;
pub mod run;

pub use config::{load_config, parse_config, ConfigError, Issue, RunConfig};
pub use run::{read_index, run, run_dir_name, Command, Exit, RunError, RunOptions, RunOutcome, RunRecord};
