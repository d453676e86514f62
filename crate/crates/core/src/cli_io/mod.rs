//! Configuration parsing, subcommands and table output.

pub mod commands;
pub mod config;
pub mod table;

pub use commands::{run_subcommand, solve_spec, Subcommand};
pub use config::{parse_config, Format, RunConfig};
pub use table::{write_table, write_tables, ResultTable};
