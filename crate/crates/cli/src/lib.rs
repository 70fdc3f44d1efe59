//! Library backing the `cara-kit` binary: configuration resolution, report
//! envelopes, deterministic emitters, and the subcommand implementations.

pub mod commands;
pub mod config;
pub mod emit;
pub mod report;

pub use commands::{
    bisect_threshold, cmd_bounds, cmd_check, cmd_examples, cmd_fixed_point, cmd_parse,
    example1_threshold, example1_verdict, example2_exprs, example2_holds, BoundsMode,
    CommandOutput,
};
pub use config::{ConfigError, OutputFormat, Overrides, RunConfig, CONFIG_ENV_VAR};
