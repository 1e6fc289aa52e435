//! Configuration loading, experiment dispatch and result files for the `ballpoly` binary.
// `!(x > 0.0)` is used on purpose: it rejects NaN along with the bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;
pub mod selftest;

pub use config::{load_config, parse_config, ConfigError, Kind, RunConfig};
pub use output::{write_results, OutputError};
pub use run::{run, ResultRecord, RunError, Table};
