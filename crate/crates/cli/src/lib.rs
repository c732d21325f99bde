//! Config-driven experiment runner for `cubelab`.

pub mod catalog;
pub mod config;
pub mod record;
pub mod runner;
pub mod seeds;
pub mod validate;

pub use config::{
    load_config, parse_config, ConfigError, ExperimentConfig, Format, Kind, LoadedConfig,
};
pub use record::{Assertion, Cell, RunRecord, Table};
pub use runner::{run, RunError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
