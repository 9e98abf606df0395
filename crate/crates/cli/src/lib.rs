//! Config-driven front end: parse a TOML run description, run it, write CSV
//! tables, gnuplot scripts and a manifest.

pub mod config;
pub mod run;

pub use config::{parse_config, to_toml, Angle, Mode, RunConfig};
pub use run::{execute, Report, RunOptions};
