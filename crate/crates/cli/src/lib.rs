//! Command-line front end for the SSV surrogate laboratory.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

pub use commands::{cmd_eval, cmd_reproduce, cmd_solve, cmd_train, RunOptions};
pub use config::ConfigFile;
pub use error::{CliError, CliResult};
pub use manifest::RunManifest;
