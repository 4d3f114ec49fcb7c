//! Command-line front end for `boltzkit`.

pub mod app;
pub mod config;
pub mod demos;
pub mod error;
pub mod report;

pub use app::{run, Cli};
pub use error::CliError;
