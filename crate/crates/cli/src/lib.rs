//! Command-line front end for `hbvm-core`: tableau export, spectral
//! reports, integration runs, conservation sweeps and order studies, written
//! as JSON or CSV.

pub mod app;
pub mod export;

pub use app::{run, Cli, ExitStatus};
