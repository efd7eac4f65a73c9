//! Library surface of the command-line front end: run configurations and
//! their deterministic execution. The binary is a thin argument-parsing
//! shell over [`exec::execute`].

pub mod config;
pub mod exec;

pub use config::{Command, RunConfig};
pub use exec::{execute, exit_code, render, Report, ReportBody};
