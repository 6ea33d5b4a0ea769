//! The `goalbench` command-line tool and its embedded HTTP service.
//!
//! Both front ends go through [`api`], so a scenario evaluated over HTTP and
//! on the command line takes the same engine path and yields the same
//! canonical JSON.

pub mod api;
pub mod cli;
pub mod server;
