//! Command-line front end and JSON service for `umbd-core`.

pub mod cli;
pub mod server;

pub use cli::{exit_code, run};
pub use server::router;
