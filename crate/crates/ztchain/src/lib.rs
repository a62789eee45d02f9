//! Command line, chain files and configuration on top of `ztchain-core`.

pub mod cli;
pub mod config;
pub mod exports;
pub mod io;

pub use cli::{dispatch, dispatch_with};
