//! Command-line front end for `slipstab`: configuration, CSV output and the
//! verification suite.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;
