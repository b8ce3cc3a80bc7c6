//! Command-line front end for the `tcrf` receptive field library.

pub mod args;
pub mod commands;
pub mod io;
