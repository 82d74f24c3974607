//! Library surface of the accring command-line front end: config
//! parsing, CSV serialization, and the command implementations.

pub mod commands;
pub mod config;
pub mod io;
