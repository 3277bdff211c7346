//! Command-line front end: matrix and triple files, reports and simulations.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod matrix_io;
pub mod report;
