//! Command-line front end: representation documents, reports and the
//! `morsecert` subcommands.

pub mod commands;
pub mod parallel;
pub mod precision;
pub mod report;
pub mod schema;
