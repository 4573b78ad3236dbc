//! Command-line front end: filter files, builtin filter registry, CSV
//! reports and the design/analyze/compare/simulate commands.

pub mod cli;
pub mod commands;
pub mod failure;
pub mod filter_file;
pub mod registry;
pub mod report;
