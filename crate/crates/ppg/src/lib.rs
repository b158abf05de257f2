//! Command line, JSON formats and threaded scans on top of `ppg-core`.

pub mod cli;
pub mod format;
pub mod scan;
