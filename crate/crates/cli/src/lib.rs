//! Std companion to `hotml-core`: benchmark harness, experiment config
//! files, CSV reporting, and parameter-file IO.

pub mod bench;
pub mod config;
pub mod report;
