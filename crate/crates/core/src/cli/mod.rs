//! Batch front end: run configs, trajectory CSV and report files, SVG plots.

pub mod commands;
pub mod config;
pub mod csv;
pub mod plot;
pub mod report;

pub use config::RunConfig;
