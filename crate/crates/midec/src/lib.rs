//! Experiment harness around `midec-core`: configuration, chain fan-out,
//! bound reports and CSV/JSON artifacts.

pub mod config;
pub mod presets;
pub mod report;
pub mod runner;
