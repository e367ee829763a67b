//! Experiment harness: configuration, seeded trial execution, and
//! deterministic reporting for the search policies in `deastar-core`.

pub mod compare;
pub mod config;
pub mod format;
pub mod runner;
