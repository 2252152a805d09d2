//! # kme-bench
//!
//! Experiment harness for Nyström kernel mean embedding error sweeps:
//! dataset generation and CSV ingestion, error-vs-m sweeps with reproducible
//! per-trial seeding, subsample-size planning reports, and CSV emission.
//!
//! The `kme-bench` binary exposes three subcommands: `sweep` (run a
//! configured experiment), `plan` (subsample-size planning and bound
//! evaluation), and `oracle-check` (closed-form vs Monte-Carlo error
//! cross-validation).

pub mod config;
pub mod data;
mod error;
pub mod oracle_check;
pub mod plan;
pub mod sweep;

pub use error::{BenchError, Result};
