//! Experiment harness for the `pcsbl` solvers: synthetic block-sparse signals,
//! noise injection, recovery metrics, PGM/CSV I/O and the sweep protocols
//! driven by the `pcsbl` command-line tool.

pub mod error;
pub mod experiments;
pub mod io;
pub mod metrics;
pub mod pgm;
pub mod signal;

pub use error::{BenchError, Result};
pub use experiments::{Algorithm, ExperimentConfig, TrialRecord};
