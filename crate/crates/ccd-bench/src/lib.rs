//! Benchmark harness for the coordinate descent solvers in `ccd-core`:
//! experiment configs, run orchestration, CSV/JSON trace emission, matrix
//! ingestion and independent cross-check oracles.
//!
//! The `ccd` binary wraps this library; the acceptance test suite drives it
//! directly.

pub mod checks;
pub mod config;
pub mod experiment;
pub mod matio;
pub mod oracles;
pub mod output;
