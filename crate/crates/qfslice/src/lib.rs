//! Linear slices of quasi-Fuchsian once-punctured-torus space: grid
//! scans, component counting, pleating rays, limit sets and file output.
//!
//! The numerical core (matrices, trace recursions, the Bowditch-condition
//! classifier) lives in `qfslice-core`; this crate adds the τ-strip grid
//! machinery, rasterization and the `qfslice` command-line tool.

pub mod cli;
pub mod render;
pub mod slicescan;

pub use qfslice_core as core;
pub use qfslice_core::bq::BqParams;

use thiserror::Error;

/// Errors of the scanning and rendering layer.
#[derive(Debug, Error)]
pub enum SliceError {
    #[error("{0}")]
    Core(#[from] qfslice_core::Error),
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("window too narrow: component counting needs Re ∈ [{need_lo}, {need_hi}] inside [{got_lo}, {got_hi}]")]
    WindowTooNarrow {
        need_lo: f64,
        need_hi: f64,
        got_lo: f64,
        got_hi: f64,
    },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}
