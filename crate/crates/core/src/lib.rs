//! Through-wall human motion detection with stepped-frequency radar.
//!
//! The crate covers the whole processing chain:
//!
//! * [`signal_model`] synthesizes SFCW returns from a scene of static clutter
//!   and moving point scatterers (optionally behind a wall),
//! * [`range_map`] turns frequency sweeps into range/slow-time maps and
//!   provides the mean-subtraction clutter baseline,
//! * [`rpca`] splits a range map into low-rank clutter and sparse motion with
//!   an inexact augmented Lagrange multiplier solver,
//! * [`tfr`] stacks range bins and computes micro-Doppler spectrograms,
//! * [`classify`] extracts 2D-PCA features and runs kNN classification,
//! * [`pipeline`] wires everything together for the command-line tool.

pub mod archive;
pub mod classify;
pub mod dataset;
pub mod error;
pub mod export;
pub mod pipeline;
pub mod range_map;
pub mod rpca;
pub mod signal_model;
pub mod tfr;

pub use error::{Error, Result};
pub use num_complex::Complex64;
