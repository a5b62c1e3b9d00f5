//! Experiment runner around `coopbif-core`.
//!
//! A run reads one JSON [`config::ExperimentConfig`], executes one of the
//! canned experiments in [`experiments`], writes CSV/SVG/JSON artifacts into
//! the output directory and finishes with `manifest.json`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod output;

pub use config::{Experiment, ExperimentConfig};
pub use error::RunError;
pub use experiments::{run_experiment, OUTPUT_ROOT_ENV};
pub use manifest::{RunManifest, Verdict};
