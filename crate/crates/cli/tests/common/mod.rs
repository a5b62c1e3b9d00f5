#![allow(dead_code)]

use std::path::{Path, PathBuf};

use coopbif::config::{Experiment, ExperimentConfig};

pub fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

pub fn load(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&configs_dir().join(name)).unwrap()
}

pub fn with(name: &str, experiment: Experiment) -> ExperimentConfig {
    let mut c = load(name);
    c.experiment = Some(experiment);
    c
}
