//! The run configuration: one JSON document fully determines a run.
//!
//! ```json
//! {
//!   "grid": { "dimension": 1, "extents": [1.0], "n": 127 },
//!   "coupling": { "a": 2, "b": 1, "c": 1, "d": 2 },
//!   "kernel_k": { "type": "constant", "value": 1 },
//!   "kernel_gamma": { "type": "constant", "value": 1 },
//!   "crowding_f": { "type": "power_sum", "gamma": 1, "c1": 1, "c2": 1 },
//!   "crowding_g": { "type": "power_sum", "gamma": 1, "c1": 1, "c2": 1 },
//!   "mode": "TP1",
//!   "output_dir": "runs/acceptance",
//!   "seed": 7
//! }
//! ```
//!
//! Coupling entries may be written as multiples of the discrete principal
//! eigenvalue, `{ "lambda1": 0.5 }`. Parameters in `knobs` that name a value
//! of `t` accept either a number or a string such as `"2t1"`.

use std::path::{Path, PathBuf};

use coopbif_core::bifurcation::Mode;
use coopbif_core::discretization::{assemble_laplacian, build_grid, quadrature_weights, DomainSpec, Grid};
use coopbif_core::nonlocal::{sample_kernel, CrowdingFunction, KernelSpec, NonlocalPair, NonlocalTerm};
use coopbif_core::operators::{NewtonOptions, NonlocalSystem};
use coopbif_core::spectral::{discrete_spectrum, CouplingMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{from_setup, RunError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    pub coupling: CouplingConfig,
    pub kernel_k: KernelConfig,
    pub kernel_gamma: KernelConfig,
    pub crowding_f: CrowdingConfig,
    pub crowding_g: CrowdingConfig,
    pub mode: ModeConfig,
    /// Set by the command-line verb when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub knobs: Knobs,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dimension: usize,
    pub extents: Vec<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Value(f64),
    Lambda1Multiple { lambda1: f64 },
}

impl Entry {
    fn resolve(self, lambda1: f64) -> f64 {
        match self {
            Entry::Value(v) => v,
            Entry::Lambda1Multiple { lambda1: k } => k * lambda1,
        }
    }

    fn needs_lambda1(self) -> bool {
        matches!(self, Entry::Lambda1Multiple { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub a: Entry,
    pub b: Entry,
    pub c: Entry,
    pub d: Entry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    Constant {
        value: f64,
    },
    /// `ρ(x)ρ(y)`, `ρ` the product over coordinates of the polynomial with
    /// these coefficients (lowest degree first).
    Separable {
        profile: Vec<f64>,
    },
    Indicator {
        radius: f64,
    },
    Tabulated {
        rows: Vec<Vec<f64>>,
    },
}

impl KernelConfig {
    fn spec(&self) -> KernelSpec {
        match self {
            KernelConfig::Constant { value } => KernelSpec::Constant(*value),
            KernelConfig::Separable { profile } => KernelSpec::Separable { profile: profile.clone() },
            KernelConfig::Indicator { radius } => KernelSpec::Indicator { radius: *radius },
            KernelConfig::Tabulated { rows } => KernelSpec::Tabulated { rows: rows.clone() },
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CrowdingConfig {
    /// `c1·tᵞ + c2·sᵞ`.
    PowerSum {
        gamma: f64,
        #[serde(default = "one")]
        c1: f64,
        #[serde(default = "one")]
        c2: f64,
    },
    /// `tᵞ + s^(γ−m)·tᵐ`, `0 < m < γ`.
    MixedPower { gamma: f64, m: f64 },
    /// `rᵞ·h(θ)`, `h` sampled uniformly on `[0, π/2]`.
    Tabulated { gamma: f64, angular: Vec<f64> },
}

impl CrowdingConfig {
    fn build(&self) -> coopbif_core::Result<CrowdingFunction> {
        match self {
            CrowdingConfig::PowerSum { gamma, c1, c2 } => CrowdingFunction::power_sum(*gamma, *c1, *c2),
            CrowdingConfig::MixedPower { gamma, m } => CrowdingFunction::mixed_power(*gamma, *m),
            CrowdingConfig::Tabulated { gamma, angular } => CrowdingFunction::tabulated(*gamma, angular.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeConfig {
    #[serde(rename = "TP1")]
    Tp1,
    #[serde(rename = "TP2")]
    Tp2,
}

impl From<ModeConfig> for Mode {
    fn from(m: ModeConfig) -> Mode {
        match m {
            ModeConfig::Tp1 => Mode::Tp1,
            ModeConfig::Tp2 => Mode::Tp2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Solve,
    Branch,
    Threshold,
    LemmaE,
    Audit,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Solve => "solve",
            Experiment::Branch => "branch",
            Experiment::Threshold => "threshold",
            Experiment::LemmaE => "lemma-e",
            Experiment::Audit => "audit",
        }
    }
}

/// A value of `t`: a number, or a multiple of `t₁` written `"t1"`, `"2t1"`,
/// `"1.01t1"`, `"0.5*t1"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TValue {
    Number(f64),
    Text(String),
}

impl TValue {
    pub fn resolve(&self, t1: f64) -> Result<f64, RunError> {
        match self {
            TValue::Number(v) => Ok(*v),
            TValue::Text(s) => parse_t(s, t1),
        }
    }
}

impl std::str::FromStr for TValue {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().parse::<f64>() {
            Ok(v) => TValue::Number(v),
            Err(_) => TValue::Text(s.trim().to_string()),
        })
    }
}

fn parse_t(s: &str, t1: f64) -> Result<f64, RunError> {
    let bad = || RunError::Config(format!("cannot read `{s}` as a value of t (try 1.5 or 2t1)"));
    let s = s.trim();
    let Some(head) = s.strip_suffix("t1").or_else(|| s.strip_suffix("t₁")) else {
        return s.parse().map_err(|_| bad());
    };
    let head = head.trim().trim_end_matches('*').trim();
    let k: f64 = if head.is_empty() { 1.0 } else { head.parse().map_err(|_| bad())? };
    Ok(k * t1)
}

/// Numerical knobs; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Knobs {
    pub newton_tolerance: f64,
    pub newton_max_iterations: usize,
    pub newton_max_halvings: usize,
    pub zero_threshold: f64,
    /// Eigenpairs of `-Δ_h` to compute (at least 3).
    pub eigenpairs: usize,
    /// `solve`: parameter value.
    pub t: Option<TValue>,
    /// `branch`, `audit`: continuation end point.
    pub t_max: TValue,
    /// `threshold`: bracket and bisection tolerance.
    pub t_lo: TValue,
    pub t_hi: TValue,
    pub bisect_tol: f64,
    /// `threshold`: accepted relative distance of `t_star` from `t₁`.
    pub threshold_tolerance: f64,
    /// `threshold`: random positive starts probed at `below_factor·t₁`.
    pub random_starts: usize,
    pub below_factor: f64,
    /// `threshold`, `solve`: upper end of the uniform random starts.
    pub random_start_scale: f64,
    pub initial_offset: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// Absent means unbounded.
    pub amplitude_cap: Option<f64>,
    pub max_points: usize,
    /// `sign_check` window on `|t − t₁| + ‖U‖_∞`.
    pub sign_window: f64,
    /// `apriori_monitor` cap on the observed amplitude.
    pub apriori_cap: f64,
    /// `lemma-e`: relative singular-value threshold.
    pub kernel_threshold: f64,
    /// Random trials of the kernel-class check.
    pub kernel_trials: usize,
}

impl Default for Knobs {
    fn default() -> Self {
        Self {
            newton_tolerance: 1e-10,
            newton_max_iterations: 50,
            newton_max_halvings: 20,
            zero_threshold: 1e-8,
            eigenpairs: 3,
            t: None,
            t_max: TValue::Text("2t1".into()),
            t_lo: TValue::Text("0.5t1".into()),
            t_hi: TValue::Text("2t1".into()),
            bisect_tol: 1e-3,
            threshold_tolerance: 1e-2,
            random_starts: 20,
            below_factor: 0.9,
            random_start_scale: 5.0,
            initial_offset: 1e-2,
            initial_step: 0.05,
            min_step: 1e-6,
            max_step: 0.5,
            amplitude_cap: None,
            max_points: 400,
            sign_window: 1.0,
            apriori_cap: 1e6,
            kernel_threshold: 1e-8,
            kernel_trials: 200,
        }
    }
}

impl Knobs {
    pub fn newton(&self) -> NewtonOptions {
        NewtonOptions {
            tolerance: self.newton_tolerance,
            max_iterations: self.newton_max_iterations,
            max_halvings: self.newton_max_halvings,
            zero_threshold: self.zero_threshold,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Schema checks that need no computation.
    pub fn validate(&self) -> Result<(), RunError> {
        let k = &self.knobs;
        let positive = [
            ("newton_tolerance", k.newton_tolerance),
            ("zero_threshold", k.zero_threshold),
            ("bisect_tol", k.bisect_tol),
            ("threshold_tolerance", k.threshold_tolerance),
            ("below_factor", k.below_factor),
            ("random_start_scale", k.random_start_scale),
            ("initial_offset", k.initial_offset),
            ("initial_step", k.initial_step),
            ("min_step", k.min_step),
            ("max_step", k.max_step),
            ("sign_window", k.sign_window),
            ("apriori_cap", k.apriori_cap),
            ("kernel_threshold", k.kernel_threshold),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(RunError::Config(format!("knob `{name}` must be positive and finite, got {v}")));
            }
        }
        if let Some(cap) = k.amplitude_cap {
            if !(cap >= 0.0) {
                return Err(RunError::Config(format!("amplitude_cap must be nonnegative, got {cap}")));
            }
        }
        if k.min_step > k.initial_step || k.initial_step > k.max_step {
            return Err(RunError::Config("need min_step ≤ initial_step ≤ max_step".into()));
        }
        if k.eigenpairs < 3 {
            return Err(RunError::Config("eigenpairs must be at least 3".into()));
        }
        if k.newton_max_iterations == 0 || k.max_points < 2 {
            return Err(RunError::Config("newton_max_iterations ≥ 1 and max_points ≥ 2 required".into()));
        }
        if self.mode == ModeConfig::Tp2 && (self.kernel_k != self.kernel_gamma || self.crowding_f != self.crowding_g) {
            return Err(RunError::Config(
                "mode TP2 requires kernel_k = kernel_gamma and crowding_f = crowding_g".into(),
            ));
        }
        Ok(())
    }

    pub fn experiment(&self) -> Result<Experiment, RunError> {
        self.experiment.ok_or_else(|| RunError::Config("no experiment selected".into()))
    }

    /// `output_dir`, placed under `root` when it is relative.
    pub fn resolve_output(&self, root: Option<&Path>) -> PathBuf {
        match root {
            Some(r) if self.output_dir.is_relative() => r.join(&self.output_dir),
            _ => self.output_dir.clone(),
        }
    }

    pub fn build_grid(&self) -> Result<Grid, RunError> {
        build_grid(DomainSpec { dimension: self.grid.dimension, extents: &self.grid.extents, n: self.grid.n })
            .map_err(from_setup)
    }

    /// The coupling matrix, resolving `lambda1` multiples against the
    /// discrete principal eigenvalue of `grid`.
    pub fn coupling_matrix(&self, grid: &Grid) -> Result<CouplingMatrix, RunError> {
        let c = self.coupling;
        let entries = [c.a, c.b, c.c, c.d];
        let lambda1 = if entries.iter().any(|e| e.needs_lambda1()) {
            discrete_spectrum(&assemble_laplacian(grid), 1).map_err(from_setup)?.lambda1()
        } else {
            f64::NAN
        };
        let [a, b, cc, d] = entries.map(|e| e.resolve(lambda1));
        CouplingMatrix::new(a, b, cc, d).map_err(from_setup)
    }

    pub fn build_system(&self) -> Result<NonlocalSystem, RunError> {
        let grid = self.build_grid()?;
        let weights = quadrature_weights(&grid);
        let term = |k: &KernelConfig, f: &CrowdingConfig| -> Result<NonlocalTerm, RunError> {
            let m = sample_kernel(&k.spec(), &grid).map_err(from_setup)?;
            NonlocalTerm::new(m, weights.clone(), f.build().map_err(from_setup)?).map_err(from_setup)
        };
        let pair =
            NonlocalPair::new(term(&self.kernel_k, &self.crowding_f)?, term(&self.kernel_gamma, &self.crowding_g)?)
                .map_err(from_setup)?;
        let coupling = self.coupling_matrix(&grid)?;
        let lap = assemble_laplacian(&grid);
        NonlocalSystem::new(grid, lap, coupling, pair).map_err(from_setup)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_values() {
        let t1 = 3.0;
        assert_eq!(parse_t("2t1", t1).unwrap(), 6.0);
        assert_eq!(parse_t("t1", t1).unwrap(), 3.0);
        assert_eq!(parse_t("0.5*t1", t1).unwrap(), 1.5);
        assert_eq!(parse_t("1.25", t1).unwrap(), 1.25);
        assert!(parse_t("two", t1).is_err());
        assert_eq!("2t1".parse::<TValue>().unwrap(), TValue::Text("2t1".into()));
        assert_eq!("4".parse::<TValue>().unwrap(), TValue::Number(4.0));
    }
}
