//! TOML experiment configuration.
//!
//! ```toml
//! [experiment]
//! system = "fock_xp"          # or "spin"
//! chi = [0.5, 1.0, 1.5]       # a number or a sweep list
//! chi_prime = 5.0
//! n_single = 15000
//! n_joint = 30000
//! trials = 20
//! master_seed = 2019
//! probes = [[0.0, 0.0]]
//! c_o = 0.011
//! lambda_c = 10.0
//!
//! [exact]
//! grid_min = -3.0
//! grid_max = 3.0
//! grid_step = 0.1
//! ```
//!
//! Every key outside the documented set is rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{KqpdError, Result};
use crate::estimation::{CutoffConfig, Experiment, Probe, DEFAULT_N_LAMBDA, DEFAULT_Z_THRESHOLD};
use crate::grid::Axis;
use crate::sampling::System;

pub const DEFAULT_MASTER_SEED: u64 = 2019;
pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChiSpec {
    One(f64),
    Sweep(Vec<f64>),
}

impl ChiSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            ChiSpec::One(c) => vec![*c],
            ChiSpec::Sweep(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub system: System,
    pub chi: ChiSpec,
    pub chi_prime: f64,
    #[serde(default = "default_n_single")]
    pub n_single: usize,
    #[serde(default = "default_n_joint")]
    pub n_joint: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_master_seed")]
    pub master_seed: u64,
    #[serde(default)]
    pub probes: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub c_o: Option<f64>,
    #[serde(default)]
    pub lambda_c: Option<f64>,
    #[serde(default = "default_n_lambda")]
    pub n_lambda: usize,
    #[serde(default = "default_z_threshold")]
    pub z_threshold: f64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_n_single() -> usize {
    15_000
}
fn default_n_joint() -> usize {
    30_000
}
fn default_trials() -> usize {
    20
}
fn default_master_seed() -> u64 {
    DEFAULT_MASTER_SEED
}
fn default_n_lambda() -> usize {
    DEFAULT_N_LAMBDA
}
fn default_z_threshold() -> f64 {
    DEFAULT_Z_THRESHOLD
}

/// Probe grid and strength range of the `exact` command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExactSection {
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_step: f64,
    pub curve_chi_min: f64,
    pub curve_chi_max: f64,
    pub curve_points: usize,
}

impl Default for ExactSection {
    fn default() -> Self {
        ExactSection {
            grid_min: -3.0,
            grid_max: 3.0,
            grid_step: 0.1,
            curve_chi_min: 0.1,
            curve_chi_max: 3.0,
            curve_points: 59,
        }
    }
}

impl ExactSection {
    pub fn axis(&self) -> Result<Axis> {
        Axis::new(self.grid_min, self.grid_max, self.grid_step).map_err(config_error)
    }

    /// Evenly spaced strengths including both ends.
    pub fn curve_chis(&self) -> Result<Vec<f64>> {
        if self.curve_points < 2 || !(self.curve_chi_min > 0.0) || !(self.curve_chi_max > self.curve_chi_min) {
            return Err(KqpdError::Config(format!(
                "exact curve needs 0 < curve_chi_min < curve_chi_max and curve_points >= 2, got {}..{} with {}",
                self.curve_chi_min, self.curve_chi_max, self.curve_points
            )));
        }
        let h = (self.curve_chi_max - self.curve_chi_min) / (self.curve_points - 1) as f64;
        Ok((0..self.curve_points).map(|i| self.curve_chi_min + i as f64 * h).collect())
    }
}

/// Optional single-trial surface written by `estimate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct EstimateSection {
    #[serde(default)]
    pub surface: bool,
    #[serde(default)]
    pub surface_min: Option<f64>,
    #[serde(default)]
    pub surface_max: Option<f64>,
    #[serde(default)]
    pub surface_step: Option<f64>,
}

impl EstimateSection {
    pub fn axis(&self) -> Result<Axis> {
        Axis::new(
            self.surface_min.unwrap_or(-3.0),
            self.surface_max.unwrap_or(3.0),
            self.surface_step.unwrap_or(0.25),
        )
        .map_err(config_error)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    /// Trials whose records are written.
    pub trials: usize,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection { trials: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub exact: ExactSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub estimate: EstimateSection,
}

/// A validated configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub system: System,
    pub chis: Vec<f64>,
    pub chi_prime: f64,
    pub n_single: usize,
    pub n_joint: usize,
    pub cutoffs: CutoffConfig,
    pub probes: Vec<Probe>,
    pub trials: usize,
    pub master_seed: u64,
    pub z_threshold: f64,
    pub output_dir: PathBuf,
    pub exact: ExactSection,
    pub simulate: SimulateSection,
    pub estimate: EstimateSection,
}

fn config_error(e: KqpdError) -> KqpdError {
    match e {
        KqpdError::Config(_) => e,
        other => KqpdError::Config(other.to_string()),
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| KqpdError::Config(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| KqpdError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn from_file(file: ConfigFile) -> Result<Self> {
        let e = file.experiment;
        let defaults = match e.system {
            System::FockXp => CutoffConfig::fock_default(),
            System::Spin => CutoffConfig::spin_default(),
        };
        let cutoffs = CutoffConfig::new(
            e.c_o.unwrap_or(defaults.c_o),
            e.lambda_c.unwrap_or(defaults.lambda_c),
            e.n_lambda,
        )
        .map_err(config_error)?;
        let probes = match e.probes {
            Some(list) => list.into_iter().map(|[a1, a2]| Probe::new(a1, a2)).collect(),
            None => vec![Probe::default_for(e.system)],
        };
        let cfg = ExperimentConfig {
            system: e.system,
            chis: e.chi.values(),
            chi_prime: e.chi_prime,
            n_single: e.n_single,
            n_joint: e.n_joint,
            cutoffs,
            probes,
            trials: e.trials,
            master_seed: e.master_seed,
            z_threshold: e.z_threshold,
            output_dir: e.output_dir.unwrap_or_else(|| PathBuf::from("kqpd-out")),
            exact: file.exact,
            simulate: file.simulate,
            estimate: file.estimate,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(KqpdError::Config(msg));
        if self.chis.is_empty() {
            return fail("chi sweep list is empty".into());
        }
        if let Some(bad) = self.chis.iter().chain([&self.chi_prime]).find(|c| !(c.is_finite() && **c > 0.0)) {
            return fail(format!("measurement strengths must be positive, got {bad}"));
        }
        if self.n_single < MIN_SAMPLES || self.n_joint < MIN_SAMPLES {
            return fail(format!(
                "n_single and n_joint must be at least {MIN_SAMPLES}, got {} and {}",
                self.n_single, self.n_joint
            ));
        }
        if self.probes.is_empty() {
            return fail("probe list is empty".into());
        }
        if self.system == System::Spin {
            if let Some(p) = self.probes.iter().find(|p| p.a2 != 1.0 && p.a2 != -1.0) {
                return fail(format!("spin probes need sigma2 = +1 or -1, got {p}"));
            }
        }
        if self.probes.iter().any(|p| !p.a1.is_finite() || !p.a2.is_finite()) {
            return fail("probe coordinates must be finite".into());
        }
        if self.trials < 2 {
            return fail(format!("trials must be at least 2, got {}", self.trials));
        }
        if !(self.z_threshold > 0.0) {
            return fail(format!("z_threshold must be positive, got {}", self.z_threshold));
        }
        if self.simulate.trials == 0 {
            return fail("simulate.trials must be at least 1".into());
        }
        self.exact.axis()?;
        self.exact.curve_chis()?;
        self.estimate.axis()?;
        Ok(())
    }

    pub fn experiment(&self, chi: f64) -> Result<Experiment> {
        Experiment::new(self.system, chi, self.chi_prime, self.n_single, self.n_joint, self.cutoffs)
    }
}
