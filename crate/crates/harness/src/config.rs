//! Experiment configuration, read from a single JSON document.
//!
//! ```json
//! {
//!   "model": { "kind": "mfim", "L": 4, "J": 1.0, "h_x": 0.5, "h_z": 0.3 },
//!   "initial_state": "0011",
//!   "protocols": ["arc", "rc", "trotter1"],
//!   "plan": { "mode": "fixed_dt", "dt": 0.02, "steps": [10, 20, 50] },
//!   "trajectories": 2000,
//!   "noise_std": 0.1,
//!   "master_seed": 7
//! }
//! ```

use std::path::{Path, PathBuf};

use arcsim_core::{
    basis_state, build_kerr, build_mfim, build_rabi, ArcOptions, Decomposition, Protocol,
    QuantumState, StepPlan,
};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, HarnessResult};

pub const DEFAULT_TRAJECTORIES: usize = 2000;
pub const DEFAULT_DT: f64 = 0.02;
pub const DEFAULT_STEPS: [usize; 10] = [5, 10, 15, 20, 25, 30, 35, 40, 45, 50];
pub const DEFAULT_TOTAL_TIME: f64 = 1.0;
pub const DEFAULT_DT_GRID: [f64; 5] = [0.01, 0.02, 0.04, 0.05, 0.1];
pub const DEFAULT_TARGET_ERROR: f64 = 1e-2;

/// Step counts must reproduce `t` from `dt` to this relative accuracy.
const GRID_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Mfim {
        #[serde(rename = "L")]
        sites: usize,
        #[serde(rename = "J")]
        coupling: f64,
        h_x: f64,
        h_z: f64,
    },
    Kerr {
        delta: f64,
        #[serde(rename = "K")]
        kerr: f64,
        eps: f64,
        #[serde(rename = "D")]
        fock_dim: usize,
    },
    Rabi {
        omega: f64,
        #[serde(rename = "Omega")]
        qubit_splitting: f64,
        g: f64,
        #[serde(rename = "D")]
        fock_dim: usize,
    },
}

impl ModelSpec {
    pub fn build(&self) -> HarnessResult<(Decomposition, arcsim_core::HilbertStructure)> {
        let built = match *self {
            Self::Mfim { sites, coupling, h_x, h_z } => build_mfim(sites, coupling, h_x, h_z),
            Self::Kerr { delta, kerr, eps, fock_dim } => build_kerr(delta, kerr, eps, fock_dim),
            Self::Rabi { omega, qubit_splitting, g, fock_dim } => {
                build_rabi(omega, qubit_splitting, g, fock_dim)
            }
        };
        Ok(built?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlanSpec {
    /// Fixed step size `t/N`, sweeping the step count.
    FixedDt {
        #[serde(default = "default_dt")]
        dt: f64,
        #[serde(default = "default_steps")]
        steps: Vec<usize>,
    },
    /// Fixed total time, sweeping the step size.
    FixedT {
        #[serde(default = "default_total_time")]
        t: f64,
        #[serde(default = "default_dt_grid")]
        dt: Vec<f64>,
    },
}

fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_steps() -> Vec<usize> {
    DEFAULT_STEPS.to_vec()
}
fn default_total_time() -> f64 {
    DEFAULT_TOTAL_TIME
}
fn default_dt_grid() -> Vec<f64> {
    DEFAULT_DT_GRID.to_vec()
}
fn default_trajectories() -> usize {
    DEFAULT_TRAJECTORIES
}
fn default_fd_dt() -> f64 {
    ArcOptions::default().fd_dt
}
fn default_target_error() -> f64 {
    DEFAULT_TARGET_ERROR
}
fn default_one() -> usize {
    1
}

/// Which swept quantity labels a plan point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum XKind {
    Steps,
    Dt,
}

impl XKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Steps => "steps",
            Self::Dt => "dt",
        }
    }
}

/// One point of the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanPoint {
    pub x_kind: XKind,
    pub x_value: f64,
    pub plan: StepPlan,
}

impl PlanPoint {
    /// Seed coordinate; depends on the swept value, not on its list position.
    pub fn seed_coordinate(&self) -> u64 {
        match self.x_kind {
            XKind::Steps => self.plan.steps() as u64,
            XKind::Dt => self.x_value.to_bits(),
        }
    }
}

impl PlanSpec {
    pub fn points(&self) -> HarnessResult<Vec<PlanPoint>> {
        match self {
            Self::FixedDt { dt, steps } => {
                if steps.is_empty() {
                    return Err(HarnessError::Config("plan.steps is empty".into()));
                }
                steps
                    .iter()
                    .map(|&n| {
                        Ok(PlanPoint {
                            x_kind: XKind::Steps,
                            x_value: n as f64,
                            plan: StepPlan::from_step_size(*dt, n)?,
                        })
                    })
                    .collect()
            }
            Self::FixedT { t, dt } => {
                if dt.is_empty() {
                    return Err(HarnessError::Config("plan.dt is empty".into()));
                }
                dt.iter()
                    .map(|&h| {
                        if !(h > 0.0 && h.is_finite()) {
                            return Err(HarnessError::Config(format!(
                                "step sizes must be positive, got {h}"
                            )));
                        }
                        let n = (t / h).round();
                        if n < 1.0 || ((n * h - t) / t).abs() > GRID_TOL {
                            return Err(HarnessError::Config(format!(
                                "step size {h} does not divide total time {t}"
                            )));
                        }
                        Ok(PlanPoint {
                            x_kind: XKind::Dt,
                            x_value: h,
                            plan: StepPlan::new(*t, n as usize)?,
                        })
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub initial_state: String,
    pub protocols: Vec<Protocol>,
    pub plan: PlanSpec,
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_floor: Option<f64>,
    #[serde(default = "default_fd_dt")]
    pub fd_dt: f64,
    #[serde(default = "default_target_error")]
    pub target_error: f64,
    /// Attach a bound report per plan point to JSON output.
    #[serde(default)]
    pub include_bounds: bool,
    /// Trajectories averaged into a probability trace; 1 logs a single one.
    #[serde(default = "default_one")]
    pub ptrace_trajectories: usize,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> HarnessResult<Self> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: impl AsRef<Path>) -> HarnessResult<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> HarnessResult<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.trajectories == 0 {
            return bad("trajectories must be at least 1".into());
        }
        if self.ptrace_trajectories == 0 {
            return bad("ptrace_trajectories must be at least 1".into());
        }
        if self.protocols.is_empty() {
            return bad("no protocols listed".into());
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return bad(format!("noise_std must be finite and non-negative, got {}", self.noise_std));
        }
        if !(self.fd_dt > 0.0 && self.fd_dt.is_finite()) {
            return bad(format!("fd_dt must be positive, got {}", self.fd_dt));
        }
        if !(self.target_error > 0.0 && self.target_error.is_finite()) {
            return bad(format!("target_error must be positive, got {}", self.target_error));
        }
        if let Some(f) = self.p_floor {
            if !(0.0..1.0).contains(&f) {
                return bad(format!("p_floor must lie in [0, 1), got {f}"));
            }
        }
        self.plan.points()?;
        Ok(())
    }

    pub fn arc_options(&self) -> ArcOptions {
        ArcOptions {
            fd_dt: self.fd_dt,
            p_floor: self.p_floor,
        }
    }
}

/// A config with its model built and initial state parsed.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub decomposition: Decomposition,
    pub initial: QuantumState,
    pub points: Vec<PlanPoint>,
}

impl Prepared {
    pub fn new(config: ExperimentConfig) -> HarnessResult<Self> {
        config.validate()?;
        let (decomposition, space) = config.model.build()?;
        let initial = basis_state(&config.initial_state, &space)?;
        let points = config.plan.points()?;
        Ok(Self {
            config,
            decomposition,
            initial,
            points,
        })
    }
}
