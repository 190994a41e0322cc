//! Backend-neutral solve contract, model export and decoding.

mod decode;
mod highs_native;
mod lp_export;
mod lp_file;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::milp::MilpModel;

pub use decode::{decode_plan, BINARY_TOLERANCE};
pub use highs_native::HighsBackend;
pub use lp_export::export_model;
pub use lp_file::LpFileBackend;

/// Environment variable naming the backend (`highs` or `highs-lp`).
pub const BACKEND_ENV: &str = "TRANSIT_DESIGN_BACKEND";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub time_limit_s: f64,
    pub rel_gap: f64,
    pub threads: usize,
    pub backend: String,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            time_limit_s: 3600.0,
            rel_gap: 0.0,
            threads: 1,
            backend: "highs".to_string(),
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn check(&self) -> Result<(), SolverError> {
        if !(self.time_limit_s > 0.0) {
            return Err(SolverError::Config(format!("time limit must be positive, got {}", self.time_limit_s)));
        }
        if !(0.0..1.0).contains(&self.rel_gap) {
            return Err(SolverError::Config(format!("relative gap must lie in [0, 1), got {}", self.rel_gap)));
        }
        if self.threads == 0 {
            return Err(SolverError::Config("thread count must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Feasible { gap: f64 },
    Infeasible,
    Timeout,
    Error { message: String },
}

impl SolveStatus {
    pub fn has_solution(&self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::Feasible { .. })
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveStatus::Optimal => write!(f, "optimal"),
            SolveStatus::Feasible { gap } => write!(f, "feasible (gap {gap})"),
            SolveStatus::Infeasible => write!(f, "infeasible"),
            SolveStatus::Timeout => write!(f, "timeout"),
            SolveStatus::Error { message } => write!(f, "error: {message}"),
        }
    }
}

/// `assignment` is indexed by variable id and empty when no solution exists.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective: f64,
    pub assignment: Vec<f64>,
    pub wall_time_s: f64,
}

pub trait MilpBackend {
    fn name(&self) -> &'static str;
    fn solve(&self, m: &MilpModel, cfg: &SolverConfig) -> Result<SolveResult, SolverError>;
}

pub fn backend_by_name(name: &str) -> Result<Box<dyn MilpBackend>, SolverError> {
    match name {
        "highs" => Ok(Box::new(HighsBackend)),
        "highs-lp" => Ok(Box::new(LpFileBackend)),
        other => Err(SolverError::BackendUnavailable(other.to_string())),
    }
}

/// Solve with the backend named in `cfg`.
pub fn solve(m: &MilpModel, cfg: &SolverConfig) -> Result<SolveResult, SolverError> {
    cfg.check()?;
    backend_by_name(&cfg.backend)?.solve(m, cfg)
}
