use serde::{Deserialize, Serialize};

use crate::error::SolverError;

/// Newton iteration controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// Sup-norm tolerance on log det(H_ref + H(phi)) - log g.
    pub residual_tol: f64,
    pub max_iterations: usize,
    pub backtrack_factor: f64,
    pub min_step: f64,
    /// Steps leaving lambda_min(H_ref + H(phi)) below this are rejected.
    pub psh_epsilon: f64,
    pub linear_tol: f64,
    pub linear_max_iterations: usize,
    /// Record wall-clock time in reports. Off by default so that reports
    /// are byte-for-byte reproducible.
    pub record_wall_time: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            residual_tol: 1e-8,
            max_iterations: 50,
            backtrack_factor: 0.5,
            min_step: 2f64.powi(-20),
            psh_epsilon: 1e-10,
            linear_tol: 1e-10,
            linear_max_iterations: 5000,
            record_wall_time: false,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let positive = [
            ("residual_tol", self.residual_tol),
            ("min_step", self.min_step),
            ("psh_epsilon", self.psh_epsilon),
            ("linear_tol", self.linear_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SolverError::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(SolverError::InvalidInput(format!(
                "backtrack_factor must lie in (0, 1), got {}",
                self.backtrack_factor
            )));
        }
        if self.max_iterations == 0 || self.linear_max_iterations == 0 {
            return Err(SolverError::InvalidInput("iteration caps must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of one Newton solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub converged: bool,
    pub residual: f64,
    pub iterations: usize,
    pub lambda_min: f64,
    pub wall_ms: f64,
    /// Sup residual after each accepted step, starting with the initial one.
    pub residual_history: Vec<f64>,
}
