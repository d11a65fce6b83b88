//! Time stepping for the coupled system with two nonlinear strategies:
//! Newton on the full system, and a fixed-point splitting that solves the
//! Cahn-Hilliard, elasticity and flow blocks in turn.

mod forms;
mod state;
mod strategies;
mod subsystems;

use thiserror::Error;

use crate::fem::FemError;
use crate::linalg::LinalgError;

pub use forms::{half_domain_step, ChbProblem, Sources};
pub use state::{Field, FieldBlock, FieldState, Layout};
pub use strategies::{
    advance_simulation, monolithic_jacobian, monolithic_residual, monolithic_step, splitting_step, step,
    SimulationFailure, SimulationOutput, StepFailure,
};
pub use subsystems::{ch_residual_and_jacobian, solve_ch_subsystem, solve_elasticity, solve_flow, ChSolution};

/// Update norms above this are treated as divergence.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Monolithic,
    Splitting,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Monolithic => "monolithic",
            Strategy::Splitting => "splitting",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub strategy: Strategy,
    /// Absolute ℓ2 bound on Newton updates and outer splitting increments.
    pub tol: f64,
    pub max_iter: usize,
    pub num_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Splitting,
            tol: 1e-6,
            max_iter: 100,
            num_steps: 20,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("no convergence after {iterations} iterations (last update norm {last_update_norm:e})")]
    NonConvergence { iterations: usize, last_update_norm: f64 },
    #[error("Newton iteration diverged at iteration {iterations} (update norm {update_norm:e})")]
    Divergence { iterations: usize, update_norm: f64 },
    #[error("linear solve failed: {0}")]
    LinearSolve(#[from] LinalgError),
    #[error(transparent)]
    Fem(#[from] FemError),
}

impl SolverError {
    /// Failures of the linear algebra rather than of the nonlinear iteration.
    pub fn is_internal_fault(&self) -> bool {
        matches!(self, SolverError::LinearSolve(_) | SolverError::Fem(_))
    }
}

/// Iteration record of one time step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterationStats {
    pub step: usize,
    /// Outer splitting iterations; zero for the monolithic strategy.
    pub outer_iterations: usize,
    /// Cahn-Hilliard Newton iterations of each outer iteration.
    pub inner_newton_iterations: Vec<usize>,
    pub monolithic_iterations: usize,
    pub converged: bool,
    pub wall_seconds: f64,
}

impl IterationStats {
    pub fn total_inner(&self) -> usize {
        self.inner_newton_iterations.iter().sum()
    }

    /// Newton iterations of either kind.
    pub fn newton_iterations(&self) -> usize {
        self.monolithic_iterations + self.total_inner()
    }
}
