//! JSON experiment configuration.
//!
//! Every key is optional; missing keys take the baseline material values.

use std::path::Path;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::MaterialParams;
use crate::solvers::{SolverConfig, Strategy};

/// Cells per side of the full-resolution mesh.
pub const FULL_CELLS_PER_SIDE: usize = 65;
pub const DESK_CELLS_PER_SIDE: usize = 16;
pub const DESK_NUM_STEPS: usize = 20;

pub const DEFAULT_GAMMA_GRID: [f64; 6] = [0.1, 0.5, 1.0, 5.0, 10.0, 25.0];
pub const DEFAULT_XI_GRID: [f64; 5] = [0.25, 0.5, 1.0, 1.5, 2.0];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid configuration: {}", .0.join("; "))]
    Validation(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyChoice {
    Monolithic,
    Splitting,
    Both,
}

impl StrategyChoice {
    pub fn strategies(self) -> Vec<Strategy> {
        match self {
            StrategyChoice::Monolithic => vec![Strategy::Monolithic],
            StrategyChoice::Splitting => vec![Strategy::Splitting],
            StrategyChoice::Both => vec![Strategy::Monolithic, Strategy::Splitting],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Gamma,
    Xi,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Gamma => "gamma",
            SweepParam::Xi => "xi",
        }
    }

    pub fn default_grid(self) -> Vec<f64> {
        match self {
            SweepParam::Gamma => DEFAULT_GAMMA_GRID.to_vec(),
            SweepParam::Xi => DEFAULT_XI_GRID.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub param: SweepParam,
    #[serde(default)]
    pub values: Vec<f64>,
}

impl SweepSpec {
    /// The configured grid, or the default one when empty.
    pub fn grid(&self) -> Vec<f64> {
        if self.values.is_empty() {
            self.param.default_grid()
        } else {
            self.values.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub gamma: f64,
    pub ell: f64,
    pub mobility: f64,
    pub xi: f64,
    pub phi_bar: f64,
    #[serde(rename = "M0")]
    pub m0: f64,
    #[serde(rename = "M1")]
    pub m1: f64,
    pub kappa0: f64,
    pub kappa1: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    #[serde(rename = "C0")]
    pub c0: [[f64; 3]; 3],
    #[serde(rename = "C1")]
    pub c1: [[f64; 3]; 3],
    pub tau: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Cells per side of the unit-square mesh.
    pub n: usize,
    pub num_steps: usize,
    pub strategy: StrategyChoice,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    /// Write fields every this many steps; 0 disables field output.
    pub output_every: usize,
}

fn to_rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

fn from_rows(r: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| r[i][j])
}

impl Default for SimulationConfig {
    fn default() -> Self {
        let p = MaterialParams::default();
        let s = SolverConfig::default();
        Self {
            gamma: p.gamma,
            ell: p.ell,
            mobility: p.mobility,
            xi: p.xi,
            phi_bar: p.phi_bar,
            m0: p.m0,
            m1: p.m1,
            kappa0: p.kappa0,
            kappa1: p.kappa1,
            alpha0: p.alpha0,
            alpha1: p.alpha1,
            c0: to_rows(&p.c0),
            c1: to_rows(&p.c1),
            tau: p.tau,
            tol: s.tol,
            max_iter: s.max_iter,
            n: FULL_CELLS_PER_SIDE,
            num_steps: DESK_NUM_STEPS,
            strategy: StrategyChoice::Both,
            sweep: None,
            output_dir: None,
            output_every: 0,
        }
    }
}

impl SimulationConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: SimulationConfig = if text.trim().is_empty() {
            SimulationConfig::default()
        } else {
            serde_json::from_str(text).map_err(|e| ConfigError::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }

    /// Small mesh and step count for quick runs.
    pub fn apply_desk_profile(&mut self) {
        self.n = DESK_CELLS_PER_SIDE;
        self.num_steps = DESK_NUM_STEPS;
    }

    pub fn material(&self) -> MaterialParams {
        MaterialParams {
            gamma: self.gamma,
            ell: self.ell,
            mobility: self.mobility,
            xi: self.xi,
            phi_bar: self.phi_bar,
            c0: from_rows(&self.c0),
            c1: from_rows(&self.c1),
            m0: self.m0,
            m1: self.m1,
            kappa0: self.kappa0,
            kappa1: self.kappa1,
            alpha0: self.alpha0,
            alpha1: self.alpha1,
            tau: self.tau,
        }
    }

    pub fn solver(&self, strategy: Strategy) -> SolverConfig {
        SolverConfig {
            strategy,
            tol: self.tol,
            max_iter: self.max_iter,
            num_steps: self.num_steps,
        }
    }

    pub fn set_param(&mut self, param: SweepParam, value: f64) {
        match param {
            SweepParam::Gamma => self.gamma = value,
            SweepParam::Xi => self.xi = value,
        }
    }

    /// Collects every violated invariant.
    pub fn violations(&self) -> Vec<String> {
        let mut out = self.material().violations();
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            out.push(format!("tol must be positive (got {})", self.tol));
        }
        if self.max_iter == 0 {
            out.push("max_iter must be at least 1".to_string());
        }
        if self.n == 0 {
            out.push("n must be at least 1".to_string());
        }
        if let Some(sweep) = &self.sweep {
            for v in sweep.grid() {
                let mut probe = self.clone();
                probe.sweep = None;
                probe.set_param(sweep.param, v);
                for msg in probe.material().violations() {
                    out.push(format!("sweep value {} = {v}: {msg}", sweep.param.name()));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Validation(v))
        }
    }
}

pub fn load_config(path: &Path) -> Result<SimulationConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    SimulationConfig::from_json(&text)
}
