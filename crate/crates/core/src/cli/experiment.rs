//! Base runs and parameter sweeps.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::mesh::StructuredTriMesh;
use crate::solvers::{advance_simulation, half_domain_step, ChbProblem, IterationStats, Sources, Strategy};

use super::config::SimulationConfig;
use super::output::write_vtk;

/// One row of the metrics table.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    /// Swept parameter, or `"none"` for a base run.
    pub param_name: String,
    pub param_value: Option<f64>,
    pub strategy: Strategy,
    pub converged: bool,
    /// Splitting: outer iterations. Monolithic: Newton iterations.
    pub outer_iters: usize,
    /// Newton iterations of any kind, summed over steps.
    pub inner_newton_iters: usize,
    pub wall_seconds: f64,
    /// Set when the run stopped on a linear-algebra failure.
    pub internal_fault: bool,
    /// Number of accepted time steps.
    pub steps_completed: usize,
}

fn totals(stats: &[IterationStats], strategy: Strategy) -> (usize, usize) {
    let newton: usize = stats.iter().map(IterationStats::newton_iterations).sum();
    let outer = match strategy {
        Strategy::Monolithic => newton,
        Strategy::Splitting => stats.iter().map(|s| s.outer_iterations).sum(),
    };
    (outer, newton)
}

fn snapshot_path(dir: &Path, strategy: Strategy, param: Option<(&str, f64)>, step: usize) -> PathBuf {
    let tag = match param {
        Some((name, v)) => format!("{name}_{v}_"),
        None => String::new(),
    };
    dir.join(format!("{tag}{strategy}_step{step:04}.vtk"))
}

/// Runs one simulation from the half-domain initial condition.
pub fn run_single(
    config: &SimulationConfig,
    strategy: Strategy,
    param: Option<(&str, f64)>,
    snapshot_dir: Option<&Path>,
) -> std::io::Result<MetricsRecord> {
    let mesh = StructuredTriMesh::unit_square(config.n).map_err(std::io::Error::other)?;
    let problem = ChbProblem::new(&mesh, config.material(), Sources::default());
    let initial = problem.initial_state(half_domain_step);
    let solver = config.solver(strategy);
    let every = config.output_every;
    let dir = snapshot_dir.filter(|_| every > 0);

    if let Some(d) = dir {
        write_vtk(&initial, &mesh, &snapshot_path(d, strategy, param, 0))?;
    }
    let mut io_error = None;
    let start = Instant::now();
    let result = advance_simulation(&problem, &initial, &solver, |state, _| {
        if let Some(d) = dir {
            if state.step % every == 0 && io_error.is_none() {
                if let Err(e) = write_vtk(state, &mesh, &snapshot_path(d, strategy, param, state.step)) {
                    io_error = Some(e);
                }
            }
        }
    });
    let wall_seconds = start.elapsed().as_secs_f64();
    if let Some(e) = io_error {
        return Err(e);
    }

    let (stats, converged, internal_fault, steps_completed) = match &result {
        Ok(out) => (&out.stats, true, false, out.stats.len()),
        Err(f) => (&f.stats, false, f.error.is_internal_fault(), f.step - 1),
    };
    let (outer_iters, inner_newton_iters) = totals(stats, strategy);
    Ok(MetricsRecord {
        param_name: param.map_or("none", |p| p.0).to_string(),
        param_value: param.map(|p| p.1),
        strategy,
        converged,
        outer_iters,
        inner_newton_iters,
        wall_seconds,
        internal_fault,
        steps_completed,
    })
}

/// Runs the base case or every sweep value, for each configured strategy.
/// Rows follow sweep order, then strategy order.
pub fn run_experiment(config: &SimulationConfig, out_dir: Option<&Path>) -> std::io::Result<Vec<MetricsRecord>> {
    let strategies = config.strategy.strategies();
    let mut records = Vec::new();
    match &config.sweep {
        None => {
            for &s in &strategies {
                records.push(run_single(config, s, None, out_dir)?);
            }
        }
        Some(sweep) => {
            let name = sweep.param.name();
            for v in sweep.grid() {
                let mut run = config.clone();
                run.sweep = None;
                run.set_param(sweep.param, v);
                for &s in &strategies {
                    records.push(run_single(&run, s, Some((name, v)), out_dir)?);
                }
            }
        }
    }
    Ok(records)
}
