use std::time::Instant;

use crate::linalg::{norm_l2, solve_linear, SparseMatrix};

use super::subsystems::{solve_ch_subsystem, solve_elasticity, solve_flow};
use super::{ChbProblem, FieldBlock, FieldState, IterationStats, SolverConfig, SolverError, Strategy, DIVERGENCE_THRESHOLD};

/// A time step that did not converge. `state` is the last iterate.
#[derive(Debug, Clone)]
pub struct StepFailure {
    pub error: SolverError,
    pub state: Box<FieldState>,
    pub stats: IterationStats,
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub state: FieldState,
    pub stats: Vec<IterationStats>,
}

/// Aborted run; `stats` includes the partial record of the failed step.
#[derive(Debug, Clone)]
pub struct SimulationFailure {
    pub step: usize,
    pub error: SolverError,
    pub state: Box<FieldState>,
    pub stats: Vec<IterationStats>,
}

/// Stacked residual over all five blocks with every coupling at `iter`.
pub fn monolithic_residual(problem: &ChbProblem<'_>, prev: &FieldState, iter: &FieldState) -> Vec<f64> {
    problem.assemble(prev, iter, FieldBlock::ALL, false).0
}

pub fn monolithic_jacobian(problem: &ChbProblem<'_>, prev: &FieldState, iter: &FieldState) -> SparseMatrix {
    problem
        .assemble(prev, iter, FieldBlock::ALL, true)
        .1
        .expect("jacobian requested")
}

/// Plain Newton on the full system, initialized with the previous step.
pub fn monolithic_step(
    problem: &ChbProblem<'_>,
    prev: &FieldState,
    config: &SolverConfig,
) -> Result<(FieldState, IterationStats), StepFailure> {
    let start = Instant::now();
    let mut iter = prev.clone();
    iter.step = prev.step + 1;
    let mut stats = IterationStats {
        step: iter.step,
        ..Default::default()
    };
    let fail = |error, state: FieldState, mut stats: IterationStats| {
        stats.wall_seconds = start.elapsed().as_secs_f64();
        Err(StepFailure { error, state: Box::new(state), stats })
    };

    let mut last = f64::INFINITY;
    for k in 1..=config.max_iter {
        stats.monolithic_iterations = k;
        let (r, jac) = problem.assemble(prev, &iter, FieldBlock::ALL, true);
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = match solve_linear(&jac.expect("jacobian requested"), &rhs) {
            Ok(d) => d,
            Err(e) => return fail(e.into(), iter, stats),
        };
        last = norm_l2(&delta);
        if !last.is_finite() || last > DIVERGENCE_THRESHOLD {
            return fail(
                SolverError::Divergence {
                    iterations: k,
                    update_norm: last,
                },
                iter,
                stats,
            );
        }
        iter.add(FieldBlock::ALL, &delta);
        if last < config.tol {
            stats.converged = true;
            stats.wall_seconds = start.elapsed().as_secs_f64();
            return Ok((iter, stats));
        }
    }
    fail(
        SolverError::NonConvergence {
            iterations: config.max_iter,
            last_update_norm: last,
        },
        iter,
        stats,
    )
}

/// Fixed-point splitting: Cahn-Hilliard (Newton), then elasticity, then
/// flow, repeated until the `(φ, μ, u, p)` increment drops below `tol`.
pub fn splitting_step(
    problem: &ChbProblem<'_>,
    prev: &FieldState,
    config: &SolverConfig,
) -> Result<(FieldState, IterationStats), StepFailure> {
    let start = Instant::now();
    let mut iter = prev.clone();
    iter.step = prev.step + 1;
    let mut stats = IterationStats {
        step: iter.step,
        ..Default::default()
    };
    let fail = |error, state: FieldState, mut stats: IterationStats| {
        stats.wall_seconds = start.elapsed().as_secs_f64();
        Err(StepFailure { error, state: Box::new(state), stats })
    };

    let mut last = f64::INFINITY;
    for i in 1..=config.max_iter {
        stats.outer_iterations = i;
        let old = iter.clone();

        match solve_ch_subsystem(problem, prev, &iter, config) {
            Ok(ch) => {
                stats.inner_newton_iterations.push(ch.iterations);
                iter.phi = ch.phi;
                iter.mu = ch.mu;
            }
            Err(e) => {
                if let SolverError::NonConvergence { iterations, .. } | SolverError::Divergence { iterations, .. } = e {
                    stats.inner_newton_iterations.push(iterations);
                }
                return fail(e, iter, stats);
            }
        }
        match solve_elasticity(problem, prev, &iter) {
            Ok(u) => iter.u = u,
            Err(e) => return fail(e, iter, stats),
        }
        match solve_flow(problem, prev, &iter) {
            Ok((p, q)) => {
                iter.p = p;
                iter.q = q;
            }
            Err(e) => return fail(e, iter, stats),
        }

        let increment: f64 = [
            (&iter.phi, &old.phi),
            (&iter.mu, &old.mu),
            (&iter.u, &old.u),
            (&iter.p, &old.p),
        ]
        .iter()
        .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)))
        .sum::<f64>()
        .sqrt();
        last = increment;
        if !last.is_finite() {
            return fail(
                SolverError::Divergence {
                    iterations: i,
                    update_norm: last,
                },
                iter,
                stats,
            );
        }
        if last < config.tol {
            stats.converged = true;
            stats.wall_seconds = start.elapsed().as_secs_f64();
            return Ok((iter, stats));
        }
    }
    fail(
        SolverError::NonConvergence {
            iterations: config.max_iter,
            last_update_norm: last,
        },
        iter,
        stats,
    )
}

/// One time step with the configured strategy.
pub fn step(
    problem: &ChbProblem<'_>,
    prev: &FieldState,
    config: &SolverConfig,
) -> Result<(FieldState, IterationStats), StepFailure> {
    match config.strategy {
        Strategy::Monolithic => monolithic_step(problem, prev, config),
        Strategy::Splitting => splitting_step(problem, prev, config),
    }
}

/// Runs `config.num_steps` steps from `initial`, calling `observer` with
/// every accepted state. The first failed step aborts the run.
pub fn advance_simulation(
    problem: &ChbProblem<'_>,
    initial: &FieldState,
    config: &SolverConfig,
    mut observer: impl FnMut(&FieldState, &IterationStats),
) -> Result<SimulationOutput, SimulationFailure> {
    let mut state = initial.clone();
    let mut all = Vec::with_capacity(config.num_steps);
    for _ in 0..config.num_steps {
        match step(problem, &state, config) {
            Ok((next, stats)) => {
                observer(&next, &stats);
                all.push(stats);
                state = next;
            }
            Err(failure) => {
                all.push(failure.stats);
                return Err(SimulationFailure {
                    step: state.step + 1,
                    error: failure.error,
                    state: failure.state,
                    stats: all,
                });
            }
        }
    }
    Ok(SimulationOutput { state, stats: all })
}
