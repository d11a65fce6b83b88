use crate::fem::apply_dirichlet;
use crate::linalg::{norm_l2, solve_linear, SparseMatrix};

use super::{ChbProblem, FieldBlock, FieldState, SolverConfig, SolverError, DIVERGENCE_THRESHOLD};

/// Residual and Jacobian of the `(φ, μ)` block with `u`, `p` frozen at
/// their values in `iter`.
pub fn ch_residual_and_jacobian(problem: &ChbProblem<'_>, prev: &FieldState, iter: &FieldState) -> (Vec<f64>, SparseMatrix) {
    let (r, j) = problem.assemble(prev, iter, FieldBlock::CAHN_HILLIARD, true);
    (r, j.expect("jacobian requested"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChSolution {
    pub phi: Vec<f64>,
    pub mu: Vec<f64>,
    pub iterations: usize,
}

/// Newton's method on the Cahn-Hilliard block, starting from the `(φ, μ)`
/// of `guess`. Displacement and pressure stay at their values in `guess`.
pub fn solve_ch_subsystem(
    problem: &ChbProblem<'_>,
    prev: &FieldState,
    guess: &FieldState,
    config: &SolverConfig,
) -> Result<ChSolution, SolverError> {
    let mut iter = guess.clone();
    let mut last = f64::INFINITY;
    for k in 1..=config.max_iter {
        let (r, jac) = ch_residual_and_jacobian(problem, prev, &iter);
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = solve_linear(&jac, &rhs)?;
        last = norm_l2(&delta);
        if !last.is_finite() || last > DIVERGENCE_THRESHOLD {
            return Err(SolverError::Divergence {
                iterations: k,
                update_norm: last,
            });
        }
        iter.add(FieldBlock::CAHN_HILLIARD, &delta);
        if last < config.tol {
            return Ok(ChSolution {
                phi: iter.phi,
                mu: iter.mu,
                iterations: k,
            });
        }
    }
    Err(SolverError::NonConvergence {
        iterations: config.max_iter,
        last_update_norm: last,
    })
}

/// Displacement for the phase-field and pressure of `state`. The system is
/// linear in `u`, so one solve from `u = 0` is exact.
pub fn solve_elasticity(problem: &ChbProblem<'_>, prev: &FieldState, state: &FieldState) -> Result<Vec<f64>, SolverError> {
    let mut zero_u = state.clone();
    zero_u.u.iter_mut().for_each(|v| *v = 0.0);
    let (r, jac) = problem.assemble(prev, &zero_u, FieldBlock::ELASTICITY, true);
    let mut rhs: Vec<f64> = r.iter().map(|v| -v).collect();
    let matrix = apply_dirichlet(
        &jac.expect("jacobian requested"),
        &mut rhs,
        problem.boundary_displacement_dofs(),
        0.0,
        true,
    )?;
    Ok(solve_linear(&matrix, &rhs)?)
}

/// Pressure and flux for the phase-field and displacement of `state`; the
/// mixed system is linear in `(p, q)`.
pub fn solve_flow(problem: &ChbProblem<'_>, prev: &FieldState, state: &FieldState) -> Result<(Vec<f64>, Vec<f64>), SolverError> {
    let mut zero = state.clone();
    zero.p.iter_mut().for_each(|v| *v = 0.0);
    zero.q.iter_mut().for_each(|v| *v = 0.0);
    let (r, jac) = problem.assemble(prev, &zero, FieldBlock::FLOW, true);
    let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
    let x = solve_linear(&jac.expect("jacobian requested"), &rhs)?;
    let np = problem.layout.len(super::Field::P);
    Ok((x[..np].to_vec(), x[np..].to_vec()))
}
