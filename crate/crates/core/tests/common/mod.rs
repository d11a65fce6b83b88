#![allow(dead_code)]

use chb::linalg::SparseMatrix;
use chb::solvers::{ChbProblem, Field, FieldBlock, FieldState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// State with φ in `phi_range` and moderate values elsewhere. Boundary
/// displacement dofs are left at zero.
pub fn random_state(problem: &ChbProblem<'_>, rng: &mut impl Rng, phi_range: (f64, f64)) -> FieldState {
    let mut s = FieldState::zeros(&problem.layout);
    s.phi.iter_mut().for_each(|v| *v = rng.random_range(phi_range.0..phi_range.1));
    s.mu.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
    s.u.iter_mut().for_each(|v| *v = rng.random_range(-0.1..0.1));
    for &d in problem.boundary_displacement_dofs() {
        s.u[d] = 0.0;
    }
    s.p.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
    s.q.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
    s
}

/// Fields of `block`, in stacking order.
pub fn block_fields(block: FieldBlock) -> Vec<Field> {
    Field::ALL.iter().copied().filter(|&f| block.contains(f)).collect()
}

/// Offset of `field` inside the stacked vector of `block`.
pub fn local_range(problem: &ChbProblem<'_>, block: FieldBlock, field: Field) -> std::ops::Range<usize> {
    let base = problem.layout.block_offset(block);
    let r = problem.layout.range(field);
    r.start - base..r.end - base
}

/// Central-difference Jacobian of the `block` residual, in dense form.
pub fn fd_jacobian(problem: &ChbProblem<'_>, prev: &FieldState, iter: &FieldState, block: FieldBlock, h: f64) -> Vec<Vec<f64>> {
    let x = iter.gather(block);
    let n = x.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut plus = iter.clone();
        let mut minus = iter.clone();
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        plus.scatter(block, &xp);
        minus.scatter(block, &xm);
        let (rp, _) = problem.assemble(prev, &plus, block, false);
        let (rm, _) = problem.assemble(prev, &minus, block, false);
        cols.push(rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<f64>>());
    }
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

/// Maximum over field-block pairs of the relative difference between an
/// analytic Jacobian and a dense reference. Pairs where the reference is
/// identically small are compared against the global scale.
pub fn max_block_relative_error(problem: &ChbProblem<'_>, block: FieldBlock, analytic: &SparseMatrix, reference: &[Vec<f64>]) -> (f64, String) {
    let dense = analytic.to_dense();
    let global = reference.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst = (0.0, String::new());
    for rf in block_fields(block) {
        for cf in block_fields(block) {
            let rr = local_range(problem, block, rf);
            let cr = local_range(problem, block, cf);
            let mut scale = 0.0f64;
            let mut diff = 0.0f64;
            for i in rr.clone() {
                for j in cr.clone() {
                    scale = scale.max(reference[i][j].abs()).max(dense[i][j].abs());
                    diff = diff.max((reference[i][j] - dense[i][j]).abs());
                }
            }
            let rel = diff / scale.max(1e-8 * global);
            if rel > worst.0 {
                worst = (rel, format!("({}, {})", rf.name(), cf.name()));
            }
        }
    }
    worst
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}
