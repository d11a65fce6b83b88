mod common;

use chb::solvers::{ch_residual_and_jacobian, monolithic_jacobian, ChbProblem, Field, FieldBlock, Sources};
use chb::{MaterialParams, StructuredTriMesh};
use common::*;

const SEED: u64 = 20_240_117;
const FD_STEP: f64 = 1e-6;
const REL_TOL: f64 = 1e-5;

fn check_block(block: FieldBlock, label: &str) {
    let mesh = StructuredTriMesh::unit_square(4).unwrap();
    let problem = ChbProblem::new(&mesh, MaterialParams::default(), Sources::default());
    let mut rng = rng(SEED);
    let mut worst = (0.0f64, String::new());
    for _ in 0..20 {
        let prev = random_state(&problem, &mut rng, (0.05, 0.95));
        let iter = random_state(&problem, &mut rng, (0.05, 0.95));
        let (_, jac) = problem.assemble(&prev, &iter, block, true);
        let fd = fd_jacobian(&problem, &prev, &iter, block, FD_STEP);
        let err = max_block_relative_error(&problem, block, &jac.unwrap(), &fd);
        if err.0 > worst.0 {
            worst = err;
        }
    }
    println!("{label}: worst relative error {:.3e} in block {}", worst.0, worst.1);
    assert!(worst.0 <= REL_TOL, "{label}: {:.3e} in {}", worst.0, worst.1);
}

#[test]
fn monolithic_jacobian_matches_finite_differences() {
    check_block(FieldBlock::ALL, "monolithic");
}

#[test]
fn cahn_hilliard_jacobian_matches_finite_differences() {
    check_block(FieldBlock::CAHN_HILLIARD, "cahn-hilliard");
}

#[test]
fn elasticity_and_flow_jacobians_match_finite_differences() {
    check_block(FieldBlock::ELASTICITY, "elasticity");
    check_block(FieldBlock::FLOW, "flow");
}

#[test]
fn ch_helper_agrees_with_block_assembly() {
    let mesh = StructuredTriMesh::unit_square(4).unwrap();
    let problem = ChbProblem::new(&mesh, MaterialParams::default(), Sources::default());
    let mut rng = rng(SEED + 1);
    let prev = random_state(&problem, &mut rng, (0.05, 0.95));
    let iter = random_state(&problem, &mut rng, (0.05, 0.95));
    let (r, j) = ch_residual_and_jacobian(&problem, &prev, &iter);
    let (r2, j2) = problem.assemble(&prev, &iter, FieldBlock::CAHN_HILLIARD, true);
    assert_eq!(r, r2);
    assert_eq!(j.to_dense(), j2.unwrap().to_dense());
}

fn max_block_entry(jac: &chb::linalg::SparseMatrix, layout: &chb::solvers::Layout, rf: Field, cf: Field) -> f64 {
    let b = jac.block(layout.range(rf), layout.range(cf));
    b.to_dense().iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

#[test]
fn interpolation_plateau_decouples_blocks() {
    let mesh = StructuredTriMesh::unit_square(4).unwrap();
    let mut rng = rng(SEED + 2);
    // Couplings that enter only through the interpolation derivative.
    let plateau_pairs = [(Field::Mu, Field::P), (Field::P, Field::Phi), (Field::Q, Field::Phi)];
    // Couplings that additionally carry the swelling term.
    let swelling_pairs = [(Field::Mu, Field::U), (Field::U, Field::Phi)];
    for xi in [0.5, 0.0] {
        let params = MaterialParams { xi, ..MaterialParams::default() };
        let problem = ChbProblem::new(&mesh, params, Sources::default());
        for range in [(1.1, 1.6), (-0.6, -0.1)] {
            let prev = random_state(&problem, &mut rng, range);
            let iter = random_state(&problem, &mut rng, range);
            let jac = monolithic_jacobian(&problem, &prev, &iter);
            let l = &problem.layout;
            for (rf, cf) in plateau_pairs {
                assert_eq!(max_block_entry(&jac, l, rf, cf), 0.0, "block ({}, {}) should vanish", rf.name(), cf.name());
            }
            for (rf, cf) in swelling_pairs {
                let m = max_block_entry(&jac, l, rf, cf);
                if xi == 0.0 {
                    assert_eq!(m, 0.0, "block ({}, {}) should vanish without swelling", rf.name(), cf.name());
                } else {
                    assert!(m > 0.0, "swelling keeps block ({}, {})", rf.name(), cf.name());
                }
            }
            for (rf, cf) in [(Field::U, Field::P), (Field::P, Field::U), (Field::Phi, Field::Mu), (Field::Mu, Field::Phi)] {
                assert!(max_block_entry(&jac, l, rf, cf) > 0.0, "block ({}, {}) should be populated", rf.name(), cf.name());
            }
        }
    }
}

#[test]
fn flow_block_equals_standalone_flow_matrix() {
    let mesh = StructuredTriMesh::unit_square(4).unwrap();
    let problem = ChbProblem::new(&mesh, MaterialParams::default(), Sources::default());
    let mut rng = rng(SEED + 3);
    let prev = random_state(&problem, &mut rng, (0.05, 0.95));
    let iter = random_state(&problem, &mut rng, (0.05, 0.95));
    let full = monolithic_jacobian(&problem, &prev, &iter);
    let l = &problem.layout;
    let start = l.offset(Field::P);
    let sub = full.block(start..l.total(), start..l.total());
    let (_, flow) = problem.assemble(&prev, &iter, FieldBlock::FLOW, true);
    let a = sub.to_dense();
    let b = flow.unwrap().to_dense();
    let diff = a.iter().flatten().zip(b.iter().flatten()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(diff <= 1e-14, "{diff}");
}
