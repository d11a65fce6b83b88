//! Residual and Jacobian of the time-discrete coupled system.
//!
//! One time step of the semi-implicit scheme reads, for all test functions,
//!
//! ```text
//! (φ − φⁿ⁻¹, η) + τ m (∇μ, ∇η) − τ (R, η)                         = 0
//! (μ, η) − γℓ (∇φ, ∇η) − γ/ℓ (Ψc′(φ) − Ψe′(φⁿ⁻¹), η)
//!        − (δφE_e(φ, u) + δφE_f(φ, u, p), η)                        = 0
//! (C(φ)(ε(u) − T(φ)), ε(η)) − (α(φ) p, ∇·η) − (f, η)                = 0
//! (p/M(φ) + α(φ)∇·u − sⁿ⁻¹, η) + τ (∇·q, η) − τ (S_f, η)            = 0
//! (κ(φ)⁻¹ q, η) − (p, ∇·η)                                         = 0
//! ```
//!
//! with `sⁿ⁻¹ = pⁿ⁻¹/M(φⁿ⁻¹) + α(φⁿ⁻¹)∇·uⁿ⁻¹`. Displacement rows on the
//! boundary are replaced by `u = 0`.

use nalgebra::Vector3;

use crate::fem::{interpolate, FunctionSpace, SpaceKind, p1_vector_divergences, p1_vector_strains, rt0_divergences, rt0_values, CellData, QuadratureRule};
use crate::linalg::{SparseMatrix, TripletBuffer};
use crate::mesh::StructuredTriMesh;
use crate::model::{psi_split, voigt_identity, MaterialParams};

use super::state::{Field, FieldBlock, FieldState, Layout};

/// Spatially constant source terms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sources {
    /// Phase-field source `R`.
    pub phase: f64,
    /// Body force `f`.
    pub body_force: [f64; 2],
    /// Fluid source `S_f`.
    pub fluid: f64,
}

/// Phase-field that is one on `x ≥ 1/2` and zero elsewhere.
pub fn half_domain_step(x: [f64; 2]) -> f64 {
    if x[0] >= 0.5 {
        1.0
    } else {
        0.0
    }
}

/// Mesh, material data and dof layout of one simulation.
#[derive(Debug, Clone)]
pub struct ChbProblem<'m> {
    pub mesh: &'m StructuredTriMesh,
    pub params: MaterialParams,
    pub sources: Sources,
    pub quad: QuadratureRule,
    pub layout: Layout,
    boundary_u: Vec<usize>,
    is_boundary_u: Vec<bool>,
}

// local numbering of the 16 dofs touching a cell
const L_PHI: usize = 0;
const L_MU: usize = 3;
const L_U: usize = 6;
const L_P: usize = 12;
const L_Q: usize = 13;
const NLOC: usize = 16;

impl<'m> ChbProblem<'m> {
    pub fn new(mesh: &'m StructuredTriMesh, params: MaterialParams, sources: Sources) -> Self {
        let layout = Layout::new(mesh);
        let mut is_boundary_u = vec![false; layout.len(Field::U)];
        let mut boundary_u = Vec::new();
        for v in 0..mesh.num_vertices() {
            if mesh.is_boundary_vertex(v) {
                for k in 0..2 {
                    boundary_u.push(2 * v + k);
                    is_boundary_u[2 * v + k] = true;
                }
            }
        }
        Self {
            mesh,
            params,
            sources,
            quad: QuadratureRule::degree5(),
            layout,
            boundary_u,
            is_boundary_u,
        }
    }

    /// State at `t = 0`: `φ` interpolated from `phi0`, all other fields zero.
    pub fn initial_state(&self, phi0: impl Fn([f64; 2]) -> f64) -> FieldState {
        let mut state = FieldState::zeros(&self.layout);
        let space = FunctionSpace::new(SpaceKind::P1, self.mesh);
        state.phi = interpolate(&space, phi0).expect("P1 interpolation").values;
        state
    }

    /// Displacement dofs constrained to zero.
    pub fn boundary_displacement_dofs(&self) -> &[usize] {
        &self.boundary_u
    }

    fn global_index(&self, f: Field, dof: usize) -> usize {
        self.layout.offset(f) + dof
    }

    fn cell_global_dofs(&self, cell: usize) -> [usize; NLOC] {
        let verts = self.mesh.cells()[cell];
        let edges = self.mesh.cell_edges(cell);
        let mut g = [0usize; NLOC];
        for a in 0..3 {
            g[L_PHI + a] = self.global_index(Field::Phi, verts[a]);
            g[L_MU + a] = self.global_index(Field::Mu, verts[a]);
            g[L_U + 2 * a] = self.global_index(Field::U, 2 * verts[a]);
            g[L_U + 2 * a + 1] = self.global_index(Field::U, 2 * verts[a] + 1);
            g[L_Q + a] = self.global_index(Field::Q, edges[a].edge);
        }
        g[L_P] = self.global_index(Field::P, cell);
        g
    }

    /// Residual of `block` (stacked in block order) and, optionally, its
    /// Jacobian with respect to the same block. Fields outside the block are
    /// held at their values in `iter`.
    pub fn assemble(
        &self,
        prev: &FieldState,
        iter: &FieldState,
        block: FieldBlock,
        with_jacobian: bool,
    ) -> (Vec<f64>, Option<SparseMatrix>) {
        let base = self.layout.block_offset(block);
        let size = self.layout.block_len(block);
        let u_range = self.layout.range(Field::U);
        let mut residual = vec![0.0; size];
        let mut triplets = with_jacobian.then(|| TripletBuffer::with_capacity(size, size, self.mesh.num_cells() * 120));

        let in_block = |g: usize| g >= base && g < base + size;
        let constrained = |g: usize| u_range.contains(&g) && self.is_boundary_u[g - u_range.start];

        let mut r = [0.0; NLOC];
        let mut jac = [[0.0; NLOC]; NLOC];
        for c in 0..self.mesh.num_cells() {
            r.iter_mut().for_each(|v| *v = 0.0);
            if with_jacobian {
                jac.iter_mut().for_each(|row| row.iter_mut().for_each(|v| *v = 0.0));
            }
            self.cell_contributions(c, prev, iter, &mut r, with_jacobian.then_some(&mut jac));

            let g = self.cell_global_dofs(c);
            for i in 0..NLOC {
                let gi = g[i];
                if !in_block(gi) || constrained(gi) {
                    continue;
                }
                residual[gi - base] += r[i];
                if let Some(t) = triplets.as_mut() {
                    for j in 0..NLOC {
                        let gj = g[j];
                        if in_block(gj) && jac[i][j] != 0.0 {
                            t.push(gi - base, gj - base, jac[i][j]);
                        }
                    }
                }
            }
        }

        if block.contains(Field::U) {
            for &d in &self.boundary_u {
                let gi = u_range.start + d;
                residual[gi - base] = iter.u[d];
                if let Some(t) = triplets.as_mut() {
                    t.push(gi - base, gi - base, 1.0);
                }
            }
        }
        let jacobian = triplets.map(|t| t.compress().expect("block-local indices are in range"));
        (residual, jacobian)
    }

    #[allow(clippy::needless_range_loop)]
    fn cell_contributions(
        &self,
        c: usize,
        prev: &FieldState,
        iter: &FieldState,
        r: &mut [f64; NLOC],
        mut jac: Option<&mut [[f64; NLOC]; NLOC]>,
    ) {
        let par = &self.params;
        let src = &self.sources;
        let tau = par.tau;
        let cell = CellData::new(self.mesh, c);
        let geom = &cell.geometry;
        let area = geom.area;
        let verts = self.mesh.cells()[c];
        let edges = self.mesh.cell_edges(c);

        let phi = verts.map(|v| iter.phi[v]);
        let phi_prev = verts.map(|v| prev.phi[v]);
        let mu = verts.map(|v| iter.mu[v]);
        let u: [f64; 6] = std::array::from_fn(|k| iter.u[2 * verts[k / 2] + k % 2]);
        let u_prev: [f64; 6] = std::array::from_fn(|k| prev.u[2 * verts[k / 2] + k % 2]);
        let p = iter.p[c];
        let p_prev = prev.p[c];
        let q = edges.map(|e| iter.q[e.edge]);

        let grads = geom.grads;
        let strains = p1_vector_strains(geom).map(|s| Vector3::new(s[0], s[1], s[2]));
        let divs = p1_vector_divergences(geom);
        let rt_div = rt0_divergences(geom, &cell.edge_signs);

        let strain: Vector3<f64> = (0..6).map(|k| strains[k] * u[k]).sum();
        let div_u: f64 = (0..6).map(|k| divs[k] * u[k]).sum();
        let div_u_prev: f64 = (0..6).map(|k| divs[k] * u_prev[k]).sum();
        let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
        let grad_of = |vals: [f64; 3]| {
            let mut g = [0.0; 2];
            for a in 0..3 {
                g[0] += vals[a] * grads[a][0];
                g[1] += vals[a] * grads[a][1];
            }
            g
        };
        let grad_phi = grad_of(phi);
        let grad_mu = grad_of(mu);
        let id = voigt_identity();
        let dt = id * par.xi;

        for (bary, weight) in self.quad.iter() {
            let w = weight * area;
            let lam = bary;
            let x = geom.point(bary);
            let interp = |v: [f64; 3]| lam[0] * v[0] + lam[1] * v[1] + lam[2] * v[2];
            let ph = interp(phi);
            let ph_prev = interp(phi_prev);
            let mu_q = interp(mu);

            let split = psi_split(ph);
            let dpsi_e_prev = psi_split(ph_prev).dpsi_e;
            let ec = par.elastic_coupling(ph, &strain);
            let fc = par.fluid_coupling(ph, div_u, p);

            let stiff = par.stiffness(ph);
            let dstiff = par.stiffness_prime(ph);
            let e = strain - par.swelling(ph);
            let alpha = par.biot(ph);
            let dalpha = par.biot_prime(ph);
            let stress = stiff * e - id * (alpha * p);
            let dstress = dstiff * e - stiff * dt - id * (dalpha * p);
            let m = par.compressibility(ph);
            let dm = par.compressibility_prime(ph);
            let kappa = par.permeability(ph);
            let dkappa = par.permeability_prime(ph);
            let storage_prev = p_prev / par.compressibility(ph_prev) + par.biot(ph_prev) * div_u_prev;

            let psi = rt0_values(geom, &cell.edge_signs, x);
            let mut flux = [0.0; 2];
            for i in 0..3 {
                flux[0] += q[i] * psi[i][0];
                flux[1] += q[i] * psi[i][1];
            }

            let chem = par.gamma / par.ell * (split.dpsi_c - dpsi_e_prev) + ec.value + fc.value;
            for a in 0..3 {
                r[L_PHI + a] += w * (ph - ph_prev - tau * src.phase) * lam[a];
                r[L_MU + a] += w * (mu_q - chem) * lam[a];
            }
            for k in 0..6 {
                r[L_U + k] += w * (stress.dot(&strains[k]) - src.body_force[k % 2] * lam[k / 2]);
            }
            r[L_P] += w * (p / m + alpha * div_u - storage_prev - tau * src.fluid);
            for i in 0..3 {
                r[L_Q + i] += w * dot(flux, psi[i]) / kappa;
            }

            let Some(jac) = jac.as_deref_mut() else { continue };
            let dchem = par.gamma / par.ell * split.d2psi_c + ec.d_phi + fc.d_phi;
            let c_strains: [Vector3<f64>; 6] = std::array::from_fn(|l| stiff * strains[l]);
            for a in 0..3 {
                for b in 0..3 {
                    let ll = w * lam[a] * lam[b];
                    jac[L_PHI + a][L_PHI + b] += ll;
                    jac[L_MU + a][L_MU + b] += ll;
                    jac[L_MU + a][L_PHI + b] -= dchem * ll;
                }
                for k in 0..6 {
                    jac[L_MU + a][L_U + k] -= w * lam[a] * (ec.d_strain.dot(&strains[k]) + fc.d_div * divs[k]);
                }
                jac[L_MU + a][L_P] -= w * lam[a] * fc.d_p;
            }
            for k in 0..6 {
                let ds = dstress.dot(&strains[k]);
                for b in 0..3 {
                    jac[L_U + k][L_PHI + b] += w * ds * lam[b];
                }
                for l in 0..6 {
                    jac[L_U + k][L_U + l] += w * c_strains[l].dot(&strains[k]);
                }
                jac[L_U + k][L_P] -= w * alpha * divs[k];
                jac[L_P][L_U + k] += w * alpha * divs[k];
            }
            let dstorage = -p * dm / (m * m) + dalpha * div_u;
            for b in 0..3 {
                jac[L_P][L_PHI + b] += w * dstorage * lam[b];
            }
            jac[L_P][L_P] += w / m;
            let dinv_kappa = -dkappa / (kappa * kappa);
            for i in 0..3 {
                let fpsi = dot(flux, psi[i]);
                for b in 0..3 {
                    jac[L_Q + i][L_PHI + b] += w * dinv_kappa * fpsi * lam[b];
                }
                for j in 0..3 {
                    jac[L_Q + i][L_Q + j] += w * dot(psi[j], psi[i]) / kappa;
                }
            }
        }

        // cellwise-constant integrands
        let gl = par.gamma * par.ell;
        let tm = tau * par.mobility;
        let div_q: f64 = (0..3).map(|i| q[i] * rt_div[i]).sum();
        for a in 0..3 {
            r[L_PHI + a] += tm * area * dot(grad_mu, grads[a]);
            r[L_MU + a] -= gl * area * dot(grad_phi, grads[a]);
        }
        r[L_P] += tau * area * div_q;
        for i in 0..3 {
            r[L_Q + i] -= p * rt_div[i] * area;
        }
        if let Some(jac) = jac {
            for a in 0..3 {
                for b in 0..3 {
                    let k = area * dot(grads[a], grads[b]);
                    jac[L_PHI + a][L_MU + b] += tm * k;
                    jac[L_MU + a][L_PHI + b] -= gl * k;
                }
            }
            for i in 0..3 {
                jac[L_P][L_Q + i] += tau * rt_div[i] * area;
                jac[L_Q + i][L_P] -= rt_div[i] * area;
            }
        }
    }

    /// Per-cell residual of the mass balance (rows of the `p` block),
    /// without Dirichlet handling.
    pub fn flow_cell_residuals(&self, prev: &FieldState, iter: &FieldState) -> Vec<f64> {
        let (r, _) = self.assemble(prev, iter, FieldBlock { first: Field::P, last: Field::P }, false);
        r
    }
}
