//! Constitutive laws of the Cahn-Hilliard-Biot system.
//!
//! All tensors are in 2D Voigt form: strains are `(ε_xx, ε_yy, 2ε_xy)`,
//! stresses `(σ_xx, σ_yy, σ_xy)`, so the double contraction `ε:σ` is the
//! plain dot product of the two 3-vectors.

use nalgebra::{Matrix3, Vector3};

pub type Voigt = Vector3<f64>;
pub type VoigtStiffness = Matrix3<f64>;

/// Voigt representation of the identity tensor.
pub fn voigt_identity() -> Voigt {
    Vector3::new(1.0, 1.0, 0.0)
}

/// Smooth step `φ²(3 − 2φ)` clamped to `[0, 1]` outside the unit interval.
pub fn pi_interp(phi: f64) -> f64 {
    if phi < 0.0 {
        0.0
    } else if phi > 1.0 {
        1.0
    } else {
        phi * phi * (3.0 - 2.0 * phi)
    }
}

/// `6φ − 6φ²` on `[0, 1]`, zero outside. Vanishes at both clamp points.
pub fn pi_prime(phi: f64) -> f64 {
    if (0.0..=1.0).contains(&phi) {
        6.0 * phi * (1.0 - phi)
    } else {
        0.0
    }
}

/// One-sided second derivative; jumps at `φ ∈ {0, 1}`.
pub fn pi_second(phi: f64) -> f64 {
    if (0.0..=1.0).contains(&phi) {
        6.0 - 12.0 * phi
    } else {
        0.0
    }
}

pub fn zeta(phi: f64, zeta0: f64, zeta1: f64) -> f64 {
    zeta0 + pi_interp(phi) * (zeta1 - zeta0)
}

pub fn zeta_prime(phi: f64, zeta0: f64, zeta1: f64) -> f64 {
    pi_prime(phi) * (zeta1 - zeta0)
}

pub fn zeta_second(phi: f64, zeta0: f64, zeta1: f64) -> f64 {
    pi_second(phi) * (zeta1 - zeta0)
}

/// Convex-concave split of the double well `φ²(1 − φ)² = Ψ_c − Ψ_e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiSplit {
    pub psi_c: f64,
    pub psi_e: f64,
    pub dpsi_c: f64,
    pub dpsi_e: f64,
    pub d2psi_c: f64,
}

impl PsiSplit {
    /// `Ψ_e″` is the constant 1.
    pub const D2PSI_E: f64 = 1.0;

    pub fn psi(&self) -> f64 {
        self.psi_c - self.psi_e
    }
}

pub fn psi_split(phi: f64) -> PsiSplit {
    let s = phi - 0.5;
    let s2 = s * s;
    PsiSplit {
        psi_c: s2 * s2 + 1.0 / 16.0,
        psi_e: 0.5 * s2,
        dpsi_c: 4.0 * s2 * s,
        dpsi_e: s,
        d2psi_c: 12.0 * s2,
    }
}

/// Swelling eigenstrain `ξ(φ − φ̄)I` in Voigt form. Its φ-derivative is
/// the constant `ξ·(1, 1, 0)`.
pub fn swelling(phi: f64, xi: f64, phi_bar: f64) -> Voigt {
    voigt_identity() * (xi * (phi - phi_bar))
}

/// Material constants. The phase-dependent coefficients interpolate between
/// the `0` and `1` endpoint values with [`pi_interp`].
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialParams {
    /// Surface tension γ.
    pub gamma: f64,
    /// Regularization width ℓ.
    pub ell: f64,
    pub mobility: f64,
    /// Swelling strength ξ.
    pub xi: f64,
    pub phi_bar: f64,
    pub c0: VoigtStiffness,
    pub c1: VoigtStiffness,
    pub m0: f64,
    pub m1: f64,
    pub kappa0: f64,
    pub kappa1: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    /// Time step τ.
    pub tau: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self {
            gamma: 5.0,
            ell: 2.0e-2,
            mobility: 1.0,
            xi: 0.5,
            phi_bar: 0.5,
            c0: Matrix3::new(100.0, 20.0, 0.0, 20.0, 100.0, 0.0, 0.0, 0.0, 100.0),
            c1: Matrix3::new(1.0, 0.1, 0.0, 0.1, 1.0, 0.0, 0.0, 0.0, 1.0),
            m0: 1.0,
            m1: 0.1,
            kappa0: 1.0,
            kappa1: 0.1,
            alpha0: 1.0,
            alpha1: 0.5,
            tau: 1.0e-5,
        }
    }
}

impl MaterialParams {
    /// Lists every violated positivity / definiteness requirement.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let positive = [
            ("gamma", self.gamma),
            ("ell", self.ell),
            ("mobility", self.mobility),
            ("tau", self.tau),
            ("M0", self.m0),
            ("M1", self.m1),
            ("kappa0", self.kappa0),
            ("kappa1", self.kappa1),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                out.push(format!("{name} must be positive and finite (got {v})"));
            }
        }
        for (name, v) in [("xi", self.xi), ("phi_bar", self.phi_bar), ("alpha0", self.alpha0), ("alpha1", self.alpha1)] {
            if !v.is_finite() {
                out.push(format!("{name} must be finite (got {v})"));
            }
        }
        for (name, c) in [("C0", &self.c0), ("C1", &self.c1)] {
            if (c - c.transpose()).abs().max() > 1e-12 * c.abs().max().max(1.0) {
                out.push(format!("{name} must be symmetric"));
            } else if c.cholesky().is_none() {
                out.push(format!("{name} must be positive definite"));
            }
        }
        out
    }

    pub fn stiffness(&self, phi: f64) -> VoigtStiffness {
        self.c0 + (self.c1 - self.c0) * pi_interp(phi)
    }

    pub fn stiffness_prime(&self, phi: f64) -> VoigtStiffness {
        (self.c1 - self.c0) * pi_prime(phi)
    }

    pub fn stiffness_second(&self, phi: f64) -> VoigtStiffness {
        (self.c1 - self.c0) * pi_second(phi)
    }

    /// Compressibility modulus `M(φ)`.
    pub fn compressibility(&self, phi: f64) -> f64 {
        zeta(phi, self.m0, self.m1)
    }

    pub fn compressibility_prime(&self, phi: f64) -> f64 {
        zeta_prime(phi, self.m0, self.m1)
    }

    pub fn biot(&self, phi: f64) -> f64 {
        zeta(phi, self.alpha0, self.alpha1)
    }

    pub fn biot_prime(&self, phi: f64) -> f64 {
        zeta_prime(phi, self.alpha0, self.alpha1)
    }

    pub fn permeability(&self, phi: f64) -> f64 {
        zeta(phi, self.kappa0, self.kappa1)
    }

    pub fn permeability_prime(&self, phi: f64) -> f64 {
        zeta_prime(phi, self.kappa0, self.kappa1)
    }

    pub fn swelling(&self, phi: f64) -> Voigt {
        swelling(phi, self.xi, self.phi_bar)
    }

    /// Total stress `C(φ)(ε − T(φ)) − α(φ)·p·I`.
    pub fn stress(&self, phi: f64, strain: &Voigt, p: f64) -> Voigt {
        self.stiffness(phi) * (strain - self.swelling(phi)) - voigt_identity() * (self.biot(phi) * p)
    }

    /// Elastic part of the chemical potential,
    /// `−T′:C(φ)(ε − T) + ½(ε − T):C′(φ)(ε − T)`.
    pub fn dphi_e_elastic(&self, phi: f64, strain: &Voigt) -> f64 {
        self.elastic_coupling(phi, strain).value
    }

    /// Fluid part of the chemical potential,
    /// `M′(φ)p²/(2M(φ)²) − p α′(φ) ∇·u`.
    pub fn dphi_e_fluid(&self, phi: f64, div_u: f64, p: f64) -> f64 {
        self.fluid_coupling(phi, div_u, p).value
    }

    /// Elastic chemical-potential term with its partial derivatives.
    pub fn elastic_coupling(&self, phi: f64, strain: &Voigt) -> ElasticCoupling {
        let dt = voigt_identity() * self.xi;
        let e = strain - self.swelling(phi);
        let c = self.stiffness(phi);
        let dc = self.stiffness_prime(phi);
        let d2c = self.stiffness_second(phi);
        let ce = c * e;
        let dce = dc * e;
        ElasticCoupling {
            value: -dt.dot(&ce) + 0.5 * e.dot(&dce),
            d_phi: dt.dot(&(c * dt)) - 2.0 * dt.dot(&dce) + 0.5 * e.dot(&(d2c * e)),
            d_strain: -(c * dt) + dce,
        }
    }

    pub fn fluid_coupling(&self, phi: f64, div_u: f64, p: f64) -> FluidCoupling {
        let m = self.compressibility(phi);
        let dm = self.compressibility_prime(phi);
        let d2m = zeta_second(phi, self.m0, self.m1);
        let da = self.biot_prime(phi);
        let d2a = zeta_second(phi, self.alpha0, self.alpha1);
        let m2 = m * m;
        FluidCoupling {
            value: dm * p * p / (2.0 * m2) - p * da * div_u,
            d_phi: d2m * p * p / (2.0 * m2) - dm * dm * p * p / (m2 * m) - p * d2a * div_u,
            d_div: -p * da,
            d_p: dm * p / m2 - da * div_u,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticCoupling {
    pub value: f64,
    pub d_phi: f64,
    pub d_strain: Voigt,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidCoupling {
    pub value: f64,
    pub d_phi: f64,
    pub d_div: f64,
    pub d_p: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1.0)
    }

    // Energy densities used only as primitives for the derivative checks.
    fn elastic_energy(p: &MaterialParams, phi: f64, strain: &Voigt) -> f64 {
        let e = strain - p.swelling(phi);
        0.5 * e.dot(&(p.stiffness(phi) * e))
    }

    fn fluid_energy(p: &MaterialParams, phi: f64, div_u: f64, fluid_content: f64) -> f64 {
        // E_f = M/2 (θ − α∇·u)², with p = M(θ − α∇·u)
        let m = p.compressibility(phi);
        let s = fluid_content - p.biot(phi) * div_u;
        0.5 * m * s * s
    }

    #[test]
    fn interpolation_values() {
        assert_eq!(pi_interp(-0.3), 0.0);
        assert_eq!(pi_interp(1.2), 1.0);
        assert_eq!(pi_interp(0.5), 0.5);
        assert!((pi_interp(0.25) - 0.15625).abs() < 1e-15);
        assert_eq!(pi_prime(0.5), 1.5);
        assert_eq!(pi_prime(0.0), 0.0);
        assert_eq!(pi_prime(1.0), 0.0);
        for k in 0..=100 {
            let phi = k as f64 / 100.0;
            assert!((pi_interp(phi) + pi_interp(1.0 - phi) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn pi_monotone_and_c1() {
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=3000 {
            let phi = -1.0 + k as f64 * 1e-3;
            let v = pi_interp(phi);
            assert!(v >= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
        for x in [0.0, 1.0] {
            assert!(pi_prime(x - 1e-9).abs() < 1e-7 && pi_prime(x + 1e-9).abs() < 1e-7);
        }
    }

    #[test]
    fn table_coefficients() {
        let p = MaterialParams::default();
        assert_eq!(p.compressibility(0.0), 1.0);
        assert!((p.compressibility(1.0) - 0.1).abs() < 1e-15);
        assert!((p.compressibility(0.5) - 0.55).abs() < 1e-15);
        assert!((p.compressibility_prime(0.5) + 1.35).abs() < 1e-14);
        assert!((p.biot(p.phi_bar) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn psi_split_values() {
        let s = psi_split(0.5);
        assert_eq!((s.psi_c, s.psi_e, s.psi()), (1.0 / 16.0, 0.0, 1.0 / 16.0));
        assert!(psi_split(0.0).psi().abs() < 1e-15 && psi_split(1.0).psi().abs() < 1e-15);
        let s1 = psi_split(1.0);
        assert_eq!((s1.dpsi_c, s1.dpsi_e), (0.5, 0.5));
        assert_eq!(s1.dpsi_c - s1.dpsi_e, 0.0);
    }

    #[test]
    fn swelling_values() {
        assert_eq!(swelling(0.5, 0.5, 0.5), Vector3::zeros());
        assert_eq!(swelling(1.0, 0.5, 0.5), Vector3::new(0.25, 0.25, 0.0));
    }

    #[test]
    fn stress_values() {
        let p = MaterialParams::default();
        assert_eq!(p.stress(0.5, &Vector3::zeros(), 0.0), Vector3::zeros());
        let t = p.swelling(0.8);
        assert!(p.stress(0.8, &t, 0.0).norm() < 1e-13);
        let s = p.stress(0.0, &Vector3::new(1.0, 0.0, 0.0), 0.0);
        assert!((s - Vector3::new(130.0, 50.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn elastic_coupling_values() {
        let p = MaterialParams::default();
        assert!(p.dphi_e_elastic(0.7, &p.swelling(0.7)).abs() < 1e-13);
        // φ < 0: ε − T = (1, 0, 0)
        let phi = -0.2;
        let eps = p.swelling(phi) + Vector3::new(1.0, 0.0, 0.0);
        assert!((p.dphi_e_elastic(phi, &eps) + 60.0).abs() < 1e-12);
    }

    #[test]
    fn fluid_coupling_values() {
        let p = MaterialParams::default();
        assert_eq!(p.dphi_e_fluid(0.3, 0.7, 0.0), 0.0);
        assert!((p.dphi_e_fluid(0.5, 0.0, 1.0) + 1.35 / 0.605).abs() < 1e-12);
        assert!((p.dphi_e_fluid(0.5, 0.0, 1.0) + 2.231405).abs() < 1e-6);
        assert_eq!(p.dphi_e_fluid(-0.1, 0.4, 2.0), 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = MaterialParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-6;
        for _ in 0..100 {
            // stay clear of the kinks of π″ at 0 and 1
            let phi = rng.random_range(0.02..0.98);
            let eps = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let div = rng.random_range(-1.0..1.0);
            let pr = rng.random_range(-2.0..2.0);

            assert!(rel_err(pi_prime(phi), central(pi_interp, phi, h)) < 1e-6);
            assert!(rel_err(pi_second(phi), central(pi_prime, phi, h)) < 1e-6);
            assert!(rel_err(p.compressibility_prime(phi), central(|x| p.compressibility(x), phi, h)) < 1e-6);
            assert!(rel_err(p.permeability_prime(phi), central(|x| p.permeability(x), phi, h)) < 1e-6);
            assert!(rel_err(p.biot_prime(phi), central(|x| p.biot(x), phi, h)) < 1e-6);
            let s = psi_split(phi);
            assert!(rel_err(s.dpsi_c, central(|x| psi_split(x).psi_c, phi, h)) < 1e-6);
            assert!(rel_err(s.dpsi_e, central(|x| psi_split(x).psi_e, phi, h)) < 1e-6);
            assert!(rel_err(s.d2psi_c, central(|x| psi_split(x).dpsi_c, phi, h)) < 1e-6);

            // δφE_e is the φ-derivative of the elastic energy at fixed ε
            let ec = p.elastic_coupling(phi, &eps);
            assert!(rel_err(ec.value, central(|x| elastic_energy(&p, x, &eps), phi, h)) < 1e-6);
            assert!(rel_err(ec.d_phi, central(|x| p.dphi_e_elastic(x, &eps), phi, h)) < 1e-6);
            for k in 0..3 {
                let mut e = Vector3::zeros();
                e[k] = 1.0;
                let fd = central(|t| p.dphi_e_elastic(phi, &(eps + e * t)), 0.0, h);
                assert!(rel_err(ec.d_strain[k], fd) < 1e-6);
            }

            // δφE_f is the φ-derivative of the fluid energy at fixed fluid content
            let theta = pr / p.compressibility(phi) + p.biot(phi) * div;
            let fc = p.fluid_coupling(phi, div, pr);
            assert!(rel_err(fc.value, central(|x| fluid_energy(&p, x, div, theta), phi, h)) < 1e-6);
            assert!(rel_err(fc.d_phi, central(|x| p.dphi_e_fluid(x, div, pr), phi, h)) < 1e-6);
            assert!(rel_err(fc.d_div, central(|x| p.dphi_e_fluid(phi, x, pr), div, h)) < 1e-6);
            assert!(rel_err(fc.d_p, central(|x| p.dphi_e_fluid(phi, div, x), pr, h)) < 1e-6);
        }
    }

    #[test]
    fn stiffness_spd_everywhere() {
        let p = MaterialParams::default();
        for k in 0..=200 {
            let phi = -0.5 + k as f64 * 0.01;
            let c = p.stiffness(phi);
            assert!((c - c.transpose()).norm() < 1e-14);
            assert!(c.cholesky().is_some(), "φ={phi}");
        }
    }

    #[test]
    fn coefficient_bounds() {
        let p = MaterialParams::default();
        for k in 0..=300 {
            let phi = -1.0 + k as f64 * 0.01;
            for (z0, z1) in [(p.m0, p.m1), (p.kappa0, p.kappa1), (p.alpha0, p.alpha1)] {
                let v = zeta(phi, z0, z1);
                assert!(v >= z0.min(z1) - 1e-15 && v <= z0.max(z1) + 1e-15);
            }
            for (i, j) in [(0, 0), (0, 1), (1, 1), (2, 2)] {
                let v = p.stiffness(phi)[(i, j)];
                let (a, b) = (p.c0[(i, j)], p.c1[(i, j)]);
                assert!(v >= a.min(b) - 1e-12 && v <= a.max(b) + 1e-12);
            }
            assert!(p.permeability(phi) > 0.0 && p.compressibility(phi) > 0.0);
        }
    }

    #[test]
    fn violations_listed() {
        let mut p = MaterialParams::default();
        assert!(p.violations().is_empty());
        p.tau = -1.0;
        p.gamma = 0.0;
        let v = p.violations();
        assert_eq!(v.len(), 2);
        assert!(v.iter().any(|s| s.contains("tau")));
        p.c1 = -p.c1;
        assert!(p.violations().iter().any(|s| s.contains("C1")));
    }
}
