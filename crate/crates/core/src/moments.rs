//! Estimators of the double-commutator norm `‖[H_j,[H_j,ρ]]‖`.
//!
//! Three routes are provided:
//!
//! * [`djj_exact`]: direct matrix arithmetic, used as the oracle.
//! * [`moments_of`] + [`djj_from_moments`]: pure states, from `⟨H⟩ … ⟨H⁴⟩`.
//! * [`djj_finite_difference`]: any state, from purities and overlaps of `ρ`
//!   and its two slightly rotated copies.
//!
//! Measurement noise is modelled as independent additive Gaussian noise on
//! every scalar expectation value.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};
use crate::linalg::{commutator, eig_hermitian, hs_norm, EigenSystem, HermitianOperator};
use crate::state::QuantumState;

/// Default finite-difference time step for mixed-state estimation.
pub const DEFAULT_FD_DT: f64 = 1e-3;

/// `⟨H⟩, ⟨H²⟩, ⟨H³⟩, ⟨H⁴⟩` on one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl MomentSet {
    /// `m2 ≥ m1²` and `m4 ≥ m2²` up to `tol`; guaranteed for noiseless moments.
    pub fn satisfies_cauchy_schwarz(&self, tol: f64) -> bool {
        self.m2 >= self.m1 * self.m1 - tol && self.m4 >= self.m2 * self.m2 - tol
    }
}

/// Gaussian perturbation of measured scalars with its own seeded stream.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    std: f64,
    rng: ChaCha8Rng,
}

impl NoiseModel {
    pub fn new(std: f64, seed: u64) -> SimResult<Self> {
        if !(std >= 0.0 && std.is_finite()) {
            return Err(SimError::InvalidParameter(format!(
                "noise std must be finite and non-negative, got {std}"
            )));
        }
        Ok(Self {
            std,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn from_rng(std: f64, rng: ChaCha8Rng) -> SimResult<Self> {
        let mut model = Self::new(std, 0)?;
        model.rng = rng;
        Ok(model)
    }

    /// No noise; values pass through bit-for-bit.
    pub fn exact() -> Self {
        Self::new(0.0, 0).expect("zero std is valid")
    }

    pub fn std(&self) -> f64 {
        self.std
    }

    pub fn is_exact(&self) -> bool {
        self.std == 0.0
    }

    /// `value + std·z` with `z ~ N(0, 1)`; draws nothing when `std == 0`.
    pub fn perturb(&mut self, value: f64) -> f64 {
        if self.std == 0.0 {
            return value;
        }
        let z: f64 = StandardNormal.sample(&mut self.rng);
        value + self.std * z
    }
}

/// `‖[H,[H,ρ]]‖` by direct matrix arithmetic.
pub fn djj_exact(h: &HermitianOperator, state: &QuantumState) -> SimResult<f64> {
    check_dim(h, state)?;
    let rho = state.density_matrix();
    let inner = commutator(h.matrix(), &rho)?;
    Ok(hs_norm(&commutator(h.matrix(), &inner)?))
}

/// First four moments of `h` on a pure state, each perturbed by `noise`.
///
/// Uses two matrix-vector products: with `u = Hψ`, `w = Hu`,
/// `⟨H⟩ = ⟨ψ|u⟩`, `⟨H²⟩ = ⟨u|u⟩`, `⟨H³⟩ = ⟨u|w⟩`, `⟨H⁴⟩ = ⟨w|w⟩`.
pub fn moments_of(
    h: &HermitianOperator,
    state: &QuantumState,
    noise: &mut NoiseModel,
) -> SimResult<MomentSet> {
    check_dim(h, state)?;
    let psi = state.as_pure().ok_or(SimError::RequiresPure)?;
    let u = h.matrix().apply(psi)?;
    let w = h.matrix().apply(&u)?;
    let exact = MomentSet {
        m1: psi.dotc(&u).re,
        m2: u.norm_squared(),
        m3: u.dotc(&w).re,
        m4: w.norm_squared(),
    };
    Ok(MomentSet {
        m1: noise.perturb(exact.m1),
        m2: noise.perturb(exact.m2),
        m3: noise.perturb(exact.m3),
        m4: noise.perturb(exact.m4),
    })
}

/// `‖D_jj‖` on a pure state through the moment formula.
///
/// Without noise the moments are taken of `H − ⟨H⟩`, which leaves the
/// double commutator unchanged but removes the cancellation between the
/// raw moments near eigenstates. Noisy moments are always raw.
pub fn djj_pure(h: &HermitianOperator, state: &QuantumState, noise: &mut NoiseModel) -> SimResult<f64> {
    if !noise.is_exact() {
        return Ok(djj_from_moments(&moments_of(h, state, noise)?));
    }
    check_dim(h, state)?;
    let psi = state.as_pure().ok_or(SimError::RequiresPure)?;
    let hpsi = h.matrix().apply(psi)?;
    let mean = psi.dotc(&hpsi).re;
    let u = &hpsi - psi * Complex64::new(mean, 0.0);
    let w = h.matrix().apply(&u)? - &u * Complex64::new(mean, 0.0);
    Ok(djj_from_moments(&MomentSet {
        m1: psi.dotc(&u).re,
        m2: u.norm_squared(),
        m3: u.dotc(&w).re,
        m4: w.norm_squared(),
    }))
}

/// `√(6⟨H²⟩² − 8⟨H⟩⟨H³⟩ + 2⟨H⁴⟩)` with the radicand clamped at zero.
pub fn djj_from_moments(m: &MomentSet) -> f64 {
    let radicand = 6.0 * m.m2 * m.m2 - 8.0 * m.m1 * m.m3 + 2.0 * m.m4;
    radicand.max(0.0).sqrt()
}

/// The six trace scalars entering the finite-difference estimator.
///
/// Each scalar is stored as an offset from `Tr ρ²`. All six are equal to
/// `Tr ρ²` at zero order while the radicand is `O(dt⁴)`, so the offsets carry
/// the information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapScalars {
    pub purity: f64,
    /// `Tr ρ₁² − Tr ρ²`
    pub rho1_sq: f64,
    /// `Tr ρ₂² − Tr ρ²`
    pub rho2_sq: f64,
    /// `Tr ρ² − Tr ρ²`
    pub rho_sq: f64,
    /// `Tr ρ₁ρ₂ − Tr ρ²`
    pub rho1_rho2: f64,
    /// `Tr ρ₁ρ − Tr ρ²`
    pub rho1_rho: f64,
    /// `Tr ρ₂ρ − Tr ρ²`
    pub rho2_rho: f64,
}

impl OverlapScalars {
    /// `Tr(ρ₁²) + Tr(ρ₂²) + 4Tr(ρ²) + 2Tr(ρ₁ρ₂) − 4Tr(ρ₁ρ) − 4Tr(ρ₂ρ)`; the
    /// `Tr ρ²` parts cancel identically.
    pub fn radicand(&self) -> f64 {
        self.rho1_sq + self.rho2_sq + 4.0 * self.rho_sq + 2.0 * self.rho1_rho2
            - 4.0 * self.rho1_rho
            - 4.0 * self.rho2_rho
    }

    fn perturbed(self, noise: &mut NoiseModel) -> Self {
        Self {
            purity: self.purity,
            rho1_sq: noise.perturb(self.rho1_sq),
            rho2_sq: noise.perturb(self.rho2_sq),
            rho_sq: noise.perturb(self.rho_sq),
            rho1_rho2: noise.perturb(self.rho1_rho2),
            rho1_rho: noise.perturb(self.rho1_rho),
            rho2_rho: noise.perturb(self.rho2_rho),
        }
    }
}

/// Computes the overlap scalars for `ρ₁ = e^{iHdt}ρe^{−iHdt}` and
/// `ρ₂ = e^{−iHdt}ρe^{iHdt}`.
pub fn overlap_scalars(eig: &EigenSystem, state: &QuantumState, dt: f64) -> SimResult<OverlapScalars> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SimError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if eig.dim() != state.dim() {
        return Err(SimError::DimensionMismatch {
            expected: state.dim(),
            found: eig.dim(),
        });
    }
    // Work in the eigenbasis of H, where ρ₁ = ρ + Δ₁ and ρ₂ = ρ + Δ₂ with
    // (Δ)_kl = ρ_kl (e^{±i(e_k − e_l)dt} − 1).
    let v = eig.vectors().as_matrix();
    let rho = state.density_matrix();
    let w = v.ad_mul(rho.as_matrix()) * v;
    let e = eig.eigenvalues();
    let n = e.len();

    // e^{iθ} − 1 = 2i sin(θ/2) e^{iθ/2}, free of cancellation for small θ
    let expm1_i = |theta: f64| -> Complex64 {
        Complex64::new(0.0, 2.0 * (theta / 2.0).sin()) * Complex64::from_polar(1.0, theta / 2.0)
    };
    let mut d1 = w.clone();
    let mut d2 = w.clone();
    for k in 0..n {
        for l in 0..n {
            let theta = (e[k] - e[l]) * dt;
            d1[(k, l)] = w[(k, l)] * expm1_i(theta);
            d2[(k, l)] = w[(k, l)] * expm1_i(-theta);
        }
    }
    let tr = |a: &nalgebra::DMatrix<Complex64>, b: &nalgebra::DMatrix<Complex64>| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            for k in 0..n {
                acc += (a[(i, k)] * b[(k, i)]).re;
            }
        }
        acc
    };
    let rho_d1 = tr(&w, &d1);
    let rho_d2 = tr(&w, &d2);
    Ok(OverlapScalars {
        purity: tr(&w, &w),
        rho1_sq: 2.0 * rho_d1 + tr(&d1, &d1),
        rho2_sq: 2.0 * rho_d2 + tr(&d2, &d2),
        rho_sq: 0.0,
        rho1_rho2: rho_d1 + rho_d2 + tr(&d1, &d2),
        rho1_rho: rho_d1,
        rho2_rho: rho_d2,
    })
}

/// Finite-difference estimate of `‖[H,[H,ρ]]‖` from purities and
/// Hilbert–Schmidt overlaps; error is `O(dt²)` when noiseless.
pub fn djj_finite_difference(
    h: &HermitianOperator,
    rho: &QuantumState,
    dt: f64,
    noise: &mut NoiseModel,
) -> SimResult<f64> {
    check_dim(h, rho)?;
    let eig = eig_hermitian(h)?;
    djj_finite_difference_eig(&eig, rho, dt, noise)
}

/// [`djj_finite_difference`] with a precomputed eigensystem.
pub fn djj_finite_difference_eig(
    eig: &EigenSystem,
    rho: &QuantumState,
    dt: f64,
    noise: &mut NoiseModel,
) -> SimResult<f64> {
    let scalars = overlap_scalars(eig, rho, dt)?.perturbed(noise);
    Ok(scalars.radicand().max(0.0).sqrt() / (dt * dt))
}

fn check_dim(h: &HermitianOperator, state: &QuantumState) -> SimResult<()> {
    if h.dim() != state.dim() {
        return Err(SimError::DimensionMismatch {
            expected: state.dim(),
            found: h.dim(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CVector, ComplexMatrix};
    use crate::operators::{number_operator, sigma_z};
    use crate::state::{basis_vector, HilbertStructure};
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn z() -> HermitianOperator {
        HermitianOperator::new(sigma_z(), "z").unwrap()
    }

    fn qubit() -> HilbertStructure {
        HilbertStructure::qubits(1).unwrap()
    }

    fn plus() -> QuantumState {
        let v = CVector::from_vec(vec![
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
        ]);
        QuantumState::pure(v, qubit()).unwrap()
    }

    fn zero() -> QuantumState {
        QuantumState::pure(basis_vector(2, 0), qubit()).unwrap()
    }

    #[test]
    fn exact_oracle_values() {
        assert_eq!(djj_exact(&z(), &zero()).unwrap(), 0.0);
        assert_relative_eq!(djj_exact(&z(), &plus()).unwrap(), 2.0 * 2f64.sqrt(), epsilon = 1e-14);
        let mm = QuantumState::maximally_mixed(HilbertStructure::qubits(2).unwrap());
        let h = HermitianOperator::new(
            crate::linalg::kron(&sigma_z(), &crate::operators::sigma_x()),
            "zx",
        )
        .unwrap();
        assert_eq!(djj_exact(&h, &mm).unwrap(), 0.0);
    }

    #[test]
    fn noiseless_moments() {
        let m = moments_of(&z(), &plus(), &mut NoiseModel::exact()).unwrap();
        assert_eq!((m.m1, m.m3), (0.0, 0.0));
        assert_relative_eq!(m.m2, 1.0, epsilon = 1e-15);
        assert_relative_eq!(m.m4, 1.0, epsilon = 1e-15);

        let s = HilbertStructure::fock(8).unwrap();
        let n = number_operator(&s).unwrap();
        let five = QuantumState::pure(basis_vector(8, 5), s).unwrap();
        let m = moments_of(&n, &five, &mut NoiseModel::exact()).unwrap();
        assert_eq!((m.m1, m.m2, m.m3, m.m4), (5.0, 25.0, 125.0, 625.0));
        assert!(m.satisfies_cauchy_schwarz(1e-9));
    }

    #[test]
    fn moments_reject_mixed_input() {
        let mm = QuantumState::maximally_mixed(qubit());
        assert!(matches!(
            moments_of(&z(), &mm, &mut NoiseModel::exact()),
            Err(SimError::RequiresPure)
        ));
    }

    #[test]
    fn seeded_noise_replays() {
        let mut a = NoiseModel::new(0.1, 7).unwrap();
        let mut b = NoiseModel::new(0.1, 7).unwrap();
        let ma = moments_of(&z(), &plus(), &mut a).unwrap();
        let mb = moments_of(&z(), &plus(), &mut b).unwrap();
        assert_eq!(ma, mb);
        assert_ne!(ma.m2, 1.0);
        let mut c = NoiseModel::new(0.1, 8).unwrap();
        assert_ne!(moments_of(&z(), &plus(), &mut c).unwrap(), ma);
    }

    #[test]
    fn moment_formula_values() {
        let m = MomentSet { m1: 0.0, m2: 1.0, m3: 0.0, m4: 1.0 };
        assert_relative_eq!(djj_from_moments(&m), 8f64.sqrt());
        let eig = MomentSet { m1: 1.0, m2: 1.0, m3: 1.0, m4: 1.0 };
        assert_eq!(djj_from_moments(&eig), 0.0);
        // radicand 6·0.01 − 0 + 2·(−0.035) = −0.01
        let neg = MomentSet { m1: 0.0, m2: 0.1, m3: 0.0, m4: -0.035 };
        assert_eq!(djj_from_moments(&neg), 0.0);
    }

    #[test]
    fn finite_difference_on_plus() {
        let est = djj_finite_difference(&z(), &plus().to_mixed(), 1e-3, &mut NoiseModel::exact())
            .unwrap();
        assert_relative_eq!(est, 2.0 * 2f64.sqrt(), max_relative = 1e-5);
        let mm = QuantumState::maximally_mixed(qubit());
        let est = djj_finite_difference(&z(), &mm, 1e-3, &mut NoiseModel::exact()).unwrap();
        assert!(est < 1e-9);
    }

    #[test]
    fn finite_difference_rejects_bad_dt() {
        assert!(djj_finite_difference(&z(), &plus(), 0.0, &mut NoiseModel::exact()).is_err());
        assert!(djj_finite_difference(&z(), &plus(), -1e-3, &mut NoiseModel::exact()).is_err());
    }

    #[test]
    fn finite_difference_is_second_order() {
        let rho = ComplexMatrix::from_rows(
            2,
            &[
                Complex64::new(0.6, 0.0),
                Complex64::new(0.2, 0.1),
                Complex64::new(0.2, -0.1),
                Complex64::new(0.4, 0.0),
            ],
        )
        .unwrap();
        let state = QuantumState::mixed(rho, qubit()).unwrap();
        let h = HermitianOperator::new(
            ComplexMatrix::from_rows(
                2,
                &[
                    Complex64::new(0.3, 0.0),
                    Complex64::new(0.5, -0.2),
                    Complex64::new(0.5, 0.2),
                    Complex64::new(-0.7, 0.0),
                ],
            )
            .unwrap(),
            "h",
        )
        .unwrap();
        let exact = djj_exact(&h, &state).unwrap();
        let err = |dt: f64| {
            (djj_finite_difference(&h, &state, dt, &mut NoiseModel::exact()).unwrap() - exact).abs()
        };
        let ratio = err(2e-2) / err(1e-2);
        assert!((3.6..4.4).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn scalars_match_direct_traces() {
        use crate::linalg::hs_inner;
        use crate::state::evolve_unitary;
        let h = z();
        let eig = eig_hermitian(&h).unwrap();
        let rho = plus().to_mixed();
        let dt = 0.3;
        let s = overlap_scalars(&eig, &rho, dt).unwrap();
        let r1 = evolve_unitary(&rho, &eig, -dt).unwrap().density_matrix();
        let r2 = evolve_unitary(&rho, &eig, dt).unwrap().density_matrix();
        let r = rho.density_matrix();
        let p = hs_inner(&r, &r).unwrap();
        assert_relative_eq!(s.purity, p, epsilon = 1e-14);
        assert_relative_eq!(s.rho1_sq + p, hs_inner(&r1, &r1).unwrap(), epsilon = 1e-14);
        assert_relative_eq!(s.rho1_rho2 + p, hs_inner(&r1, &r2).unwrap(), epsilon = 1e-14);
        assert_relative_eq!(s.rho1_rho + p, hs_inner(&r1, &r).unwrap(), epsilon = 1e-14);
        assert_relative_eq!(s.rho2_rho + p, hs_inner(&r2, &r).unwrap(), epsilon = 1e-14);
    }
}
