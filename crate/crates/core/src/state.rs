//! Quantum states over a declared Hilbert-space layout.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};
use crate::linalg::{CVector, ComplexMatrix, EigenSystem, HERMITIAN_TOL};

const NORM_TOL: f64 = 1e-10;

/// Tensor layout of the simulated system.
///
/// The Fock factor (if any) comes first, followed by the qubit factors with
/// site 0 leftmost (most significant).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertStructure {
    qubit_sites: usize,
    fock_dim: usize,
}

impl HilbertStructure {
    /// `fock_dim == 0` means no bosonic mode.
    pub fn new(qubit_sites: usize, fock_dim: usize) -> SimResult<Self> {
        let space = Self {
            qubit_sites,
            fock_dim,
        };
        if qubit_sites >= usize::BITS as usize - 2 {
            return Err(SimError::InvalidParameter(format!(
                "{qubit_sites} qubit sites is too many"
            )));
        }
        if space.dim() < 2 {
            return Err(SimError::InvalidParameter(format!(
                "Hilbert space with {qubit_sites} qubits and Fock dimension {fock_dim} has dimension < 2"
            )));
        }
        Ok(space)
    }

    pub fn qubits(qubit_sites: usize) -> SimResult<Self> {
        Self::new(qubit_sites, 0)
    }

    pub fn fock(fock_dim: usize) -> SimResult<Self> {
        Self::new(0, fock_dim)
    }

    pub fn qubit_sites(&self) -> usize {
        self.qubit_sites
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn has_fock_mode(&self) -> bool {
        self.fock_dim > 0
    }

    pub fn qubit_dim(&self) -> usize {
        1 << self.qubit_sites
    }

    pub fn dim(&self) -> usize {
        self.fock_dim.max(1) * self.qubit_dim()
    }

    /// Flat index of `|n, q_0 q_1 ...⟩`.
    pub fn index_of(&self, fock_level: usize, qubit_bits: usize) -> usize {
        fock_level * self.qubit_dim() + qubit_bits
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Pure(CVector),
    Mixed(ComplexMatrix),
}

/// A normalized pure state or a density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    repr: Repr,
    space: HilbertStructure,
}

impl QuantumState {
    pub fn pure(amplitudes: CVector, space: HilbertStructure) -> SimResult<Self> {
        if amplitudes.len() != space.dim() {
            return Err(SimError::DimensionMismatch {
                expected: space.dim(),
                found: amplitudes.len(),
            });
        }
        if !amplitudes.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(SimError::NonFinite("pure state"));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(SimError::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(Self {
            repr: Repr::Pure(amplitudes),
            space,
        })
    }

    /// Normalizes `amplitudes` before validation.
    pub fn pure_normalized(amplitudes: CVector, space: HilbertStructure) -> SimResult<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(SimError::InvalidState("zero or non-finite vector".into()));
        }
        Self::pure(amplitudes.unscale(norm), space)
    }

    pub fn mixed(rho: ComplexMatrix, space: HilbertStructure) -> SimResult<Self> {
        if rho.dim() != space.dim() {
            return Err(SimError::DimensionMismatch {
                expected: space.dim(),
                found: rho.dim(),
            });
        }
        let deviation = rho.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(SimError::NotHermitian {
                label: "density matrix".into(),
                deviation,
            });
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(SimError::InvalidState(format!("trace {tr} is not 1")));
        }
        let sym = (&rho + &rho.adjoint()).scale_real(0.5);
        let eig = SymmetricEigen::try_new(sym.as_matrix().clone(), f64::EPSILON, 100_000)
            .ok_or(SimError::EigenNonConvergence)?;
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -NORM_TOL {
            return Err(SimError::InvalidState(format!(
                "density matrix has negative eigenvalue {min}"
            )));
        }
        Ok(Self {
            repr: Repr::Mixed(sym),
            space,
        })
    }

    /// The maximally mixed state `I/dim`.
    pub fn maximally_mixed(space: HilbertStructure) -> Self {
        let dim = space.dim();
        Self {
            repr: Repr::Mixed(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64)),
            space,
        }
    }

    pub fn space(&self) -> HilbertStructure {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.repr, Repr::Pure(_))
    }

    pub fn as_pure(&self) -> Option<&CVector> {
        match &self.repr {
            Repr::Pure(v) => Some(v),
            Repr::Mixed(_) => None,
        }
    }

    pub fn as_mixed(&self) -> Option<&ComplexMatrix> {
        match &self.repr {
            Repr::Pure(_) => None,
            Repr::Mixed(m) => Some(m),
        }
    }

    /// `|ψ⟩⟨ψ|` for pure states, `ρ` otherwise.
    pub fn density_matrix(&self) -> ComplexMatrix {
        match &self.repr {
            Repr::Pure(v) => ComplexMatrix::outer(v, v).expect("same vector"),
            Repr::Mixed(m) => m.clone(),
        }
    }

    /// Re-interprets a pure state as a density matrix.
    pub fn to_mixed(&self) -> Self {
        Self {
            repr: Repr::Mixed(self.density_matrix()),
            space: self.space,
        }
    }

    /// `Tr ρ²`
    pub fn purity(&self) -> f64 {
        match &self.repr {
            Repr::Pure(_) => 1.0,
            Repr::Mixed(m) => crate::linalg::hs_inner(m, m).expect("same matrix"),
        }
    }

    /// `⟨Ō⟩ = Tr(ρ O)` for a Hermitian `O`.
    pub fn expectation(&self, op: &ComplexMatrix) -> SimResult<f64> {
        match &self.repr {
            Repr::Pure(v) => {
                let ov = op.apply(v)?;
                Ok(v.dotc(&ov).re)
            }
            Repr::Mixed(m) => crate::linalg::hs_inner(m, op),
        }
    }
}

/// Applies `V diag(e^{−i e_k τ}) V†` to the state.
pub fn evolve_unitary(state: &QuantumState, eig: &EigenSystem, tau: f64) -> SimResult<QuantumState> {
    if eig.dim() != state.dim() {
        return Err(SimError::DimensionMismatch {
            expected: state.dim(),
            found: eig.dim(),
        });
    }
    let repr = match &state.repr {
        Repr::Pure(v) => Repr::Pure(eig.evolve_vector(v, tau)?),
        Repr::Mixed(m) => Repr::Mixed(eig.evolve_density(m, tau)?),
    };
    Ok(QuantumState {
        repr,
        space: state.space,
    })
}

/// `|⟨ψ|φ⟩|²` or `⟨ψ|ρ|ψ⟩`, clamped to `[0, 1]` against rounding.
pub fn fidelity(target_pure: &QuantumState, other: &QuantumState) -> SimResult<f64> {
    let psi = target_pure.as_pure().ok_or(SimError::RequiresPure)?;
    if other.dim() != target_pure.dim() {
        return Err(SimError::DimensionMismatch {
            expected: target_pure.dim(),
            found: other.dim(),
        });
    }
    let raw = match &other.repr {
        Repr::Pure(phi) => psi.dotc(phi).norm_sqr(),
        Repr::Mixed(rho) => {
            let rho_psi = rho.apply(psi)?;
            psi.dotc(&rho_psi).re
        }
    };
    Ok(raw.clamp(0.0, 1.0))
}

/// Computational-basis vector `|index⟩`.
pub fn basis_vector(dim: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[index] = Complex64::new(1.0, 0.0);
    v
}
