//! Pauli and bosonic operators embedded into a [`HilbertStructure`].

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{SimError, SimResult};
use crate::linalg::{kron, ComplexMatrix, HermitianOperator};
use crate::state::HilbertStructure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl fmt::Display for PauliAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PauliAxis::X => "x",
            PauliAxis::Y => "y",
            PauliAxis::Z => "z",
        };
        f.write_str(s)
    }
}

impl FromStr for PauliAxis {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "x" | "X" => Ok(PauliAxis::X),
            "y" | "Y" => Ok(PauliAxis::Y),
            "z" | "Z" => Ok(PauliAxis::Z),
            other => Err(SimError::InvalidParameter(format!("unknown Pauli axis `{other}`"))),
        }
    }
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2")
}

pub fn sigma_y() -> ComplexMatrix {
    let i = Complex64::new(0.0, 1.0);
    let z = Complex64::new(0.0, 0.0);
    ComplexMatrix::from_rows(2, &[z, -i, i, z]).expect("2x2")
}

/// `σ_z|0⟩ = +|0⟩`
pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
}

pub fn pauli(axis: PauliAxis) -> ComplexMatrix {
    match axis {
        PauliAxis::X => sigma_x(),
        PauliAxis::Y => sigma_y(),
        PauliAxis::Z => sigma_z(),
    }
}

/// Pauli operator on one qubit site, identity on every other factor
/// (including the Fock factor when present).
pub fn pauli_on_site(
    which: PauliAxis,
    site: usize,
    structure: &HilbertStructure,
) -> SimResult<HermitianOperator> {
    let sites = structure.qubit_sites();
    if site >= sites {
        return Err(SimError::SiteOutOfRange { site, sites });
    }
    let left = 1usize << site;
    let right = 1usize << (sites - site - 1);
    let local = kron(
        &kron(&ComplexMatrix::identity(left), &pauli(which)),
        &ComplexMatrix::identity(right),
    );
    let full = embed_qubit_operator(&local, structure);
    HermitianOperator::new(full, format!("sigma_{which}^{site}"))
}

/// `a` on a bare `D`-level mode with hard truncation: `a|n⟩ = √n|n−1⟩`.
pub fn fock_annihilator(fock_dim: usize) -> SimResult<ComplexMatrix> {
    if fock_dim < 2 {
        return Err(SimError::InvalidParameter(format!(
            "Fock truncation must be at least 2, got {fock_dim}"
        )));
    }
    let mut entries = vec![0.0; fock_dim * fock_dim];
    for n in 1..fock_dim {
        entries[(n - 1) * fock_dim + n] = (n as f64).sqrt();
    }
    ComplexMatrix::from_real_rows(fock_dim, &entries)
}

/// `a ⊗ I_qubits` on the full space.
pub fn annihilator(structure: &HilbertStructure) -> SimResult<ComplexMatrix> {
    if !structure.has_fock_mode() {
        return Err(SimError::NoFockMode);
    }
    let a = fock_annihilator(structure.fock_dim())?;
    Ok(embed_fock_operator(&a, structure))
}

pub fn creator(structure: &HilbertStructure) -> SimResult<ComplexMatrix> {
    Ok(annihilator(structure)?.adjoint())
}

/// `a†a` on the full space.
pub fn number_operator(structure: &HilbertStructure) -> SimResult<HermitianOperator> {
    if !structure.has_fock_mode() {
        return Err(SimError::NoFockMode);
    }
    let levels: Vec<f64> = (0..structure.fock_dim()).map(|n| n as f64).collect();
    let local = ComplexMatrix::from_real_diagonal(&levels);
    HermitianOperator::new(embed_fock_operator(&local, structure), "n")
}

/// `op ⊗ I_qubits` for an operator on the Fock factor.
pub fn embed_fock_operator(op: &ComplexMatrix, structure: &HilbertStructure) -> ComplexMatrix {
    if structure.qubit_sites() == 0 {
        op.clone()
    } else {
        kron(op, &ComplexMatrix::identity(structure.qubit_dim()))
    }
}

/// `I_fock ⊗ op` for an operator on the qubit register.
pub fn embed_qubit_operator(op: &ComplexMatrix, structure: &HilbertStructure) -> ComplexMatrix {
    if structure.has_fock_mode() {
        kron(&ComplexMatrix::identity(structure.fock_dim()), op)
    } else {
        op.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::commutator;
    use crate::state::basis_vector;

    #[test]
    fn z_on_site_zero_of_two() {
        let s = HilbertStructure::qubits(2).unwrap();
        let z0 = pauli_on_site(PauliAxis::Z, 0, &s).unwrap();
        let expected = kron(&sigma_z(), &ComplexMatrix::identity(2));
        assert_eq!(z0.matrix(), &expected);
    }

    #[test]
    fn z_expectation_on_0011() {
        let s = HilbertStructure::qubits(4).unwrap();
        let z0 = pauli_on_site(PauliAxis::Z, 0, &s).unwrap();
        let v = basis_vector(16, 0b0011);
        let zv = z0.matrix().apply(&v).unwrap();
        assert_eq!(v.dotc(&zv).re, 1.0);
        let z3 = pauli_on_site(PauliAxis::Z, 3, &s).unwrap();
        let zv = z3.matrix().apply(&v).unwrap();
        assert_eq!(v.dotc(&zv).re, -1.0);
    }

    #[test]
    fn x_on_site_one_flips_least_significant() {
        let s = HilbertStructure::qubits(2).unwrap();
        let x1 = pauli_on_site(PauliAxis::X, 1, &s).unwrap();
        let out = x1.matrix().apply(&basis_vector(4, 0)).unwrap();
        assert_eq!(out, basis_vector(4, 1));
    }

    #[test]
    fn site_out_of_range() {
        let s = HilbertStructure::qubits(2).unwrap();
        assert!(matches!(
            pauli_on_site(PauliAxis::X, 2, &s),
            Err(SimError::SiteOutOfRange { site: 2, sites: 2 })
        ));
    }

    #[test]
    fn ladder_action() {
        let s = HilbertStructure::fock(3).unwrap();
        let a = annihilator(&s).unwrap();
        let out = a.apply(&basis_vector(3, 2)).unwrap();
        assert!((out[1].re - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(a.apply(&basis_vector(3, 0)).unwrap().norm(), 0.0);
        let n = &a.adjoint() * &a;
        for k in 0..3 {
            assert!((n.get(k, k).re - k as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn canonical_commutator_below_truncation() {
        let d = 8;
        let s = HilbertStructure::fock(d).unwrap();
        let a = annihilator(&s).unwrap();
        let comm = commutator(&a, &a.adjoint()).unwrap();
        for i in 0..d {
            for j in 0..d {
                let expected = if i == j && i <= d - 2 { 1.0 } else { 0.0 };
                if i <= d - 2 && j <= d - 2 {
                    assert!((comm.get(i, j).re - expected).abs() < 1e-12);
                }
            }
        }
        // the truncated top level carries −(D−1)
        assert!((comm.get(d - 1, d - 1).re + (d as f64 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn annihilator_requires_mode() {
        let s = HilbertStructure::qubits(2).unwrap();
        assert!(matches!(annihilator(&s), Err(SimError::NoFockMode)));
    }

    #[test]
    fn hybrid_ordering_puts_fock_first() {
        let s = HilbertStructure::new(1, 4).unwrap();
        let n = number_operator(&s).unwrap();
        // |2,0⟩ has flat index 2·2 + 0 = 4
        let v = basis_vector(8, s.index_of(2, 0));
        assert_eq!(s.index_of(2, 0), 4);
        let nv = n.matrix().apply(&v).unwrap();
        assert_eq!(v.dotc(&nv).re, 2.0);
    }
}
