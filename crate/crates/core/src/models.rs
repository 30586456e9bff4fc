//! Benchmark Hamiltonians and their term decompositions.
//!
//! Three models are provided, each split into exactly three terms:
//!
//! * mixed-field Ising chain (periodic): `H_zz`, `H_x`, `H_z`
//! * driven Kerr oscillator: detuning `Δa†a`, Kerr `K a†a†aa/2`, drive `ε(a + a†)`
//! * quantum Rabi model: field `ωa†a`, qubit `Ωσ_z/2`, coupling `g(a + a†)σ_x`
//!
//! Builders assemble term matrices entry by entry; the tests rebuild them
//! from operator products in [`crate::operators`].

use num_complex::Complex64;

use crate::error::{SimError, SimResult};
use crate::linalg::{
    eig_hermitian, schatten_inf_of, ComplexMatrix, EigenSystem, HermitianOperator,
};
use crate::operators::{embed_fock_operator, embed_qubit_operator, sigma_x, sigma_z};
use crate::state::HilbertStructure;

/// Norms at or below this are treated as zero.
pub const ZERO_NORM: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct Term {
    op: HermitianOperator,
    eig: EigenSystem,
    inf_norm: f64,
}

impl Term {
    pub fn new(op: HermitianOperator) -> SimResult<Self> {
        let eig = eig_hermitian(&op)?;
        let inf_norm = schatten_inf_of(&eig);
        Ok(Self { op, eig, inf_norm })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.op.matrix()
    }

    pub fn label(&self) -> &str {
        self.op.label()
    }

    pub fn eig(&self) -> &EigenSystem {
        &self.eig
    }

    pub fn inf_norm(&self) -> f64 {
        self.inf_norm
    }

    pub fn is_zero(&self) -> bool {
        self.inf_norm <= ZERO_NORM
    }
}

/// `H = Σ_j H_j` with cached eigensystems and Schatten-∞ norms per term.
#[derive(Debug, Clone)]
pub struct Decomposition {
    terms: Vec<Term>,
    lambda: f64,
}

impl Decomposition {
    pub fn new(ops: Vec<HermitianOperator>) -> SimResult<Self> {
        let terms = ops.into_iter().map(Term::new).collect::<SimResult<Vec<_>>>()?;
        Self::from_terms(terms)
    }

    fn from_terms(terms: Vec<Term>) -> SimResult<Self> {
        let first = terms
            .first()
            .ok_or_else(|| SimError::InvalidParameter("decomposition needs at least one term".into()))?;
        let dim = first.op.dim();
        if let Some(bad) = terms.iter().find(|t| t.op.dim() != dim) {
            return Err(SimError::DimensionMismatch {
                expected: dim,
                found: bad.op.dim(),
            });
        }
        let lambda = terms.iter().map(|t| t.inf_norm).sum();
        Ok(Self { terms, lambda })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.terms[0].op.dim()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.terms.iter().map(Term::label).collect()
    }

    pub fn inf_norms(&self) -> Vec<f64> {
        self.terms.iter().map(Term::inf_norm).collect()
    }

    /// `λ = Σ_j ‖H_j‖_∞`
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `Λ = max_j ‖H_j‖_∞`
    pub fn largest_norm(&self) -> f64 {
        self.terms.iter().map(Term::inf_norm).fold(0.0, f64::max)
    }

    /// `Σ_j H_j`
    pub fn total(&self) -> HermitianOperator {
        let mut acc = self.terms[0].matrix().clone();
        for t in &self.terms[1..] {
            acc = &acc + t.matrix();
        }
        HermitianOperator::new(acc, "H").expect("sum of Hermitian terms")
    }

    /// The same decomposition without terms whose norm vanishes.
    pub fn without_zero_terms(&self) -> SimResult<Self> {
        let kept: Vec<Term> = self.terms.iter().filter(|t| !t.is_zero()).cloned().collect();
        if kept.is_empty() {
            return Err(SimError::ZeroNormTerm("all terms".into()));
        }
        Self::from_terms(kept)
    }

    /// Reordered copy; `order[k]` is the index of the term placed at `k`.
    pub fn permuted(&self, order: &[usize]) -> SimResult<Self> {
        if order.len() != self.len() {
            return Err(SimError::InvalidParameter("permutation length".into()));
        }
        let mut seen = vec![false; self.len()];
        let mut terms = Vec::with_capacity(self.len());
        for &k in order {
            if k >= self.len() || seen[k] {
                return Err(SimError::InvalidParameter("not a permutation".into()));
            }
            seen[k] = true;
            terms.push(self.terms[k].clone());
        }
        Self::from_terms(terms)
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Mixed-field Ising chain with periodic boundary, split into
/// `H_zz = −J Σ σ_z^i σ_z^{i+1}`, `H_x = −J h_x Σ σ_x^i`, `H_z = −J h_z Σ σ_z^i`.
pub fn build_mfim(
    sites: usize,
    coupling: f64,
    h_x: f64,
    h_z: f64,
) -> SimResult<(Decomposition, HilbertStructure)> {
    if sites < 2 {
        return Err(SimError::InvalidParameter(format!(
            "Ising chain needs at least 2 sites, got {sites}"
        )));
    }
    check_finite(&[coupling, h_x, h_z])?;
    let space = HilbertStructure::qubits(sites)?;
    let dim = space.dim();
    // site i is bit (sites − 1 − i); bit value 0 means σ_z = +1
    let spin = |state: usize, site: usize| -> f64 {
        if (state >> (sites - 1 - site)) & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    };

    let zz: Vec<f64> = (0..dim)
        .map(|b| -coupling * (0..sites).map(|i| spin(b, i) * spin(b, (i + 1) % sites)).sum::<f64>())
        .collect();
    let z: Vec<f64> = (0..dim)
        .map(|b| -coupling * h_z * (0..sites).map(|i| spin(b, i)).sum::<f64>())
        .collect();

    let mut x = vec![Complex64::new(0.0, 0.0); dim * dim];
    for b in 0..dim {
        for i in 0..sites {
            let flipped = b ^ (1 << (sites - 1 - i));
            x[b * dim + flipped] += real(-coupling * h_x);
        }
    }

    let ops = vec![
        HermitianOperator::new(ComplexMatrix::from_real_diagonal(&zz), "H_zz")?,
        HermitianOperator::new(ComplexMatrix::from_rows(dim, &x)?, "H_x")?,
        HermitianOperator::new(ComplexMatrix::from_real_diagonal(&z), "H_z")?,
    ];
    Ok((Decomposition::new(ops)?, space))
}

/// Driven Kerr oscillator on a `D`-level truncated mode, split into
/// `Δa†a`, `K a†a†aa/2` and `ε(a + a†)`.
pub fn build_kerr(
    detuning: f64,
    kerr: f64,
    drive: f64,
    fock_dim: usize,
) -> SimResult<(Decomposition, HilbertStructure)> {
    check_truncation(fock_dim)?;
    check_finite(&[detuning, kerr, drive])?;
    let space = HilbertStructure::fock(fock_dim)?;

    let number: Vec<f64> = (0..fock_dim).map(|n| detuning * n as f64).collect();
    let nonlinear: Vec<f64> = (0..fock_dim)
        .map(|n| {
            let n = n as f64;
            kerr * n * (n - 1.0) / 2.0
        })
        .collect();

    let ops = vec![
        HermitianOperator::new(ComplexMatrix::from_real_diagonal(&number), "detuning")?,
        HermitianOperator::new(ComplexMatrix::from_real_diagonal(&nonlinear), "kerr")?,
        HermitianOperator::new(quadrature(fock_dim, drive)?, "drive")?,
    ];
    Ok((Decomposition::new(ops)?, space))
}

/// Quantum Rabi model on `D`-level mode ⊗ qubit, split into
/// `ωa†a`, `Ωσ_z/2` and `g(a + a†)σ_x`.
pub fn build_rabi(
    omega: f64,
    qubit_splitting: f64,
    coupling: f64,
    fock_dim: usize,
) -> SimResult<(Decomposition, HilbertStructure)> {
    check_truncation(fock_dim)?;
    check_finite(&[omega, qubit_splitting, coupling])?;
    let space = HilbertStructure::new(1, fock_dim)?;

    let number: Vec<f64> = (0..fock_dim).map(|n| omega * n as f64).collect();
    let field = embed_fock_operator(&ComplexMatrix::from_real_diagonal(&number), &space);
    let qubit = embed_qubit_operator(&sigma_z().scale_real(qubit_splitting / 2.0), &space);
    let interaction = crate::linalg::kron(&quadrature(fock_dim, coupling)?, &sigma_x());

    let ops = vec![
        HermitianOperator::new(field, "field")?,
        HermitianOperator::new(qubit, "qubit")?,
        HermitianOperator::new(interaction, "coupling")?,
    ];
    Ok((Decomposition::new(ops)?, space))
}

/// `scale · (a + a†)` on a bare truncated mode.
fn quadrature(fock_dim: usize, scale: f64) -> SimResult<ComplexMatrix> {
    let mut entries = vec![0.0; fock_dim * fock_dim];
    for n in 1..fock_dim {
        let amp = scale * (n as f64).sqrt();
        entries[(n - 1) * fock_dim + n] = amp;
        entries[n * fock_dim + n - 1] = amp;
    }
    ComplexMatrix::from_real_rows(fock_dim, &entries)
}

fn check_truncation(fock_dim: usize) -> SimResult<()> {
    if fock_dim < 2 {
        return Err(SimError::InvalidParameter(format!(
            "Fock truncation must be at least 2, got {fock_dim}"
        )));
    }
    Ok(())
}

fn check_finite(values: &[f64]) -> SimResult<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(SimError::InvalidParameter("couplings must be finite".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, hs_norm, kron};
    use crate::operators::{annihilator, pauli_on_site, PauliAxis};
    use approx::assert_relative_eq;

    fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        (a - b).max_abs()
    }

    fn mfim_reference(sites: usize, j: f64, hx: f64, hz: f64) -> ComplexMatrix {
        let s = HilbertStructure::qubits(sites).unwrap();
        let dim = s.dim();
        let mut h = ComplexMatrix::zeros(dim);
        for i in 0..sites {
            let zi = pauli_on_site(PauliAxis::Z, i, &s).unwrap();
            let zn = pauli_on_site(PauliAxis::Z, (i + 1) % sites, &s).unwrap();
            let xi = pauli_on_site(PauliAxis::X, i, &s).unwrap();
            let bond = zi.matrix() * zn.matrix();
            let local = &(&bond + &xi.matrix().scale_real(hx)) + &zi.matrix().scale_real(hz);
            h = &h + &local;
        }
        h.scale_real(-j)
    }

    #[test]
    fn mfim_matches_operator_products() {
        let (dec, s) = build_mfim(4, 1.0, 0.5, 0.3).unwrap();
        assert_eq!(dec.len(), 3);
        assert_eq!(s.dim(), 16);
        let reference = mfim_reference(4, 1.0, 0.5, 0.3);
        assert!(max_diff(dec.total().matrix(), &reference) < 1e-10);

        let (dec5, _) = build_mfim(5, 0.7, -1.1, 0.4).unwrap();
        assert!(max_diff(dec5.total().matrix(), &mfim_reference(5, 0.7, -1.1, 0.4)) < 1e-10);
    }

    #[test]
    fn mfim_term_norms() {
        let (dec, _) = build_mfim(4, 1.0, 0.5, 0.3).unwrap();
        let norms = dec.inf_norms();
        assert_relative_eq!(norms[0], 4.0, epsilon = 1e-10);
        assert_relative_eq!(norms[1], 2.0, epsilon = 1e-10);
        assert_relative_eq!(norms[2], 1.2, epsilon = 1e-10);
        assert_relative_eq!(dec.lambda(), 7.2, epsilon = 1e-10);
        assert_relative_eq!(dec.largest_norm(), 4.0, epsilon = 1e-10);
    }

    #[test]
    fn mfim_without_fields_is_pure_ising() {
        let (dec, _) = build_mfim(4, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(dec.terms()[1].matrix().max_abs(), 0.0);
        assert_eq!(dec.terms()[2].matrix().max_abs(), 0.0);
        assert!(max_diff(dec.total().matrix(), dec.terms()[0].matrix()) < 1e-15);
        assert!(dec.terms()[1].is_zero());
    }

    #[test]
    fn tfim_commutes_with_global_flip() {
        let (dec, s) = build_mfim(4, 1.0, 0.5, 0.0).unwrap();
        let mut flip = ComplexMatrix::identity(s.dim());
        for i in 0..4 {
            flip = &flip * pauli_on_site(PauliAxis::X, i, &s).unwrap().matrix();
        }
        let comm = commutator(dec.total().matrix(), &flip).unwrap();
        assert!(hs_norm(&comm) <= 1e-10);

        let (mixed, _) = build_mfim(4, 1.0, 0.5, 0.3).unwrap();
        let comm = commutator(mixed.total().matrix(), &flip).unwrap();
        assert!(hs_norm(&comm) > 1e-3);
    }

    #[test]
    fn mfim_rejects_short_chain() {
        assert!(build_mfim(1, 1.0, 0.5, 0.3).is_err());
    }

    #[test]
    fn kerr_matches_ladder_products() {
        let d = 12;
        let (dec, s) = build_kerr(0.3, 1.0, 0.5, d).unwrap();
        assert_eq!(dec.len(), 3);
        assert_eq!(s.dim(), d);
        let a = annihilator(&s).unwrap();
        let ad = a.adjoint();
        let n = &ad * &a;
        let nonlinear = &(&(&ad * &ad) * &a) * &a;
        let reference =
            &(&n.scale_real(0.3) + &nonlinear.scale_real(0.5)) + &(&a + &ad).scale_real(0.5);
        assert!(max_diff(dec.total().matrix(), &reference) < 1e-10);
        for k in 0..d {
            let kf = k as f64;
            assert_relative_eq!(dec.terms()[1].matrix().get(k, k).re, kf * (kf - 1.0) / 2.0);
        }
    }

    #[test]
    fn kerr_reference_config_shape() {
        let (dec, s) = build_kerr(0.3, 1.0, 0.5, 50).unwrap();
        assert_eq!(s.dim(), 50);
        assert_eq!(dec.dim(), 50);
        assert_relative_eq!(dec.inf_norms()[0], 0.3 * 49.0, epsilon = 1e-10);
        assert_relative_eq!(dec.inf_norms()[1], 49.0 * 48.0 / 2.0, epsilon = 1e-9);
    }

    #[test]
    fn kerr_without_drive() {
        let (dec, _) = build_kerr(0.3, 1.0, 0.0, 10).unwrap();
        assert_eq!(dec.terms()[2].matrix().max_abs(), 0.0);
        assert!(build_kerr(0.3, 1.0, 0.5, 1).is_err());
    }

    #[test]
    fn rabi_matches_direct_assembly() {
        let d = 6;
        let (dec, s) = build_rabi(1.0, 1.3, 0.2, d).unwrap();
        assert_eq!(s.dim(), 2 * d);
        let a = annihilator(&s).unwrap();
        let x = pauli_on_site(PauliAxis::X, 0, &s).unwrap();
        let z = pauli_on_site(PauliAxis::Z, 0, &s).unwrap();
        let n = &a.adjoint() * &a;
        let coupling = &(&a + &a.adjoint()) * x.matrix();
        let reference =
            &(&n + &z.matrix().scale_real(0.65)) + &coupling.scale_real(0.2);
        assert!(max_diff(dec.total().matrix(), &reference) < 1e-10);
        let direct = kron(
            &ComplexMatrix::identity(d),
            &crate::operators::sigma_z().scale_real(0.65),
        );
        assert!(max_diff(dec.terms()[1].matrix(), &direct) < 1e-15);
    }

    #[test]
    fn rabi_reference_config_and_number_expectation() {
        let (dec, s) = build_rabi(1.0, 1.0, 0.2, 50).unwrap();
        assert_eq!(s.dim(), 100);
        let idx = s.index_of(2, 0);
        assert_relative_eq!(dec.terms()[0].matrix().get(idx, idx).re, 2.0);
    }

    #[test]
    fn rabi_uncoupled_terms_commute() {
        let (dec, _) = build_rabi(1.0, 1.0, 0.0, 8).unwrap();
        assert_eq!(dec.terms()[2].matrix().max_abs(), 0.0);
        let comm = commutator(dec.terms()[0].matrix(), dec.terms()[1].matrix()).unwrap();
        assert_eq!(comm.max_abs(), 0.0);
    }

    #[test]
    fn permutation_and_zero_filtering() {
        let (dec, _) = build_mfim(3, 1.0, 0.0, 0.4).unwrap();
        let filtered = dec.without_zero_terms().unwrap();
        assert_eq!(filtered.labels(), vec!["H_zz", "H_z"]);
        let perm = dec.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(perm.labels(), vec!["H_z", "H_zz", "H_x"]);
        assert!(dec.permuted(&[0, 0, 1]).is_err());
    }
}
