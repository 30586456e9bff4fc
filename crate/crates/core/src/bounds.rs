//! Liouvillian calculus and state-dependent error bounds.
//!
//! With `L_j(ρ) = −i[H_j, ρ]` and `L = Σ_j L_j`, the accumulated error after
//! `N` steps is bounded by `(t²/2N) · mean_i(·)` over the exact states
//! `ρ_0 … ρ_{N−1}`, where `(·)` is
//!
//! * first-order Trotter: `‖Σ_{j<k} [L_j, L_k](ρ_i)‖`
//! * RC: `‖L²(ρ_i)‖ + λ Σ_j ‖L_j²(ρ_i)‖ / ‖H_j‖_∞`
//! * ARC: `‖L²(ρ_i)‖ + (Σ_j √‖L_j²(ρ_i)‖)²`
//!
//! Superoperators are never materialized; every action is a nested
//! commutator on `ρ`.

use num_complex::Complex64;
use serde::Serialize;

use crate::compilers::{run_exact, StepPlan};
use crate::error::{SimError, SimResult};
use crate::linalg::{commutator, hs_norm, ComplexMatrix, HermitianOperator};
use crate::models::Decomposition;
use crate::state::QuantumState;

const CS_SLACK: f64 = 1e-9;

/// Label attached to every Ω/O value in reports.
pub const SCALING_NOTE: &str = "order-of-growth, constants unspecified";

/// `−i[H, ρ]`
pub fn liouvillian(h: &HermitianOperator, rho: &QuantumState) -> SimResult<ComplexMatrix> {
    if h.dim() != rho.dim() {
        return Err(SimError::DimensionMismatch {
            expected: rho.dim(),
            found: h.dim(),
        });
    }
    liouvillian_on(h.matrix(), &rho.density_matrix())
}

/// `−i[H, X]` for an arbitrary matrix `X`.
pub fn liouvillian_on(h: &ComplexMatrix, x: &ComplexMatrix) -> SimResult<ComplexMatrix> {
    Ok(commutator(h, x)?.scale(Complex64::new(0.0, -1.0)))
}

/// All double commutators `[H_j, [H_k, ρ]]` of one state.
struct DoubleCommutators {
    table: Vec<Vec<ComplexMatrix>>,
}

impl DoubleCommutators {
    fn new(decomposition: &Decomposition, rho: &ComplexMatrix) -> SimResult<Self> {
        let inner: Vec<ComplexMatrix> = decomposition
            .terms()
            .iter()
            .map(|t| commutator(t.matrix(), rho))
            .collect::<SimResult<_>>()?;
        let table = decomposition
            .terms()
            .iter()
            .map(|tj| inner.iter().map(|ck| commutator(tj.matrix(), ck)).collect())
            .collect::<SimResult<_>>()?;
        Ok(Self { table })
    }

    /// `‖L_j²(ρ)‖ = ‖[H_j,[H_j,ρ]]‖`
    fn single(&self, j: usize) -> f64 {
        hs_norm(&self.table[j][j])
    }

    /// `‖L²(ρ)‖ = ‖Σ_{jk} [H_j,[H_k,ρ]]‖`
    fn total(&self) -> f64 {
        let mut acc = self.table[0][0].clone();
        for (j, row) in self.table.iter().enumerate() {
            for (k, m) in row.iter().enumerate() {
                if j != 0 || k != 0 {
                    acc = &acc + m;
                }
            }
        }
        hs_norm(&acc)
    }

    /// `‖Σ_{j<k} [L_j, L_k](ρ)‖`, with
    /// `[L_j, L_k](ρ) = −([H_j,[H_k,ρ]] − [H_k,[H_j,ρ]])`.
    fn trotter(&self) -> f64 {
        let n = self.table.len();
        if n < 2 {
            return 0.0;
        }
        let dim = self.table[0][0].dim();
        let mut acc = ComplexMatrix::zeros(dim);
        for j in 0..n {
            for k in j + 1..n {
                acc = &acc - &(&self.table[j][k] - &self.table[k][j]);
            }
        }
        hs_norm(&acc)
    }
}

fn check_states(decomposition: &Decomposition, states: &[QuantumState]) -> SimResult<()> {
    let first = states.first().ok_or(SimError::EmptyStates)?;
    if first.dim() != decomposition.dim() {
        return Err(SimError::DimensionMismatch {
            expected: decomposition.dim(),
            found: first.dim(),
        });
    }
    Ok(())
}

fn check_nonzero_norms(decomposition: &Decomposition) -> SimResult<()> {
    match decomposition.terms().iter().find(|t| t.is_zero()) {
        Some(t) => Err(SimError::ZeroNormTerm(t.label().to_string())),
        None => Ok(()),
    }
}

/// `t² / 2N²`: one state's contribution factor, so that a bound is the sum
/// of its per-step contributions.
fn step_prefactor(plan: &StepPlan) -> f64 {
    let n = plan.steps() as f64;
    plan.total_time().powi(2) / (2.0 * n * n)
}

fn per_step<F>(
    decomposition: &Decomposition,
    states: &[QuantumState],
    plan: &StepPlan,
    mut bracket: F,
) -> SimResult<Vec<f64>>
where
    F: FnMut(&DoubleCommutators) -> f64,
{
    check_states(decomposition, states)?;
    let pre = step_prefactor(plan);
    states
        .iter()
        .map(|s| {
            let dc = DoubleCommutators::new(decomposition, &s.density_matrix())?;
            Ok(pre * bracket(&dc))
        })
        .collect()
}

fn mean_bound(contributions: &[f64], plan: &StepPlan) -> f64 {
    // (t²/2N)·mean_i(x_i) = (t²/2N²)·Σ_i x_i · (N / count)
    let scale = plan.steps() as f64 / contributions.len() as f64;
    contributions.iter().sum::<f64>() * scale
}

fn rc_bracket(decomposition: &Decomposition, dc: &DoubleCommutators) -> f64 {
    let lambda = decomposition.lambda();
    let weighted: f64 = decomposition
        .terms()
        .iter()
        .enumerate()
        .map(|(j, t)| dc.single(j) / t.inf_norm())
        .sum();
    dc.total() + lambda * weighted
}

fn arc_bracket(decomposition: &Decomposition, dc: &DoubleCommutators) -> f64 {
    let root_sum: f64 = (0..decomposition.len()).map(|j| dc.single(j).sqrt()).sum();
    dc.total() + root_sum * root_sum
}

/// `(t²/2N) · mean_i ‖Σ_{j<k} [L_j, L_k](ρ_i)‖`
pub fn trotter1_bound(
    decomposition: &Decomposition,
    exact_states: &[QuantumState],
    plan: &StepPlan,
) -> SimResult<f64> {
    let c = per_step(decomposition, exact_states, plan, DoubleCommutators::trotter)?;
    Ok(mean_bound(&c, plan))
}

/// `(t²/2N) · mean_i [‖L²(ρ_i)‖ + λ Σ_j ‖L_j²(ρ_i)‖ / ‖H_j‖_∞]`; rejects
/// zero-norm terms (filter them with [`Decomposition::without_zero_terms`]).
pub fn rc_bound(
    decomposition: &Decomposition,
    exact_states: &[QuantumState],
    plan: &StepPlan,
) -> SimResult<f64> {
    check_nonzero_norms(decomposition)?;
    let c = per_step(decomposition, exact_states, plan, |dc| rc_bracket(decomposition, dc))?;
    Ok(mean_bound(&c, plan))
}

/// `(t²/2N) · mean_i [‖L²(ρ_i)‖ + (Σ_j √‖L_j²(ρ_i)‖)²]`
pub fn arc_bound(
    decomposition: &Decomposition,
    exact_states: &[QuantumState],
    plan: &StepPlan,
) -> SimResult<f64> {
    let c = per_step(decomposition, exact_states, plan, |dc| arc_bracket(decomposition, dc))?;
    Ok(mean_bound(&c, plan))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchySchwarzCheck {
    /// `(Σ_j √‖L_j²(ρ)‖)²`
    pub lhs: f64,
    /// `λ Σ_j ‖L_j²(ρ)‖ / ‖H_j‖_∞`
    pub rhs: f64,
    pub holds: bool,
}

/// Compares the ARC and RC second-order terms on one state.
pub fn check_cauchy_schwarz(
    decomposition: &Decomposition,
    rho: &QuantumState,
) -> SimResult<CauchySchwarzCheck> {
    check_nonzero_norms(decomposition)?;
    check_states(decomposition, std::slice::from_ref(rho))?;
    let dc = DoubleCommutators::new(decomposition, &rho.density_matrix())?;
    let root_sum: f64 = (0..decomposition.len()).map(|j| dc.single(j).sqrt()).sum();
    let lhs = root_sum * root_sum;
    let rhs = decomposition.lambda()
        * decomposition
            .terms()
            .iter()
            .enumerate()
            .map(|(j, t)| dc.single(j) / t.inf_norm())
            .sum::<f64>();
    Ok(CauchySchwarzCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + CS_SLACK),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerStep<T> {
    pub trotter1: T,
    pub rc: T,
    pub arc: T,
}

/// Circuit-depth scalings that do not depend on the state; ARC has none.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateIndependentDepth {
    /// `L³ (Λt)² / ε`
    pub trotter1: f64,
    /// `(λt)² / ε`
    pub rc: f64,
    pub arc: Option<f64>,
    pub target_error: f64,
}

/// State-dependent bounds of all three protocols along one exact trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub trotter1: f64,
    pub rc: f64,
    pub arc: f64,
    /// Contribution of each exact state `ρ_i`; each list sums to its bound.
    pub per_step: PerStep<Vec<f64>>,
    pub total_time: f64,
    pub steps: usize,
    pub state_independent: StateIndependentDepth,
    pub note: &'static str,
}

/// `ρ_0, ρ_1, …, ρ_{N−1}` along the exact evolution.
pub fn exact_bound_states(
    state0: &QuantumState,
    decomposition: &Decomposition,
    plan: &StepPlan,
) -> SimResult<Vec<QuantumState>> {
    let mut states = Vec::with_capacity(plan.steps());
    states.push(state0.clone());
    let after = run_exact(state0, &decomposition.total(), plan)?;
    states.extend(after.into_iter().take(plan.steps() - 1));
    Ok(states)
}

/// Computes every bound along the exact trajectory from `state0`. Zero-norm
/// terms are dropped before evaluation.
pub fn bound_report(
    decomposition: &Decomposition,
    state0: &QuantumState,
    plan: &StepPlan,
    target_error: f64,
) -> SimResult<BoundReport> {
    if !(target_error > 0.0 && target_error.is_finite()) {
        return Err(SimError::InvalidParameter(format!(
            "target error must be positive, got {target_error}"
        )));
    }
    let dec = decomposition.without_zero_terms()?;
    let states = exact_bound_states(state0, &dec, plan)?;
    check_states(&dec, &states)?;
    let pre = step_prefactor(plan);
    let mut per = PerStep {
        trotter1: Vec::with_capacity(states.len()),
        rc: Vec::with_capacity(states.len()),
        arc: Vec::with_capacity(states.len()),
    };
    for s in &states {
        let dc = DoubleCommutators::new(&dec, &s.density_matrix())?;
        per.trotter1.push(pre * dc.trotter());
        per.rc.push(pre * rc_bracket(&dec, &dc));
        per.arc.push(pre * arc_bracket(&dec, &dc));
    }
    let t = plan.total_time();
    let terms = dec.len() as f64;
    Ok(BoundReport {
        trotter1: mean_bound(&per.trotter1, plan),
        rc: mean_bound(&per.rc, plan),
        arc: mean_bound(&per.arc, plan),
        per_step: per,
        total_time: t,
        steps: plan.steps(),
        state_independent: StateIndependentDepth {
            trotter1: terms.powi(3) * (dec.largest_norm() * t).powi(2) / target_error,
            rc: (dec.lambda() * t).powi(2) / target_error,
            arc: None,
            target_error,
        },
        note: SCALING_NOTE,
    })
}

/// Locality and counting parameters for the measurement-shot scalings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct ShotParams {
    /// Max qubits touched by observables of the real-time dynamics.
    pub k: u32,
    /// Max qubits touched by the adaptive-measurement observables.
    pub w: u32,
    /// Pauli-string count exponent of the dynamics observables, `O(N^S)`.
    pub s: u32,
    /// Pauli-string count exponent of the Hamiltonian, `O(N^R)`.
    pub r: u32,
    pub n_qubits: u32,
    /// Statistical error target `ε`.
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotBounds {
    /// `3^w (4R) ln N / ε²`
    pub arc_prep: f64,
    /// `3^{max(w,k)} max(S, 4R) ln N / ε²`
    pub dynamics: f64,
}

pub fn shot_lower_bounds(p: &ShotParams) -> SimResult<ShotBounds> {
    if p.k < 1 || p.w < 1 {
        return Err(SimError::InvalidParameter("locality k and w must be at least 1".into()));
    }
    if !(p.eps > 0.0 && p.eps.is_finite()) {
        return Err(SimError::InvalidParameter(format!("eps must be positive, got {}", p.eps)));
    }
    if p.n_qubits < 1 {
        return Err(SimError::InvalidParameter("qubit count must be at least 1".into()));
    }
    let log_n = f64::from(p.n_qubits).ln();
    let eps2 = p.eps * p.eps;
    let four_r = 4.0 * f64::from(p.r);
    Ok(ShotBounds {
        arc_prep: 3f64.powi(p.w as i32) * four_r * log_n / eps2,
        dynamics: 3f64.powi(p.w.max(p.k) as i32) * f64::from(p.s).max(four_r) * log_n / eps2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ket::basis_state;
    use crate::linalg::hs_inner;
    use crate::models::build_mfim;
    use crate::operators::{sigma_x, sigma_y, sigma_z};
    use crate::state::HilbertStructure;
    use approx::assert_relative_eq;

    fn qubit() -> HilbertStructure {
        HilbertStructure::qubits(1).unwrap()
    }

    #[test]
    fn liouvillian_on_plus() {
        let z = HermitianOperator::new(sigma_z(), "z").unwrap();
        let plus = basis_state("(|0⟩+|1⟩)/√2", &qubit()).unwrap();
        let l = liouvillian(&z, &plus).unwrap();
        assert!(l.hermitian_deviation() < 1e-15);
        assert!(l.trace().norm() < 1e-15);
        assert_relative_eq!(hs_norm(&l), 2f64.sqrt(), epsilon = 1e-14);
        let zero = basis_state("|0⟩", &qubit()).unwrap();
        assert_eq!(liouvillian(&z, &zero).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn liouvillian_composes_to_double_commutator() {
        let (dec, s) = build_mfim(3, 1.0, 0.5, 0.3).unwrap();
        let psi = basis_state("(|001⟩+|110⟩+|011⟩)/√3", &s).unwrap();
        let h = dec.total();
        let rho = psi.density_matrix();
        let twice = liouvillian_on(h.matrix(), &liouvillian_on(h.matrix(), &rho).unwrap()).unwrap();
        let direct = commutator(h.matrix(), &commutator(h.matrix(), &rho).unwrap())
            .unwrap()
            .scale_real(-1.0);
        assert!((&twice - &direct).max_abs() < 1e-10);
    }

    #[test]
    fn single_and_commuting_terms_have_no_trotter_error() {
        let s = qubit();
        let psi = basis_state("(|0⟩+|1⟩)/√2", &s).unwrap();
        let plan = StepPlan::new(1.0, 4).unwrap();
        let single = Decomposition::new(vec![HermitianOperator::new(sigma_x(), "x").unwrap()]).unwrap();
        assert_eq!(trotter1_bound(&single, std::slice::from_ref(&psi), &plan).unwrap(), 0.0);
        let commuting = Decomposition::new(vec![
            HermitianOperator::new(sigma_z(), "a").unwrap(),
            HermitianOperator::new(sigma_z().scale_real(2.0), "b").unwrap(),
        ])
        .unwrap();
        assert_eq!(trotter1_bound(&commuting, &[psi], &plan).unwrap(), 0.0);
    }

    #[test]
    fn bounds_reject_empty_states_and_zero_norm() {
        let plan = StepPlan::new(1.0, 4).unwrap();
        let dec = Decomposition::new(vec![
            HermitianOperator::new(sigma_x(), "x").unwrap(),
            HermitianOperator::new(ComplexMatrix::zeros(2), "0").unwrap(),
        ])
        .unwrap();
        assert!(matches!(trotter1_bound(&dec, &[], &plan), Err(SimError::EmptyStates)));
        let psi = basis_state("|0⟩", &qubit()).unwrap();
        assert!(matches!(rc_bound(&dec, std::slice::from_ref(&psi), &plan), Err(SimError::ZeroNormTerm(_))));
        assert!(check_cauchy_schwarz(&dec, &psi).is_err());
    }

    #[test]
    fn cauchy_schwarz_single_term_equality() {
        let dec = Decomposition::new(vec![HermitianOperator::new(sigma_y().scale_real(0.7), "y").unwrap()]).unwrap();
        let psi = basis_state("(|0⟩+|1⟩)/√2", &qubit()).unwrap();
        let c = check_cauchy_schwarz(&dec, &psi).unwrap();
        assert!(c.holds);
        assert_relative_eq!(c.lhs, c.rhs, max_relative = 1e-12);
    }

    #[test]
    fn cauchy_schwarz_equality_condition() {
        // ‖L_j²‖/‖H_j‖² equal across j: rescaled copies of one operator
        let dec = Decomposition::new(vec![
            HermitianOperator::new(sigma_x(), "a").unwrap(),
            HermitianOperator::new(sigma_x().scale_real(3.0), "b").unwrap(),
        ])
        .unwrap();
        let psi = basis_state("|0⟩", &qubit()).unwrap();
        let c = check_cauchy_schwarz(&dec, &psi).unwrap();
        assert_relative_eq!(c.lhs, c.rhs, max_relative = 1e-12);
        let strict = Decomposition::new(vec![
            HermitianOperator::new(sigma_x(), "a").unwrap(),
            HermitianOperator::new(sigma_z(), "b").unwrap(),
        ])
        .unwrap();
        let c = check_cauchy_schwarz(&strict, &psi).unwrap();
        assert!(c.lhs < c.rhs * (1.0 - 1e-6));
    }

    #[test]
    fn mfim_report_orders_arc_below_rc() {
        let (dec, s) = build_mfim(4, 1.0, 0.5, 0.3).unwrap();
        let psi = basis_state("0011", &s).unwrap();
        let plan = StepPlan::new(1.0, 50).unwrap();
        let report = bound_report(&dec, &psi, &plan, 1e-2).unwrap();
        assert!(report.arc <= report.rc * (1.0 + 1e-9));
        assert!(report.trotter1 > 0.0 && report.trotter1.is_finite());
        assert_eq!(report.per_step.rc.len(), 50);
        assert_relative_eq!(report.rc, report.per_step.rc.iter().sum::<f64>(), max_relative = 1e-12);

        let states = exact_bound_states(&psi, &dec, &plan).unwrap();
        assert_eq!(states[0], psi);
        assert_relative_eq!(trotter1_bound(&dec, &states, &plan).unwrap(), report.trotter1, max_relative = 1e-12);
        assert_relative_eq!(rc_bound(&dec, &states, &plan).unwrap(), report.rc, max_relative = 1e-12);
        assert_relative_eq!(arc_bound(&dec, &states, &plan).unwrap(), report.arc, max_relative = 1e-12);
        assert_relative_eq!(report.state_independent.rc, 7.2f64.powi(2) / 1e-2, max_relative = 1e-12);
        assert_relative_eq!(report.state_independent.trotter1, 27.0 * 16.0 / 1e-2, max_relative = 1e-12);
    }

    #[test]
    fn shot_bound_examples() {
        let base = ShotParams { k: 1, w: 1, s: 4, r: 1, n_qubits: 2, eps: 1.0 };
        let b = shot_lower_bounds(&base).unwrap();
        assert_relative_eq!(b.arc_prep, 12.0 * 2f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(b.arc_prep, 8.317766166719343, epsilon = 1e-12);
        // k = w and S = 4R collapse both maxima
        assert_relative_eq!(b.dynamics, b.arc_prep, epsilon = 1e-12);
        let half = shot_lower_bounds(&ShotParams { eps: 0.5, ..base }).unwrap();
        assert_relative_eq!(half.arc_prep, 4.0 * b.arc_prep, epsilon = 1e-12);
        assert_relative_eq!(half.dynamics, 4.0 * b.dynamics, epsilon = 1e-12);
        assert!(shot_lower_bounds(&ShotParams { w: 0, ..base }).is_err());
        assert!(shot_lower_bounds(&ShotParams { eps: 0.0, ..base }).is_err());
    }

    #[test]
    fn hs_inner_is_preserved_by_bound_states() {
        let (dec, s) = build_mfim(3, 1.0, 0.5, 0.3).unwrap();
        let psi = basis_state("011", &s).unwrap();
        let plan = StepPlan::new(0.5, 5).unwrap();
        for st in exact_bound_states(&psi, &dec, &plan).unwrap() {
            let r = st.density_matrix();
            assert_relative_eq!(hs_inner(&r, &r).unwrap(), 1.0, epsilon = 1e-12);
        }
    }
}
