//! Single-step evolution protocols and trajectory runners.
//!
//! * `trotter1`: deterministic first-order product formula.
//! * `rc`: random compiler with fixed weights `p_j = ‖H_j‖_∞ / λ`.
//! * `equal`: random compiler with `p_j = 1/L`.
//! * `arc`: adaptive random compiler; weights re-derived every step from the
//!   double-commutator norms measured on the current trajectory state.
//! * `exact`: reference evolution under the full Hamiltonian.
//!
//! Random steps apply `e^{−iH_j τ_j}` with `τ_j = t / (N p_j)`, which makes the
//! averaged channel agree with the exact step to first order in `t/N`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};
use crate::linalg::{eig_hermitian, HermitianOperator};
use crate::models::{Decomposition, ZERO_NORM};
use crate::moments::{djj_finite_difference_eig, djj_pure, NoiseModel, DEFAULT_FD_DT};
use crate::state::{evolve_unitary, fidelity, QuantumState};

/// Double-commutator norms at or below this count as zero weight.
pub const ZERO_DJJ: f64 = 1e-14;

const SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Trotter1,
    Rc,
    Arc,
    Equal,
    Exact,
}

impl Protocol {
    pub const ALL: [Protocol; 5] = [
        Protocol::Trotter1,
        Protocol::Rc,
        Protocol::Arc,
        Protocol::Equal,
        Protocol::Exact,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Trotter1 => "trotter1",
            Protocol::Rc => "rc",
            Protocol::Arc => "arc",
            Protocol::Equal => "equal",
            Protocol::Exact => "exact",
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, Protocol::Rc | Protocol::Arc | Protocol::Equal)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| SimError::InvalidParameter(format!("unknown protocol `{s}`")))
    }
}

/// Non-negative weights over term indices, normalized to sum to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityDistribution {
    p: Vec<f64>,
}

impl ProbabilityDistribution {
    /// Renormalizes `weights`; all must be finite and non-negative with a
    /// positive sum.
    pub fn new(weights: Vec<f64>) -> SimResult<Self> {
        if weights.is_empty() {
            return Err(SimError::InvalidDistribution("no entries".into()));
        }
        if let Some(bad) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(SimError::InvalidDistribution(format!("invalid weight {bad}")));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(SimError::InvalidDistribution("weights sum to zero".into()));
        }
        let p: Vec<f64> = weights.into_iter().map(|w| w / total).collect();
        debug_assert!((p.iter().sum::<f64>() - 1.0).abs() <= SUM_TOL);
        Ok(Self { p })
    }

    pub fn uniform(len: usize) -> SimResult<Self> {
        Self::new(vec![1.0; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.p[index]
    }

    /// First index of the largest probability.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, &v) in self.p.iter().enumerate() {
            if v > self.p[best] {
                best = k;
            }
        }
        best
    }

    /// Raises every entry to at least `floor` and renormalizes.
    pub fn with_floor(&self, floor: f64) -> SimResult<Self> {
        if !(0.0..1.0).contains(&floor) || floor * self.p.len() as f64 >= 1.0 {
            return Err(SimError::InvalidDistribution(format!("floor {floor} too large")));
        }
        Self::new(self.p.iter().map(|&v| v.max(floor)).collect())
    }

    /// Inverse-CDF sampling for `u ∈ [0, 1)` in term order. Never returns an
    /// index of zero probability.
    pub fn sample_with(&self, u: f64) -> usize {
        let mut cumulative = 0.0;
        for (k, &v) in self.p.iter().enumerate() {
            cumulative += v;
            if v > 0.0 && u < cumulative {
                return k;
            }
        }
        // rounding left u beyond the accumulated total
        self.p.iter().rposition(|&v| v > 0.0).expect("positive total")
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sample_with(rng.random::<f64>())
    }
}

/// Total time `t` split into `N` equal steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepPlan {
    total_time: f64,
    steps: usize,
}

impl StepPlan {
    pub fn new(total_time: f64, steps: usize) -> SimResult<Self> {
        if steps == 0 {
            return Err(SimError::InvalidParameter("step count must be at least 1".into()));
        }
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(SimError::InvalidParameter(format!(
                "total time must be positive, got {total_time}"
            )));
        }
        Ok(Self { total_time, steps })
    }

    /// `N` steps of size `dt`.
    pub fn from_step_size(dt: f64, steps: usize) -> SimResult<Self> {
        Self::new(dt * steps as f64, steps)
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `t / N`
    pub fn step_size(&self) -> f64 {
        self.total_time / self.steps as f64
    }

    /// `τ_j = t / (N p_j)`
    pub fn time_slice(&self, p_j: f64) -> f64 {
        self.total_time / (self.steps as f64 * p_j)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepLog {
    pub index: usize,
    pub tau: f64,
    pub probabilities: Vec<f64>,
    /// Fidelity against the exact state after this step, when a reference
    /// trajectory was supplied.
    pub fidelity: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub steps: Vec<StepLog>,
    pub final_state: QuantumState,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Knobs for the adaptive protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcOptions {
    /// Time step of the finite-difference estimator used for mixed states.
    pub fd_dt: f64,
    /// Optional lower bound on every `p_j`; off by default.
    pub p_floor: Option<f64>,
}

impl Default for ArcOptions {
    fn default() -> Self {
        Self {
            fd_dt: DEFAULT_FD_DT,
            p_floor: None,
        }
    }
}

/// `p_j = √d_j / Σ_k √d_k`; uniform when every `d_j` vanishes.
pub fn optimal_distribution(djj_values: &[f64]) -> SimResult<ProbabilityDistribution> {
    if let Some(bad) = djj_values.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
        return Err(SimError::InvalidDistribution(format!(
            "double-commutator norm must be non-negative, got {bad}"
        )));
    }
    if djj_values.iter().all(|&d| d <= ZERO_DJJ) {
        return ProbabilityDistribution::uniform(djj_values.len());
    }
    let weights = djj_values
        .iter()
        .map(|&d| if d <= ZERO_DJJ { 0.0 } else { d.sqrt() })
        .collect();
    ProbabilityDistribution::new(weights)
}

/// `Σ_j d_j / p_j`; infinite when some `d_j > 0` has `p_j = 0`.
pub fn cost(djj_values: &[f64], p: &ProbabilityDistribution) -> SimResult<f64> {
    if djj_values.len() != p.len() {
        return Err(SimError::DimensionMismatch {
            expected: p.len(),
            found: djj_values.len(),
        });
    }
    let mut total = 0.0;
    for (&d, &pj) in djj_values.iter().zip(p.as_slice()) {
        if d < 0.0 {
            return Err(SimError::InvalidDistribution(format!("negative weight {d}")));
        }
        if d == 0.0 {
            continue;
        }
        if pj == 0.0 {
            return Ok(f64::INFINITY);
        }
        total += d / pj;
    }
    Ok(total)
}

/// `p_j = ‖H_j‖_∞ / λ`
pub fn rc_distribution(decomposition: &Decomposition) -> SimResult<ProbabilityDistribution> {
    if decomposition.lambda() <= ZERO_NORM {
        return Err(SimError::ZeroNormTerm("all terms".into()));
    }
    ProbabilityDistribution::new(decomposition.inf_norms())
}

pub fn equal_distribution(decomposition: &Decomposition) -> SimResult<ProbabilityDistribution> {
    ProbabilityDistribution::uniform(decomposition.len())
}

/// One first-order Trotter step: `e^{−iH_L Δt} ⋯ e^{−iH_1 Δt}`, term 1 first.
pub fn step_trotter1(
    state: &QuantumState,
    decomposition: &Decomposition,
    plan: &StepPlan,
) -> SimResult<QuantumState> {
    let dt = plan.step_size();
    let mut out = state.clone();
    for term in decomposition.terms() {
        out = evolve_unitary(&out, term.eig(), dt)?;
    }
    Ok(out)
}

/// One random step: sample `j ~ p`, apply `e^{−iH_j τ_j}`.
pub fn step_random<R: Rng + ?Sized>(
    state: &QuantumState,
    decomposition: &Decomposition,
    plan: &StepPlan,
    p: &ProbabilityDistribution,
    rng: &mut R,
) -> SimResult<(QuantumState, usize, f64)> {
    if p.len() != decomposition.len() {
        return Err(SimError::DimensionMismatch {
            expected: decomposition.len(),
            found: p.len(),
        });
    }
    let j = p.sample(rng);
    let tau = plan.time_slice(p.get(j));
    let next = evolve_unitary(state, decomposition.terms()[j].eig(), tau)?;
    Ok((next, j, tau))
}

/// `‖D_jj‖` of every term on `state`: the moment formula for pure states,
/// the finite-difference estimator otherwise.
pub fn measure_djj(
    state: &QuantumState,
    decomposition: &Decomposition,
    noise: &mut NoiseModel,
    fd_dt: f64,
) -> SimResult<Vec<f64>> {
    decomposition
        .terms()
        .iter()
        .map(|term| {
            if state.is_pure() {
                djj_pure(term.op(), state, noise)
            } else {
                djj_finite_difference_eig(term.eig(), state, fd_dt, noise)
            }
        })
        .collect()
}

/// The adaptive weights for `state`.
pub fn arc_distribution(
    state: &QuantumState,
    decomposition: &Decomposition,
    noise: &mut NoiseModel,
    options: &ArcOptions,
) -> SimResult<ProbabilityDistribution> {
    let djj = measure_djj(state, decomposition, noise, options.fd_dt)?;
    let p = optimal_distribution(&djj)?;
    match options.p_floor {
        Some(floor) => p.with_floor(floor),
        None => Ok(p),
    }
}

fn reference_fidelity(
    reference: Option<&[QuantumState]>,
    step: usize,
    state: &QuantumState,
) -> SimResult<Option<f64>> {
    match reference {
        None => Ok(None),
        Some(states) => {
            let target = states.get(step).ok_or(SimError::EmptyStates)?;
            fidelity(target, state).map(Some)
        }
    }
}

fn check_reference(reference: Option<&[QuantumState]>, plan: &StepPlan) -> SimResult<()> {
    if let Some(states) = reference {
        if states.len() != plan.steps() {
            return Err(SimError::DimensionMismatch {
                expected: plan.steps(),
                found: states.len(),
            });
        }
    }
    Ok(())
}

fn run_fixed<R: Rng + ?Sized>(
    state0: &QuantumState,
    decomposition: &Decomposition,
    plan: &StepPlan,
    p: &ProbabilityDistribution,
    rng: &mut R,
    reference: Option<&[QuantumState]>,
) -> SimResult<TrajectoryRecord> {
    check_reference(reference, plan)?;
    let mut state = state0.clone();
    let mut steps = Vec::with_capacity(plan.steps());
    for k in 0..plan.steps() {
        let (next, index, tau) = step_random(&state, decomposition, plan, p, rng)?;
        state = next;
        steps.push(StepLog {
            index,
            tau,
            probabilities: p.as_slice().to_vec(),
            fidelity: reference_fidelity(reference, k, &state)?,
        });
    }
    Ok(TrajectoryRecord {
        steps,
        final_state: state,
    })
}

/// Random compiler with Schatten-∞ weights held fixed for all steps.
pub fn run_rc<R: Rng + ?Sized>(
    state0: &QuantumState,
    decomposition: &Decomposition,
    plan: &StepPlan,
    rng: &mut R,
    reference: Option<&[QuantumState]>,
) -> SimResult<TrajectoryRecord> {
    let p = rc_distribution(decomposition)?;
    run_fixed(state0, decomposition, plan, &p, rng, reference)
}

/// Random compiler sampling every term with probability `1/L`.
pub fn run_equal_weight<R: Rng + ?Sized>(
    state0: &QuantumState,
    decomposition: &Decomposition,
    plan: &StepPlan,
    rng: &mut R,
    reference: Option<&[QuantumState]>,
) -> SimResult<TrajectoryRecord> {
    let p = equal_distribution(decomposition)?;
    run_fixed(state0, decomposition, plan, &p, rng, reference)
}

/// Adaptive random compiler. Each step measures every term on the current
/// trajectory state (with `noise`), forms `p_j ∝ √‖D_jj‖`, samples and applies
/// one term exponential.
pub fn run_arc<R: Rng + ?Sized>(
    state0: &QuantumState,
    decomposition: &Decomposition,
    plan: &StepPlan,
    noise: &mut NoiseModel,
    rng: &mut R,
    options: &ArcOptions,
    reference: Option<&[QuantumState]>,
) -> SimResult<TrajectoryRecord> {
    check_reference(reference, plan)?;
    let mut state = state0.clone();
    let mut steps = Vec::with_capacity(plan.steps());
    for k in 0..plan.steps() {
        let p = arc_distribution(&state, decomposition, noise, options)?;
        let (next, index, tau) = step_random(&state, decomposition, plan, &p, rng)?;
        state = next;
        steps.push(StepLog {
            index,
            tau,
            probabilities: p.as_slice().to_vec(),
            fidelity: reference_fidelity(reference, k, &state)?,
        });
    }
    Ok(TrajectoryRecord {
        steps,
        final_state: state,
    })
}

/// First-order Trotter; returns the state after each step.
pub fn run_trotter1(
    state0: &QuantumState,
    decomposition: &Decomposition,
    plan: &StepPlan,
) -> SimResult<Vec<QuantumState>> {
    let mut out = Vec::with_capacity(plan.steps());
    let mut state = state0.clone();
    for _ in 0..plan.steps() {
        state = step_trotter1(&state, decomposition, plan)?;
        out.push(state.clone());
    }
    Ok(out)
}

/// Exact evolution under `full_h`; returns the state after each of the `N`
/// steps.
pub fn run_exact(
    state0: &QuantumState,
    full_h: &HermitianOperator,
    plan: &StepPlan,
) -> SimResult<Vec<QuantumState>> {
    let eig = eig_hermitian(full_h)?;
    let dt = plan.step_size();
    let mut out = Vec::with_capacity(plan.steps());
    let mut state = state0.clone();
    for _ in 0..plan.steps() {
        state = evolve_unitary(&state, &eig, dt)?;
        out.push(state.clone());
    }
    Ok(out)
}
