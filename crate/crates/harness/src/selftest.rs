//! Randomized oracle checks: estimators against direct matrix arithmetic,
//! optimality of the adaptive weights and the Cauchy–Schwarz ordering of
//! the second-order terms.

use arcsim_core::bounds::check_cauchy_schwarz;
use arcsim_core::{
    cost, djj_exact, djj_finite_difference, djj_from_moments, moments_of, optimal_distribution,
    CVector, Complex64, ComplexMatrix, Decomposition, HermitianOperator, HilbertStructure,
    NoiseModel, ProbabilityDistribution, QuantumState, SimResult,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

fn space_of(dim: usize) -> SimResult<HilbertStructure> {
    if dim.is_power_of_two() {
        HilbertStructure::qubits(dim.trailing_zeros() as usize)
    } else {
        HilbertStructure::fock(dim)
    }
}

/// GUE-like Hermitian matrix with spectral radius of order one.
pub fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> SimResult<HermitianOperator> {
    let entries: Vec<Complex64> = (0..dim * dim).map(|_| gaussian(rng)).collect();
    let g = ComplexMatrix::from_rows(dim, &entries)?;
    let h = (&g + &g.adjoint()).scale_real(0.5 / (dim as f64).sqrt());
    HermitianOperator::new(h, "random")
}

pub fn random_pure(dim: usize, rng: &mut ChaCha8Rng) -> SimResult<QuantumState> {
    let v = CVector::from_fn(dim, |_, _| gaussian(rng));
    QuantumState::pure_normalized(v, space_of(dim)?)
}

/// Full-rank density matrix `GG†/Tr(GG†)`.
pub fn random_mixed(dim: usize, rng: &mut ChaCha8Rng) -> SimResult<QuantumState> {
    let entries: Vec<Complex64> = (0..dim * dim).map(|_| gaussian(rng)).collect();
    let g = ComplexMatrix::from_rows(dim, &entries)?;
    let rho = &g * &g.adjoint();
    let tr = rho.trace().re;
    QuantumState::mixed(rho.scale_real(1.0 / tr), space_of(dim)?)
}

/// Moment formula against `‖[H,[H,ρ]]‖` on random pure states.
pub fn moment_oracle(per_dim: usize, dims: &[usize], seed: u64) -> SimResult<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for &dim in dims {
        for _ in 0..per_dim {
            let h = random_hermitian(dim, &mut rng)?;
            let psi = random_pure(dim, &mut rng)?;
            let exact = djj_exact(&h, &psi)?;
            let est = djj_from_moments(&moments_of(&h, &psi, &mut NoiseModel::exact())?);
            worst = worst.max((est - exact).abs() / (1.0 + exact));
        }
    }
    Ok(CheckOutcome {
        name: "moment formula matches direct double commutator",
        passed: worst <= 1e-8,
        detail: format!("{} pairs, worst |Δ|/(1+d) = {worst:.3e} (tol 1e-8)", per_dim * dims.len()),
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub const FD_SLOPE_GRID: [f64; 4] = [1e-2, 5e-3, 2.5e-3, 1.25e-3];

/// Convergence order and accuracy of the finite-difference estimator on
/// random mixed states.
pub fn finite_difference_oracle(states: usize, dim: usize, seed: u64) -> SimResult<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut min_slope, mut max_slope, mut worst_rel) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for _ in 0..states {
        let h = random_hermitian(dim, &mut rng)?;
        let rho = random_mixed(dim, &mut rng)?;
        let exact = djj_exact(&h, &rho)?;
        let errors = FD_SLOPE_GRID
            .iter()
            .map(|&dt| {
                let est = djj_finite_difference(&h, &rho, dt, &mut NoiseModel::exact())?;
                Ok((est - exact).abs())
            })
            .collect::<SimResult<Vec<f64>>>()?;
        let slope = log_log_slope(&FD_SLOPE_GRID, &errors);
        min_slope = min_slope.min(slope);
        max_slope = max_slope.max(slope);
        let est = djj_finite_difference(&h, &rho, 1e-3, &mut NoiseModel::exact())?;
        worst_rel = worst_rel.max((est - exact).abs() / exact);
    }
    Ok(CheckOutcome {
        name: "finite-difference estimator is second order",
        passed: min_slope >= 1.7 && max_slope <= 2.3 && worst_rel <= 1e-4,
        detail: format!(
            "{states} states, slopes in [{min_slope:.3}, {max_slope:.3}] (want [1.7, 2.3]), \
             worst rel err at dt=1e-3 {worst_rel:.3e} (tol 1e-4)"
        ),
    })
}

/// `√d`-weights minimize `Σ d_j/p_j` against random distributions.
pub fn lagrange_oracle(vectors: usize, trials: usize, seed: u64) -> SimResult<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    let mut least_margin = f64::INFINITY;
    for _ in 0..vectors {
        let len = rng.random_range(2..=6);
        let d: Vec<f64> = (0..len).map(|_| rng.random::<f64>() + 1e-6).collect();
        let best = cost(&d, &optimal_distribution(&d)?)?;
        for _ in 0..trials {
            let w: Vec<f64> = (0..len).map(|_| Exp1.sample(&mut rng)).collect();
            let c = cost(&d, &ProbabilityDistribution::new(w)?)?;
            least_margin = least_margin.min((c - best) / best);
            if best > c * (1.0 + 1e-12) {
                violations += 1;
            }
        }
    }
    Ok(CheckOutcome {
        name: "adaptive weights minimize the sampling cost",
        passed: violations == 0,
        detail: format!(
            "{vectors}×{trials} comparisons, {violations} violations, smallest relative margin {least_margin:.3e}"
        ),
    })
}

/// `(Σ√‖L_j²ρ‖)² ≤ λ Σ ‖L_j²ρ‖/‖H_j‖` on random three-term decompositions,
/// with equality for a single term.
pub fn cauchy_schwarz_oracle(instances: usize, seed: u64) -> SimResult<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = [2, 4, 8, 16];
    let mut failures = 0usize;
    let mut worst_single = 0.0f64;
    for k in 0..instances {
        let dim = dims[k % dims.len()];
        let terms = (0..3)
            .map(|_| {
                let scale = 0.1 + 2.0 * rng.random::<f64>();
                Ok(random_hermitian(dim, &mut rng)?.scaled(scale))
            })
            .collect::<SimResult<Vec<_>>>()?;
        let psi = random_pure(dim, &mut rng)?;
        if !check_cauchy_schwarz(&Decomposition::new(terms.clone())?, &psi)?.holds {
            failures += 1;
        }
        let single = check_cauchy_schwarz(&Decomposition::new(vec![terms[0].clone()])?, &psi)?;
        worst_single = worst_single.max((single.lhs - single.rhs).abs() / single.rhs.max(1e-300));
    }
    Ok(CheckOutcome {
        name: "adaptive second-order term never exceeds the fixed-weight one",
        passed: failures == 0 && worst_single <= 1e-10,
        detail: format!(
            "{instances} instances, {failures} failures, single-term equality off by {worst_single:.3e} (tol 1e-10)"
        ),
    })
}

/// The quick suite run by `arc-sim selftest`.
pub fn run_selftest(seed: u64) -> SimResult<Vec<CheckOutcome>> {
    Ok(vec![
        moment_oracle(25, &[2, 4, 8, 16], seed)?,
        finite_difference_oracle(10, 4, seed)?,
        lagrange_oracle(50, 200, seed)?,
        cauchy_schwarz_oracle(100, seed)?,
    ])
}
