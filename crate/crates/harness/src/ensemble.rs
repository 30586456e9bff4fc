//! Seeded trajectory ensembles and their statistics.
//!
//! Trajectory `m` of protocol `p` at plan point `x` draws from streams keyed
//! by `(master_seed, p, x, m)`, so the outcome of each trajectory is fixed by
//! the config alone. Results are collected in trajectory order and reduced
//! sequentially, which keeps every output bit-identical for any worker count.

use arcsim_core::compilers::TrajectoryRecord;
use arcsim_core::rng::TrajectoryStreams;
use arcsim_core::{
    eig_hermitian, evolve_unitary, fidelity, run_arc, run_equal_weight, run_rc, run_trotter1,
    NoiseModel, Protocol, QuantumState,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, PlanPoint, Prepared, XKind};
use crate::error::{HarnessError, HarnessResult};

pub const THREADS_ENV: &str = "ARC_SIM_THREADS";

/// Aggregated fidelity at one (protocol, plan point).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub protocol: Protocol,
    pub x_kind: XKind,
    pub x_value: f64,
    pub mean_fidelity: f64,
    pub stderr: f64,
    pub trajectories: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrapolation {
    pub protocol: Protocol,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub points: Vec<PointResult>,
    /// Zero-step-size limits, present for fixed-`t` sweeps of at least three
    /// step sizes.
    pub extrapolated: Vec<Extrapolation>,
}

impl EnsembleResult {
    pub fn point(&self, protocol: Protocol, x_value: f64) -> Option<&PointResult> {
        self.points
            .iter()
            .find(|p| p.protocol == protocol && p.x_value == x_value)
    }

    pub fn series(&self, protocol: Protocol) -> Vec<&PointResult> {
        self.points.iter().filter(|p| p.protocol == protocol).collect()
    }

    pub fn extrapolated(&self, protocol: Protocol) -> Option<f64> {
        self.extrapolated
            .iter()
            .find(|e| e.protocol == protocol)
            .map(|e| e.fidelity)
    }
}

/// Worker count from `ARC_SIM_THREADS`, if set to a positive integer.
pub fn configured_threads() -> HarnessResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(HarnessError::Config(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
    }
}

/// Runs `f` on a pool of `threads` workers, falling back to
/// `ARC_SIM_THREADS` and then to rayon's default.
pub fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> HarnessResult<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads.or(configured_threads()?) {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn protocol_coordinate(protocol: Protocol) -> u64 {
    Protocol::ALL.iter().position(|&p| p == protocol).unwrap_or(0) as u64
}

/// Streams owned by one trajectory.
pub fn trajectory_streams(
    config: &ExperimentConfig,
    protocol: Protocol,
    point: &PlanPoint,
    trajectory: usize,
) -> TrajectoryStreams {
    TrajectoryStreams::for_trajectory(
        config.master_seed,
        &[protocol_coordinate(protocol), point.seed_coordinate(), trajectory as u64],
    )
}

/// The exact state at `t`.
pub fn exact_final_state(prepared: &Prepared, point: &PlanPoint) -> HarnessResult<QuantumState> {
    let eig = eig_hermitian(&prepared.decomposition.total())?;
    Ok(evolve_unitary(&prepared.initial, &eig, point.plan.total_time())?)
}

/// Runs one random-protocol trajectory with its own seeded streams.
pub fn random_trajectory(
    prepared: &Prepared,
    protocol: Protocol,
    point: &PlanPoint,
    trajectory: usize,
) -> HarnessResult<TrajectoryRecord> {
    let config = &prepared.config;
    let mut streams = trajectory_streams(config, protocol, point, trajectory);
    let dec = &prepared.decomposition;
    let state0 = &prepared.initial;
    let plan = &point.plan;
    let record = match protocol {
        Protocol::Arc => {
            let mut noise = NoiseModel::from_rng(config.noise_std, streams.noise)?;
            run_arc(
                state0,
                dec,
                plan,
                &mut noise,
                &mut streams.sampling,
                &config.arc_options(),
                None,
            )?
        }
        Protocol::Rc => run_rc(state0, dec, plan, &mut streams.sampling, None)?,
        Protocol::Equal => run_equal_weight(state0, dec, plan, &mut streams.sampling, None)?,
        Protocol::Trotter1 | Protocol::Exact => {
            return Err(HarnessError::Config(format!("{protocol} is not a random protocol")))
        }
    };
    Ok(record)
}

/// Final state of one trajectory; deterministic protocols ignore the index.
pub fn final_state(
    prepared: &Prepared,
    protocol: Protocol,
    point: &PlanPoint,
    trajectory: usize,
) -> HarnessResult<QuantumState> {
    match protocol {
        Protocol::Exact => exact_final_state(prepared, point),
        Protocol::Trotter1 => {
            let states = run_trotter1(&prepared.initial, &prepared.decomposition, &point.plan)?;
            states
                .into_iter()
                .last()
                .ok_or_else(|| HarnessError::Config("plan has no steps".into()))
        }
        _ => Ok(random_trajectory(prepared, protocol, point, trajectory)?.final_state),
    }
}

/// Per-trajectory fidelities at one plan point, in trajectory order.
/// Deterministic protocols run a single trajectory.
pub fn point_fidelities(
    prepared: &Prepared,
    protocol: Protocol,
    point: &PlanPoint,
    target: &QuantumState,
) -> HarnessResult<Vec<f64>> {
    let m = if protocol.is_random() {
        prepared.config.trajectories
    } else {
        1
    };
    (0..m)
        .into_par_iter()
        .map(|k| {
            let state = final_state(prepared, protocol, point, k)?;
            Ok(fidelity(target, &state)?)
        })
        .collect()
}

/// Mean and standard error `s/√M` with the unbiased sample deviation;
/// the error is zero for a single sample.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let m = values.len();
    if m == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    if m == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    let std = (ss / (m - 1) as f64).sqrt();
    (mean, std / (m as f64).sqrt())
}

/// Intercept of the least-squares line through the three smallest step
/// sizes, clamped to `[0, 1]`.
pub fn extrapolate_zero_dt(points: &[(f64, f64)]) -> HarnessResult<f64> {
    if points.len() < 3 {
        return Err(HarnessError::Config(format!(
            "extrapolation needs at least 3 points, got {}",
            points.len()
        )));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let fit = &sorted[..3];
    let n = fit.len() as f64;
    let mx = fit.iter().map(|p| p.0).sum::<f64>() / n;
    let my = fit.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = fit.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(HarnessError::Config("extrapolation needs distinct step sizes".into()));
    }
    let sxy: f64 = fit.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let intercept = my - (sxy / sxx) * mx;
    Ok(intercept.clamp(0.0, 1.0))
}

/// Runs every listed protocol at every plan point.
pub fn run_ensemble(config: &ExperimentConfig) -> HarnessResult<EnsembleResult> {
    let prepared = Prepared::new(config.clone())?;
    run_prepared(&prepared)
}

pub fn run_prepared(prepared: &Prepared) -> HarnessResult<EnsembleResult> {
    run_prepared_with_threads(prepared, None)
}

/// As [`run_prepared`] on an explicit number of workers.
pub fn run_prepared_with_threads(
    prepared: &Prepared,
    threads: Option<usize>,
) -> HarnessResult<EnsembleResult> {
    with_pool(threads, || run_in_pool(prepared))?
}

fn run_in_pool(prepared: &Prepared) -> HarnessResult<EnsembleResult> {
    let targets = prepared
        .points
        .iter()
        .map(|pt| exact_final_state(prepared, pt))
        .collect::<HarnessResult<Vec<_>>>()?;
    let mut points = Vec::new();
    for &protocol in &prepared.config.protocols {
        for (pt, target) in prepared.points.iter().zip(&targets) {
            let f = point_fidelities(prepared, protocol, pt, target)?;
            let (mean, stderr) = mean_and_stderr(&f);
            points.push(PointResult {
                protocol,
                x_kind: pt.x_kind,
                x_value: pt.x_value,
                mean_fidelity: mean,
                stderr,
                trajectories: f.len(),
            });
        }
    }

    let mut extrapolated = Vec::new();
    if prepared.points.len() >= 3 && prepared.points[0].x_kind == XKind::Dt {
        for &protocol in &prepared.config.protocols {
            let series: Vec<(f64, f64)> = points
                .iter()
                .filter(|p| p.protocol == protocol)
                .map(|p| (p.x_value, p.mean_fidelity))
                .collect();
            extrapolated.push(Extrapolation {
                protocol,
                fidelity: extrapolate_zero_dt(&series)?,
            });
        }
    }
    Ok(EnsembleResult {
        points,
        extrapolated,
    })
}

/// One row of a probability trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    /// 1-based step number.
    pub step: usize,
    pub probabilities: Vec<f64>,
    /// 1-based index of the sampled term, matching the `p1, p2, …` columns.
    pub sampled_index: usize,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityTrace {
    pub labels: Vec<String>,
    /// Trajectories averaged into the probability columns.
    pub trajectories: usize,
    pub rows: Vec<TraceRow>,
}

impl ProbabilityTrace {
    /// 0-based index of the largest probability at each step.
    pub fn argmax_sequence(&self) -> Vec<usize> {
        self.rows
            .iter()
            .map(|r| {
                r.probabilities
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (k, &p)| if p > best.1 { (k, p) } else { best })
                    .0
            })
            .collect()
    }

    pub fn argmax_changes(&self) -> usize {
        self.argmax_sequence().windows(2).filter(|w| w[0] != w[1]).count()
    }
}

/// ARC probability trace at the config's single plan point. With
/// `ptrace_trajectories = 1` the rows describe trajectory 0 of the ensemble;
/// otherwise the probabilities are averaged per step while the sampled index
/// and time slice still come from trajectory 0.
pub fn run_ptrace(config: &ExperimentConfig) -> HarnessResult<ProbabilityTrace> {
    if config.protocols != [Protocol::Arc] {
        return Err(HarnessError::Config(
            "probability traces need protocols = [\"arc\"]".into(),
        ));
    }
    let prepared = Prepared::new(config.clone())?;
    let point = match prepared.points.as_slice() {
        [p] => *p,
        _ => {
            return Err(HarnessError::Config(
                "probability traces need exactly one plan point".into(),
            ))
        }
    };
    let m = config.ptrace_trajectories;
    let records = with_pool(None, || {
        (0..m)
            .into_par_iter()
            .map(|k| random_trajectory(&prepared, Protocol::Arc, &point, k))
            .collect::<HarnessResult<Vec<_>>>()
    })??;

    let first = &records[0];
    let rows = first
        .steps
        .iter()
        .enumerate()
        .map(|(i, log)| {
            let mut probabilities = vec![0.0; log.probabilities.len()];
            for rec in &records {
                for (acc, p) in probabilities.iter_mut().zip(&rec.steps[i].probabilities) {
                    *acc += p;
                }
            }
            probabilities.iter_mut().for_each(|p| *p /= m as f64);
            TraceRow {
                step: i + 1,
                probabilities,
                sampled_index: log.index + 1,
                tau: log.tau,
            }
        })
        .collect();
    Ok(ProbabilityTrace {
        labels: prepared.decomposition.labels().iter().map(|s| s.to_string()).collect(),
        trajectories: m,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extrapolation_examples() {
        let line: Vec<(f64, f64)> = [0.01, 0.02, 0.04, 0.1].iter().map(|&d| (d, 1.0 - 2.0 * d)).collect();
        assert!((extrapolate_zero_dt(&line).unwrap() - 1.0).abs() < 1e-12);
        let flat = vec![(0.01, 0.9), (0.02, 0.9), (0.05, 0.9)];
        assert!((extrapolate_zero_dt(&flat).unwrap() - 0.9).abs() < 1e-12);
        // intercept 1.004 before clamping
        let high = vec![(0.01, 0.994), (0.02, 0.984), (0.03, 0.974)];
        assert_eq!(extrapolate_zero_dt(&high).unwrap(), 1.0);
        assert!(extrapolate_zero_dt(&flat[..2]).is_err());
    }

    #[test]
    fn extrapolation_uses_three_smallest() {
        let pts = vec![(0.1, 0.0), (0.01, 0.98), (0.02, 0.96), (0.04, 0.92)];
        assert!((extrapolate_zero_dt(&pts).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stderr_definition() {
        let (m, s) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        let sample_std = (5.0f64 / 3.0).sqrt();
        assert!((s - sample_std / 2.0).abs() < 1e-15);
        assert_eq!(mean_and_stderr(&[0.7]), (0.7, 0.0));
    }
}
