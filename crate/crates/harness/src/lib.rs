//! Experiment harness: JSON configs, seeded trajectory ensembles, zero step
//! size extrapolation, probability traces and CSV/JSON/SVG output.

pub mod config;
pub mod emit;
pub mod ensemble;
pub mod error;
pub mod selftest;

use arcsim_core::bounds::bound_report;

pub use config::{ExperimentConfig, ModelSpec, PlanPoint, PlanSpec, Prepared, XKind};
pub use emit::{emit, emit_svg, Format, PointBounds};
pub use ensemble::{
    extrapolate_zero_dt, run_ensemble, run_prepared, run_prepared_with_threads, run_ptrace, EnsembleResult, PointResult,
    ProbabilityTrace,
};
pub use error::{HarnessError, HarnessResult};

/// Bound report along the exact trajectory at every plan point.
pub fn point_bounds(prepared: &Prepared) -> HarnessResult<Vec<PointBounds>> {
    prepared
        .points
        .iter()
        .map(|pt| {
            Ok(PointBounds {
                x_kind: pt.x_kind,
                x_value: pt.x_value,
                report: bound_report(
                    &prepared.decomposition,
                    &prepared.initial,
                    &pt.plan,
                    prepared.config.target_error,
                )?,
            })
        })
        .collect()
}
