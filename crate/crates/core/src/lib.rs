//! Dense simulation core for randomized Hamiltonian compilation.
//!
//! The crate provides the linear algebra, benchmark models, moment-based
//! estimators, the compile protocols (first-order Trotter, fixed-weight and
//! equal-weight random compilers, the adaptive random compiler) and the
//! state-dependent error bounds used to compare them.

pub mod bounds;
pub mod compilers;
pub mod error;
pub mod ket;
pub mod linalg;
pub mod models;
pub mod moments;
pub mod operators;
pub mod rng;
pub mod state;

pub use compilers::{
    cost, optimal_distribution, run_arc, run_equal_weight, run_exact, run_rc, run_trotter1,
    step_random, step_trotter1, ArcOptions, ProbabilityDistribution, Protocol, StepLog, StepPlan,
    TrajectoryRecord,
};
pub use error::{SimError, SimResult};
pub use ket::basis_state;
pub use linalg::{
    commutator, eig_hermitian, hs_inner, hs_norm, kron, schatten_inf, CVector, ComplexMatrix,
    EigenSystem, HermitianOperator,
};
pub use models::{build_kerr, build_mfim, build_rabi, Decomposition, Term};
pub use moments::{
    djj_exact, djj_finite_difference, djj_from_moments, djj_pure, moments_of, MomentSet, NoiseModel,
};
pub use state::{evolve_unitary, fidelity, HilbertStructure, QuantumState};

pub use num_complex::Complex64;
