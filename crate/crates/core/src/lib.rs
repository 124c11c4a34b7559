//! Open-system model of a flux-biased SQUID coupled to an Ohmic bath.
//!
//! The crate assembles the device Hamiltonian in a truncated Fock basis,
//! builds the non-rotating-wave Born-Markov master equation together with
//! its dissipator coefficient matrix over (X, P, S), completes that matrix
//! to positive semidefiniteness by the minimally invasive det(a) = 0 rule,
//! extracts Lindblad operators, integrates density matrices under either
//! right-hand side, and sweeps flux/coupling for energy levels and
//! ground-state magnetic susceptibility.

pub mod error;
pub mod linalg;
pub mod operators;
pub mod model;
pub mod master;
pub mod dynamics;
pub mod spectroscopy;

pub use dynamics::{
    evolve, initial_state, positivity_comparison, DensityMatrix, InitialState, PositivityReport,
    Trajectory,
};
pub use error::{Error, Result};
pub use linalg::{
    anticommutator, commutator, dagger, frobenius_norm, hermitian_eig, hermiticity_defect,
    identity, matmul, trace, CMatrix, EigenDecomposition,
};
pub use master::{
    bm_rhs, coefficient_matrix, extract_lindblads, g_range_check, lindblad_rhs,
    quadratic_dissipator, solve_a_ss, CoefficientMatrix, GRange, LindbladSet, LindbladTerm,
    OperatorBasis, G_RANGE,
};
pub use model::{
    build_correction_terms, build_sine_operator, build_system_hamiltonian, derive_params,
    effective_hamiltonian, ps_cosine_coefficient, CorrectionTerms, DeviceInputs, ModelBuilder,
    PhysicalConstants, SquidParams, TermSet,
};
pub use operators::{
    annihilator, operator_trig, parity, quadrature_trig, quadratures, FockSpace,
    QuadratureCalculus, TrigKind,
};
pub use spectroscopy::{
    convergence_audit, linspace, spectrum_sweep, spiderweb, susceptibility, ConvergenceAudit,
    SpiderwebResult, SusceptibilityResult, SweepResult, SweepSpec, SPIDERWEB_ORDER,
};
