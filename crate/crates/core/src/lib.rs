//! Reflection and transmission of non-Hermitian tight-binding scattering
//! centres threaded by synthetic flux and attached to two uniform leads.
//!
//! - [`lattice`]: centre graphs, leads, gauge and flux utilities
//! - [`center_file`]: JSON centre definitions
//! - [`rhombic`]: the axial and reflection PT-symmetric rhombic rings and
//!   their closed-form coefficients
//! - [`solver`]: generic lead-matched solver, transfer matrix, singular states
//! - [`symmetry`]: PT classification and reciprocity relation checks
//! - [`features`]: sweeps, reflection/transmission zeros, spectral singularities
//! - [`wavepacket`]: time-domain oracle for the steady-state probabilities

pub mod center_file;
pub mod error;
pub mod features;
pub mod lattice;
pub mod rhombic;
pub mod solver;
pub mod symmetry;
pub mod wavepacket;

pub use error::{Error, Result};
pub use lattice::{
    apply_gauge, cycle_flux, dispersion, validate_center, Diagnostic, Hopping, LeadModel, ParityMap,
    RingParameters, ScatteringCenter, WaveVector,
};
pub use rhombic::{
    axial_coefficients, build_axial, build_reflection, reflection_coefficients, RhombicConfig, RhombicKind,
};
pub use solver::{
    coefficients, full_coefficients, limit_coefficients, residual, singular_state, solve_scattering,
    transfer_matrix, Evaluation, ScatteringCoefficients, ScatteringState, Side, SingularBranch, TransferMatrix,
};
