//! Spectral (closure-relation) time evolution: oscillatory quadrature over
//! the eigenbasis plus analytic tail corrections.

pub mod evolve;
pub mod field;
pub mod quad;
pub mod series;

pub use evolve::{
    closure_check, evolve_qubit_amplitudes, trajectory, ClosureReport, InitialState, Propagator,
    QubitTrajectory, SpectralError,
};
pub use field::{
    default_xgrid, field_snapshot, total_probability, FieldKernel, FieldSnapshot, PhysicalField,
};
pub use quad::QuadratureSpec;
