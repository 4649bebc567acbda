//! Exact single-excitation dynamics of two qubits coupled through a 1D
//! waveguide, with reservoir losses.
//!
//! The crate diagonalizes the single-excitation Hamiltonian in closed form
//! (scattering branch, quasi-localized branch and the discrete lossless
//! localized state), propagates an initial qubit state through the spectral
//! closure relation, and reconstructs qubit populations, concurrence and
//! photon field profiles. A closed-form Markovian reference and a
//! brute-force lattice oracle are included for validation.

pub mod eigen_lossless;
pub mod eigen_lossy;
pub mod lattice;
pub mod markov;
pub mod model;
pub mod spectral;

pub use model::{Branch, Subspace, SystemParams};

/// Shorthand used throughout the crate.
pub type C64 = num_complex::Complex64;
