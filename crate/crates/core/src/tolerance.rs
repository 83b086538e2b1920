//! Numerical thresholds shared across the crate.
//!
//! Construction-side checks sit at 1e-12; anything that validates external
//! or accumulated input uses the looser 1e-10 / 1e-9 band.

/// Elementwise Hermiticity of matrices built inside the crate.
pub const HERMITIAN_CONSTRUCTION: f64 = 1e-12;

/// Elementwise Hermiticity accepted when loading a state.
pub const HERMITIAN_VALIDATION: f64 = 1e-10;

/// Allowed deviation of the trace from one when loading a state.
pub const TRACE_VALIDATION: f64 = 1e-10;

/// Most negative eigenvalue still accepted as positive semidefinite.
pub const MIN_EIGENVALUE: f64 = -1e-10;

/// Below this the reconstructed operator is reported as unphysical.
pub const RECONSTRUCT_MIN_EIGENVALUE: f64 = -1e-8;

/// Largest imaginary residue tolerated in a Bloch coefficient.
pub const IMAGINARY_RESIDUE: f64 = 1e-9;

/// Radicands of the degree of coherence below this are rejected.
pub const RADICAND_REJECT: f64 = -1e-9;

/// Outcome probabilities at or below this are treated as impossible.
pub const ZERO_PROBABILITY: f64 = 1e-14;

/// Norm tolerance for measurement state vectors.
pub const UNIT_NORM: f64 = 1e-12;
