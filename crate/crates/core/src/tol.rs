//! Central tolerance constants.
//!
//! The constructions are exact rationals and surds, so any violation beyond
//! accumulated f64 rounding signals a bug rather than noise.

/// Default relative PSD tolerance: min eigenvalue ≥ −tol·max(1, ‖A‖₁).
pub const PSD_TOL: f64 = 1e-9;

/// Hermiticity defect accepted before symmetrizing an eigensolver input.
pub const HERM_TOL: f64 = 1e-10;

/// Unitarity defect accepted for seed and twisting unitaries.
pub const UNITARY_TOL: f64 = 1e-10;

/// Trace defect accepted for density-matrix inputs.
pub const STATE_TRACE_TOL: f64 = 1e-8;

/// Eigenvalue threshold below which a spectral weight counts as outside the
/// support of a state (relative-entropy support test).
pub const SUPPORT_TOL: f64 = 1e-10;

/// Trace tolerance for assembled block-operator states.
pub const BLOCK_TRACE_TOL: f64 = 1e-10;

/// Hermitian-pairing tolerance between mirrored blocks of a block operator.
pub const BLOCK_PAIR_TOL: f64 = 1e-12;
