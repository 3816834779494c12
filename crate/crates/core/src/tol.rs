//! Numerical tolerances shared across the crate.

/// Max entrywise `|M - M^dagger|` accepted for Hermitian inputs.
pub const HERMITIAN: f64 = 1e-10;
/// Eigenvalue floor; values in `[-PSD, 0)` are clipped to zero.
pub const PSD: f64 = 1e-10;
/// Allowed deviation of a trace from one.
pub const TRACE: f64 = 1e-10;
/// Eigenvalues at or below this are treated as kernel.
pub const SUPPORT: f64 = 1e-10;
/// General numeric slack (completeness relations, equality checks).
pub const NUM: f64 = 1e-9;
/// Default residual threshold for classical-structure verdicts.
pub const CLASSICAL: f64 = 1e-8;
/// Eigenvalue gap below which marginal eigenvalues are treated as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;
/// Marginal trace-distance residual accepted for a broadcast state.
pub const BROADCAST: f64 = 1e-9;
