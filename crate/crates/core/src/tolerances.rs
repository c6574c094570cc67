//! Floating-point tolerances shared by every numeric routine.

/// Slack allowed when comparing two bounds in bits.
pub const BOUND_ABS: f64 = 1e-9;
/// Slack for exact entropy evaluations.
pub const ENTROPY_ABS: f64 = 1e-9;
/// Optimizers stop when a sweep improves the objective by less than this.
pub const CONVERGENCE: f64 = 1e-7;
/// Slack on per-antenna power constraints.
pub const POWER_ABS: f64 = 1e-12;
/// Determinant below which a covariance is treated as singular.
pub const PSD_DET_MIN: f64 = 1e-6;
/// Eigen/pivot magnitude below which a variance is treated as zero.
pub const PIVOT_ZERO: f64 = 1e-12;
/// Slack when checking an additive gap against its guaranteed bound.
pub const GAP_SLACK: f64 = 1e-6;
