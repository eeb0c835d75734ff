//! Numerical thresholds used across the crate.

/// Relative zero threshold: `|x_i| <= ZERO_REL * (1 + ||x||_inf)` counts as zero.
pub const ZERO_REL: f64 = 1e-9;
/// Residual threshold for `Ax = b`, scaled by `1 + ||b||`.
pub const FEAS: f64 = 1e-8;
/// l-inf distance under which two extreme points are the same point.
pub const DEDUP: f64 = 1e-7;
/// Threshold on normalized certificates (`||z||_inf = 1`) for support membership.
pub const SUPPORT: f64 = 1e-6;
/// Certificate identity threshold.
pub const CERT: f64 = 1e-7;
/// A basis whose condition estimate exceeds `1 / BASIS_COND_REL` is singular.
pub const BASIS_COND_REL: f64 = 1e-11;
/// IPM stopping threshold on the largest KKT component.
pub const IPM: f64 = 1e-8;

/// `ZERO_REL * (1 + ||x||_inf)`.
pub fn zero_threshold(x_inf: f64) -> f64 {
    ZERO_REL * (1.0 + x_inf)
}
