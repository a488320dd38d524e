//! Rotationally symmetric band models `M = [−T, T] × V` with metric
//! `dt² + φ(t)² g_V`, where `(V, g_V)` is a closed surface of genus `g ≥ 1`
//! with constant curvature and area `A_V`.
//!
//! Orientation conventions, fixed together:
//!
//! * the reference region is `{t ≥ 0}` and candidate regions are `{t ≥ s}`;
//! * the outward normal of `{t ≥ s}` is `ν = −∂_t`;
//! * mean curvature is `H = div ν = −2φ′/φ`, so a critical level satisfies
//!   `H = h(s)` and the reduced functional is
//!   `𝒜(s) = A_V (φ(s)² + ∫₀ˢ h φ² dt)`.
//!
//! The distance function from the middle slice is `t` itself, which is
//! arclength, so distances between slices are coordinate differences.

mod model;
mod potential;
mod solve;
pub mod sweep;
mod width;

pub use model::{BandModel, BandSpec, PhiFamily};
pub use potential::{open_grid, potential, potential_bound_check, potential_derivative, PotentialParams};
pub use solve::{functional, minimize, stability_report, MuBubbleSolution, StabilityReport};
pub use width::{
    band_width_audit, band_width_bound, genus_from_total_curvature, theorem1_hypothesis, total_curvature_floor,
    AuditOutcome, HypothesisVerdict, AREA_RATIO_THRESHOLD,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BandError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid band model: {0}")]
    InvalidModel(String),
    #[error("hypothesis fails: {0}")]
    Hypothesis(String),
    #[error("minimizer escaped to the boundary at level {level}")]
    BoundaryEscape { level: f64 },
    #[error("refined level is not critical (|H − h| = {residual:e})")]
    NotCritical { residual: f64 },
}
