//! Numerical verification of positive-scalar-curvature constructions on
//! noncompact ends.
//!
//! The crate is organised around four pieces:
//!
//! * [`chart`]: a finite-difference curvature oracle for arbitrary
//!   coordinate-chart metrics. Every closed form elsewhere is checked
//!   against it.
//! * [`bundle`]: warped metrics `dt² + a(t)²θ² + b(t)²π*h` on
//!   `[0,∞) × X` for a circle bundle `X → N`, their closed-form scalar
//!   curvature, the dimension-case warping profiles, lower bounds and
//!   positivity certificates.
//! * [`catalog`]: concrete bundles (Heisenberg nilmanifold, Hopf fibration,
//!   product bundles) with total-space charts for the oracle.
//! * [`band`]: rotationally symmetric band models `[-T,T] × V`, the
//!   tangent potential, level-set mu-bubbles, stability and band-width
//!   audits.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod band;
pub mod bundle;
pub mod catalog;
pub mod chart;
pub mod jet;
pub mod spline;

pub use jet::Jet;
