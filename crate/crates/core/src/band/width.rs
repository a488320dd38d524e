use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{BandError, BandModel};

/// Critical value of `liminf r⁻² A(r)`.
pub const AREA_RATIO_THRESHOLD: f64 = 12.0 / PI;

/// Relative slack required before a strict inequality is declared to hold.
const STRICT_SLACK: f64 = 1e-12;

/// `−8π(g − 1)/A₀`, the infimum of admissible curvature lower bounds.
fn hypothesis_floor(genus: u32, a0: f64) -> f64 {
    -8.0 * PI * (genus as f64 - 1.0) / a0
}

/// `π √(2A₀ / (24π(g−1) + 3r₀A₀))`.
pub fn band_width_bound(genus: u32, a0: f64, r0: f64) -> Result<f64, BandError> {
    if genus < 1 {
        return Err(BandError::Domain("genus must be at least 1".into()));
    }
    if !(a0 > 0.0 && a0.is_finite()) || !r0.is_finite() {
        return Err(BandError::Domain(format!("need A0 > 0 and finite r0, got A0 = {a0}, r0 = {r0}")));
    }
    let floor = hypothesis_floor(genus, a0);
    if !(r0 > floor) {
        return Err(BandError::Hypothesis(format!("r0 = {r0} is not above -8π(g-1)/A0 = {floor}")));
    }
    let denom = 24.0 * PI * (genus as f64 - 1.0) + 3.0 * r0 * a0;
    Ok(PI * (2.0 * a0 / denom).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum AuditOutcome {
    Holds { r0: f64, a0: f64, bound: f64, distance: f64 },
    Violated { r0: f64, a0: f64, bound: f64, distance: f64 },
    NotApplicable { r0: f64, a0: f64, floor: f64, reason: String },
}

impl AuditOutcome {
    pub fn is_violated(&self) -> bool {
        matches!(self, Self::Violated { .. })
    }

    pub fn is_applicable(&self) -> bool {
        !matches!(self, Self::NotApplicable { .. })
    }
}

/// Checks the band-width inequality on `model`, with `Σ₀ = {0} × V`.
///
/// Since `t` is arclength, both distances from `Σ₀` to the boundary equal
/// `T`. With `doubling` set, only the half band `[0, T]` is used and `Σ₀`
/// must have `φ′(0) ≤ 0`.
pub fn band_width_audit(model: &BandModel, doubling: bool) -> Result<AuditOutcome, BandError> {
    let t = model.half_width();
    let a0 = model.slice_area(0.0);
    let floor = hypothesis_floor(model.genus(), a0);
    let lo = if doubling { 0.0 } else { -t };
    let r0 = model.min_scalar_on(lo, t)?;
    if doubling && model.phi(0.0).d1 > 0.0 {
        return Ok(AuditOutcome::NotApplicable {
            r0,
            a0,
            floor,
            reason: "middle slice is not mean convex towards the half band".into(),
        });
    }
    if !(r0 - floor > STRICT_SLACK * floor.abs().max(1.0)) {
        return Ok(AuditOutcome::NotApplicable { r0, a0, floor, reason: "r0 not strictly above the floor".into() });
    }
    let bound = band_width_bound(model.genus(), a0, r0)?;
    Ok(if t <= bound {
        AuditOutcome::Holds { r0, a0, bound, distance: t }
    } else {
        AuditOutcome::Violated { r0, a0, bound, distance: t }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum HypothesisVerdict {
    /// `margin = 12/π − tail_ratio > 0`.
    Satisfied {
        tail_ratio: f64,
        margin: f64,
        tail_len: usize,
    },
    NotSatisfied {
        tail_ratio: f64,
        margin: f64,
        tail_len: usize,
    },
    InsufficientData {
        samples: usize,
    },
}

/// Tail estimate of `liminf r⁻² A(r)` from the last `max(3, len/2)`
/// samples, compared strictly with `12/π`.
pub fn theorem1_hypothesis(samples: &[(f64, f64)]) -> Result<HypothesisVerdict, BandError> {
    if samples.len() < 3 {
        return Ok(HypothesisVerdict::InsufficientData { samples: samples.len() });
    }
    if samples.iter().any(|&(r, a)| !(r > 0.0 && r.is_finite()) || !(a >= 0.0 && a.is_finite())) {
        return Err(BandError::Domain("radii must be positive and areas nonnegative".into()));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(BandError::Domain("radii must be strictly increasing".into()));
    }
    let tail_len = (samples.len() / 2).max(3);
    let tail_ratio =
        samples[samples.len() - tail_len..].iter().map(|&(r, a)| a / (r * r)).fold(f64::INFINITY, f64::min);
    let margin = AREA_RATIO_THRESHOLD - tail_ratio;
    Ok(if margin > STRICT_SLACK * AREA_RATIO_THRESHOLD {
        HypothesisVerdict::Satisfied { tail_ratio, margin, tail_len }
    } else {
        HypothesisVerdict::NotSatisfied { tail_ratio, margin, tail_len }
    })
}

/// `−(2/3)π² · (12/π)`: the total-curvature floor for the μ-bubble surface.
pub fn total_curvature_floor() -> f64 {
    -(2.0 / 3.0) * PI * PI * AREA_RATIO_THRESHOLD
}

/// Genus implied by `∫ R dA = 8π(1 − g)`.
pub fn genus_from_total_curvature(v: f64) -> f64 {
    1.0 - v / (8.0 * PI)
}
