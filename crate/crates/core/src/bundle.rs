//! Warped circle-bundle metrics `ḡ = dt² + a(t)²θ² + b(t)²π*h` on `[0,∞) × X`.
//!
//! `X → N` is a circle bundle over a compact base `(N, h)` of dimension
//! `n − 2` with nonnegative scalar curvature, and `θ` a connection form with
//! `dθ = π*Ω`. Norms of `Ω` use `|Ω|² = ½ h^{ik} h^{jl} Ω_ij Ω_kl`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jet::{derivative_mismatch, Jet, JetFn};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BundleError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension {n} has no positivity threshold")]
    NoThreshold { n: usize },
    #[error("inconsistent dimensions: {0}")]
    InconsistentDimensions(String),
    #[error("supplied derivatives disagree with finite differences (worst {0:e})")]
    InconsistentDerivatives(f64),
    #[error("base geometry violates {0}")]
    InvalidBase(String),
}

/// Which warping family a profile belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseLabel {
    N2,
    N3,
    N4,
    N5,
    NGe6,
    Custom,
}

impl CaseLabel {
    pub fn for_dimension(n: usize) -> Result<Self, BundleError> {
        Ok(match n {
            0 | 1 => return Err(BundleError::Domain(format!("total dimension {n} < 2"))),
            2 => Self::N2,
            3 => Self::N3,
            4 => Self::N4,
            5 => Self::N5,
            _ => Self::NGe6,
        })
    }
}

/// The pair of warping functions `(a, b)`.
#[derive(Clone)]
pub struct WarpProfile {
    a: JetFn,
    b: JetFn,
    label: CaseLabel,
    /// Smallest `t` at which the evaluators may be called.
    t_min: f64,
}

impl fmt::Debug for WarpProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpProfile").field("label", &self.label).field("t_min", &self.t_min).finish_non_exhaustive()
    }
}

impl WarpProfile {
    /// A user-supplied profile defined for `t ≥ t_min`. The supplied
    /// derivatives are checked against central differences on `check_grid`.
    pub fn custom<A, B>(a: A, b: B, t_min: f64, check_grid: &[f64]) -> Result<Self, BundleError>
    where
        A: Fn(f64) -> Jet + Send + Sync + 'static,
        B: Fn(f64) -> Jet + Send + Sync + 'static,
    {
        let profile = Self { a: Arc::new(a), b: Arc::new(b), label: CaseLabel::Custom, t_min };
        profile.check_derivatives(check_grid)?;
        for &t in check_grid {
            profile.positive_at(t)?;
        }
        Ok(profile)
    }

    pub fn label(&self) -> CaseLabel {
        self.label
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn a(&self, t: f64) -> Jet {
        (self.a)(t)
    }

    pub fn b(&self, t: f64) -> Jet {
        (self.b)(t)
    }

    /// Relative 1e−6 agreement of supplied and finite-difference derivatives.
    pub fn check_derivatives(&self, grid: &[f64]) -> Result<(), BundleError> {
        let step = 1e-4;
        let ts: Vec<f64> = grid.iter().map(|&t| t.max(self.t_min + 2.0 * step)).collect();
        let worst =
            derivative_mismatch(self.a.as_ref(), &ts, step).max(derivative_mismatch(self.b.as_ref(), &ts, step));
        if worst > 1e-6 {
            return Err(BundleError::InconsistentDerivatives(worst));
        }
        Ok(())
    }

    fn positive_at(&self, t: f64) -> Result<(Jet, Jet), BundleError> {
        let (a, b) = (self.a(t), self.b(t));
        if !(a.value > 0.0) || !(b.value > 0.0) {
            return Err(BundleError::Domain(format!(
                "warping functions must be positive: a({t}) = {}, b({t}) = {}",
                a.value, b.value
            )));
        }
        Ok((a, b))
    }
}

pub type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Base manifold data: scalar curvature `R_h`, pointwise `|Ω|_h` and its
/// supremum `Ω_∞`, plus the base points used when sampling.
#[derive(Clone)]
pub struct BaseGeometry {
    base_dim: usize,
    scalar_h: PointFn,
    omega_norm: PointFn,
    omega_sup: f64,
    samples: Vec<Vec<f64>>,
}

impl fmt::Debug for BaseGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BaseGeometry")
            .field("base_dim", &self.base_dim)
            .field("omega_sup", &self.omega_sup)
            .field("samples", &self.samples.len())
            .finish_non_exhaustive()
    }
}

impl BaseGeometry {
    /// Validates the invariants at every sample point.
    pub fn new<R, W>(
        base_dim: usize,
        scalar_h: R,
        omega_norm: W,
        omega_sup: f64,
        samples: Vec<Vec<f64>>,
    ) -> Result<Self, BundleError>
    where
        R: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        W: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if !(omega_sup >= 0.0 && omega_sup.is_finite()) {
            return Err(BundleError::InvalidBase(format!("Ω_∞ = {omega_sup} must be finite and ≥ 0")));
        }
        if samples.is_empty() {
            return Err(BundleError::InvalidBase("at least one sample point is required".into()));
        }
        let base =
            Self { base_dim, scalar_h: Arc::new(scalar_h), omega_norm: Arc::new(omega_norm), omega_sup, samples };
        if base_dim <= 1 && omega_sup != 0.0 {
            return Err(BundleError::InvalidBase("bases of dimension ≤ 1 carry no curvature form".into()));
        }
        for p in &base.samples {
            if p.len() != base_dim {
                return Err(BundleError::InconsistentDimensions(format!(
                    "sample {p:?} in a base of dimension {base_dim}"
                )));
            }
            let r = base.scalar_h(p);
            let w = base.omega_norm(p);
            if r < 0.0 {
                return Err(BundleError::InvalidBase(format!("R_h = {r} < 0 at {p:?}")));
            }
            if base_dim <= 1 && r != 0.0 {
                return Err(BundleError::InvalidBase("bases of dimension ≤ 1 are flat".into()));
            }
            if !(w >= 0.0) || w > omega_sup * (1.0 + 1e-12) {
                return Err(BundleError::InvalidBase(format!("|Ω| = {w} outside [0, Ω_∞] at {p:?}")));
            }
        }
        Ok(base)
    }

    /// Flat base of the given dimension with zero curvature form.
    pub fn flat(base_dim: usize) -> Self {
        Self::new(base_dim, |_| 0.0, |_| 0.0, 0.0, vec![vec![0.0; base_dim]]).expect("flat base is valid")
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn total_dim(&self) -> usize {
        self.base_dim + 2
    }

    pub fn scalar_h(&self, p: &[f64]) -> f64 {
        (self.scalar_h)(p)
    }

    pub fn omega_norm(&self, p: &[f64]) -> f64 {
        (self.omega_norm)(p)
    }

    pub fn omega_sup(&self) -> f64 {
        self.omega_sup
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }
}

/// Closed-form scalar curvature of `ḡ`:
///
/// ```text
/// R = R_h/b² − a²|Ω|²/(4b⁴) − 2a″/a − 2(n−2)b″/b − 2(n−2)(a′/a)(b′/b) − (n−2)(n−3)(b′/b)²
/// ```
pub fn scalar_closed_form(
    profile: &WarpProfile,
    n: usize,
    t: f64,
    r_h: f64,
    omega_norm: f64,
) -> Result<f64, BundleError> {
    if n < 2 {
        return Err(BundleError::Domain(format!("total dimension {n} < 2")));
    }
    if t < 0.0 || t < profile.t_min {
        return Err(BundleError::Domain(format!("t = {t} outside the profile domain")));
    }
    if r_h < 0.0 || omega_norm < 0.0 {
        return Err(BundleError::Domain(format!("R_h = {r_h} and |Ω| = {omega_norm} must be ≥ 0")));
    }
    let (a, b) = profile.positive_at(t)?;
    Ok(scalar_from_jets(a, b, n, r_h, omega_norm))
}

/// The same formula as [`scalar_closed_form`] on raw jets, without checks.
pub fn scalar_from_jets(a: Jet, b: Jet, n: usize, r_h: f64, omega_norm: f64) -> f64 {
    let k = (n - 2) as f64;
    let (la, lb) = (a.d1 / a.value, b.d1 / b.value);
    let b2 = b.value * b.value;
    r_h / b2
        - a.value * a.value / (4.0 * b2 * b2) * omega_norm * omega_norm
        - 2.0 * a.d2 / a.value
        - 2.0 * k * b.d2 / b.value
        - 2.0 * k * la * lb
        - k * (k - 1.0) * lb * lb
}

fn half_root_profile() -> JetFn {
    // a(t) = 1 + √(1+t)
    Arc::new(|t: f64| {
        let s = (1.0 + t).sqrt();
        Jet::new(1.0 + s, 0.5 / s, -0.25 / (s * s * s))
    })
}

/// The warping profile used in total dimension `n`.
///
/// * `n = 2, 3`: `a = 1 + √(1+t)`, `b ≡ 1`; `coeff` is unused.
/// * `n = 4`: `b = (1+t)^{3/5}`, `a ≡ coeff`.
/// * `n = 5`: `b = (1+t)^{2/5}`, `a = coeff·(1+t)^{−2/5}`.
/// * `n ≥ 6`: `b = (1+t)^{2/(n−1)}`, `a = coeff·(1+t)^{−(n−5)/(n−1)}`.
pub fn case_profile(n: usize, coeff: f64) -> Result<WarpProfile, BundleError> {
    let label = CaseLabel::for_dimension(n)?;
    if n >= 4 && !(coeff > 0.0 && coeff.is_finite()) {
        return Err(BundleError::Domain(format!("coefficient {coeff} must be positive")));
    }
    let (a, b): (JetFn, JetFn) = match label {
        CaseLabel::N2 | CaseLabel::N3 => (half_root_profile(), Arc::new(|_| Jet::constant(1.0))),
        CaseLabel::N4 => (Arc::new(move |_| Jet::constant(coeff)), Arc::new(|t| Jet::power_of_shifted(1.0, 0.6, t))),
        CaseLabel::N5 => {
            (Arc::new(move |t| Jet::power_of_shifted(coeff, -0.4, t)), Arc::new(|t| Jet::power_of_shifted(1.0, 0.4, t)))
        }
        CaseLabel::NGe6 => {
            let m = (n - 1) as f64;
            let pa = -((n - 5) as f64) / m;
            let pb = 2.0 / m;
            (
                Arc::new(move |t| Jet::power_of_shifted(coeff, pa, t)),
                Arc::new(move |t| Jet::power_of_shifted(1.0, pb, t)),
            )
        }
        CaseLabel::Custom => unreachable!(),
    };
    Ok(WarpProfile { a, b, label, t_min: -0.5 })
}

/// Lower bound for `R̄` obtained by discarding `R_h/b²` and bounding
/// `|Ω| ≤ Ω_∞`. For `n ∈ {2, 3}` the exact curvature is returned.
pub fn case_lower_bound(n: usize, coeff: f64, omega_sup: f64, t: f64) -> Result<f64, BundleError> {
    if t < 0.0 {
        return Err(BundleError::Domain(format!("t = {t} < 0")));
    }
    let u = 1.0 + t;
    let penalty = coeff * coeff * omega_sup * omega_sup / 4.0;
    Ok(match CaseLabel::for_dimension(n)? {
        CaseLabel::N2 | CaseLabel::N3 => {
            let s = u.sqrt();
            1.0 / (2.0 * u * s * (1.0 + s))
        }
        CaseLabel::N4 => 6.0 / 25.0 / (u * u) - penalty * u.powf(-2.4),
        CaseLabel::N5 => 8.0 / 25.0 / (u * u) - penalty * u.powf(-2.4),
        CaseLabel::NGe6 => (ge6_positive_coefficient(n) - penalty) / (u * u),
        CaseLabel::Custom => unreachable!(),
    })
}

/// `4(n−5)/(n−1)²`, the positive `(1+t)^{−2}` coefficient for `n ≥ 6`.
pub fn ge6_positive_coefficient(n: usize) -> f64 {
    let m = (n - 1) as f64;
    4.0 * (n as f64 - 5.0) / (m * m)
}

/// Open upper bound on the free coefficient of the case profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Threshold {
    Bounded(f64),
    Unbounded,
}

impl Threshold {
    pub fn admits(self, coeff: f64) -> bool {
        match self {
            Self::Bounded(v) => coeff < v,
            Self::Unbounded => true,
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Self::Bounded(v) => Some(v),
            Self::Unbounded => None,
        }
    }
}

/// Largest coefficient for which the lower bound stays positive.
pub fn threshold(n: usize, omega_sup: f64) -> Result<Threshold, BundleError> {
    if !(omega_sup >= 0.0) {
        return Err(BundleError::Domain(format!("Ω_∞ = {omega_sup} < 0")));
    }
    let numerator = match CaseLabel::for_dimension(n)? {
        CaseLabel::N2 | CaseLabel::N3 => return Err(BundleError::NoThreshold { n }),
        CaseLabel::N4 => 2.0 * 6f64.sqrt() / 5.0,
        CaseLabel::N5 => 4.0 * 2f64.sqrt() / 5.0,
        _ => 4.0 * (n as f64 - 5.0).sqrt() / (n - 1) as f64,
    };
    if omega_sup == 0.0 {
        Ok(Threshold::Unbounded)
    } else {
        Ok(Threshold::Bounded(numerator / omega_sup))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum Verdict {
    Positive,
    /// The closed-form curvature itself is ≤ 0 at this `t`.
    FailsAt {
        t: f64,
    },
    /// The lower bound fails but no negative curvature was sampled.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityCertificate {
    pub case: CaseLabel,
    pub params: BTreeMap<String, f64>,
    pub verdict: Verdict,
    /// Minimum of the lower bound over the grid.
    pub min_lower_bound: f64,
    /// First grid point where the lower bound is ≤ 0, if any.
    pub bound_fails_at: Option<f64>,
    /// Minimum of the closed-form curvature over grid × base samples.
    pub min_sampled_scalar: f64,
    pub tail_certified: bool,
    pub grid_spec: String,
}

/// Checks positivity beyond `t_max` from the exact power laws of the bound.
fn tail_argument(n: usize, coeff: f64, omega_sup: f64, t_max: f64) -> (bool, String) {
    let penalty = coeff * coeff * omega_sup * omega_sup / 4.0;
    match n {
        2 | 3 => (true, "exact curvature 1/(2u^{3/2}(1+√u)) > 0 for all u = 1+t".into()),
        4 | 5 => {
            let lead = if n == 4 { 6.0 / 25.0 } else { 8.0 / 25.0 };
            // u^{-2}(lead − penalty·u^{-2/5}) is positive for all u ≥ 1+t_max
            // once it is positive at u = 1+t_max.
            let at_edge = lead - penalty * (1.0 + t_max).powf(-0.4);
            (
                at_edge > 0.0,
                format!(
                    "u^-2 term ({lead:.6}) dominates u^-12/5 term ({penalty:.6e}) for u >= {:.6}: margin {at_edge:.6e}",
                    1.0 + t_max
                ),
            )
        }
        _ => {
            let c = ge6_positive_coefficient(n) - penalty;
            (c > 0.0, format!("bound is exactly {c:.6e}·u^-2 for all t"))
        }
    }
}

/// Certifies `R̄ > 0` for all `t ≥ 0` in total dimension `n`.
pub fn certify(
    n: usize,
    coeff: f64,
    base: &BaseGeometry,
    t_max: f64,
    grid_points: usize,
) -> Result<PositivityCertificate, BundleError> {
    if base.total_dim() != n {
        return Err(BundleError::InconsistentDimensions(format!(
            "base of dimension {} cannot carry a total space of dimension {n}",
            base.base_dim()
        )));
    }
    if !(t_max > 0.0) || grid_points < 2 {
        return Err(BundleError::Domain(format!("grid [0, {t_max}] with {grid_points} points")));
    }
    let profile = case_profile(n, coeff)?;
    let omega_sup = base.omega_sup();
    let ts: Vec<f64> = (0..grid_points).map(|i| t_max * i as f64 / (grid_points - 1) as f64).collect();

    let bounds: Vec<f64> =
        ts.par_iter().map(|&t| case_lower_bound(n, coeff, omega_sup, t)).collect::<Result<_, _>>()?;
    let min_lower_bound = bounds.iter().copied().fold(f64::INFINITY, f64::min);
    let bound_fails_at = ts.iter().zip(&bounds).find(|(_, &b)| b <= 0.0).map(|(&t, _)| t);

    let sampled: Vec<f64> = ts
        .par_iter()
        .map(|&t| {
            base.samples()
                .iter()
                .map(|p| scalar_closed_form(&profile, n, t, base.scalar_h(p), base.omega_norm(p)))
                .try_fold(f64::INFINITY, |acc, r| r.map(|r| acc.min(r)))
        })
        .collect::<Result<_, _>>()?;
    let min_sampled_scalar = sampled.iter().copied().fold(f64::INFINITY, f64::min);

    let (tail_certified, tail_note) = tail_argument(n, coeff, omega_sup, t_max);
    let verdict = if bound_fails_at.is_none() && tail_certified {
        Verdict::Positive
    } else if let Some((&t, _)) = ts.iter().zip(&sampled).find(|(_, &r)| r <= 0.0) {
        Verdict::FailsAt { t }
    } else {
        Verdict::Inconclusive
    };

    let mut params = BTreeMap::new();
    params.insert("n".to_string(), n as f64);
    params.insert("coeff".to_string(), coeff);
    params.insert("omega_sup".to_string(), omega_sup);
    params.insert("t_max".to_string(), t_max);
    Ok(PositivityCertificate {
        case: profile.label(),
        params,
        verdict,
        min_lower_bound,
        bound_fails_at,
        min_sampled_scalar,
        tail_certified,
        grid_spec: format!(
            "uniform t-grid on [0, {t_max}] with {grid_points} points x {} base samples; tail: {tail_note}",
            base.samples().len()
        ),
    })
}
