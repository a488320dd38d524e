use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::BandError;
use crate::jet::{derivative_mismatch, Jet, JetFn};
use crate::spline::CubicSpline;

/// Named warp-factor families, or tabulated values interpolated by a
/// natural cubic spline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family", deny_unknown_fields)]
pub enum PhiFamily {
    /// `amp`
    Constant { amp: f64 },
    /// `amp · e^{rate·t}`
    Exp { amp: f64, rate: f64 },
    /// `amp · cosh(rate·t)`
    Cosh { amp: f64, rate: f64 },
    /// `amp · cos(rate·(t − shift))`
    Cos { amp: f64, rate: f64, shift: f64 },
    /// `amp · cos(rate·(t − shift))^{2/3}`; on a torus fiber this has
    /// constant scalar curvature `8 rate²/3`.
    CosPower { amp: f64, rate: f64, shift: f64 },
    /// `amp · (1 + rate·t)^{exponent}`
    Power { amp: f64, rate: f64, exponent: f64 },
    /// Spline through `(t, values)`.
    Sampled { t: Vec<f64>, values: Vec<f64> },
}

impl PhiFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::Exp { .. } => "exp",
            Self::Cosh { .. } => "cosh",
            Self::Cos { .. } => "cos",
            Self::CosPower { .. } => "cos_power",
            Self::Power { .. } => "power",
            Self::Sampled { .. } => "sampled",
        }
    }

    /// Evaluator `t ↦ (φ, φ′, φ″)`.
    pub fn evaluator(&self) -> Result<JetFn, BandError> {
        let f: JetFn = match *self {
            Self::Constant { amp } => Arc::new(move |_| Jet::constant(amp)),
            Self::Exp { amp, rate } => Arc::new(move |t| {
                let v = amp * (rate * t).exp();
                Jet::new(v, rate * v, rate * rate * v)
            }),
            Self::Cosh { amp, rate } => Arc::new(move |t| {
                let (c, s) = ((rate * t).cosh(), (rate * t).sinh());
                Jet::new(amp * c, amp * rate * s, amp * rate * rate * c)
            }),
            Self::Cos { amp, rate, shift } => Arc::new(move |t| {
                let (s, c) = (rate * (t - shift)).sin_cos();
                Jet::new(amp * c, -amp * rate * s, -amp * rate * rate * c)
            }),
            Self::CosPower { amp, rate, shift } => Arc::new(move |t| {
                let (s, c) = (rate * (t - shift)).sin_cos();
                let (du, d2u) = (-rate * s, -rate * rate * c);
                let c13 = c.cbrt();
                let v = c13 * c13;
                let d1 = 2.0 / 3.0 * du / c13;
                let d2 = -2.0 / 9.0 * du * du / (c * c13) + 2.0 / 3.0 * d2u / c13;
                Jet::new(amp * v, amp * d1, amp * d2)
            }),
            Self::Power { amp, rate, exponent } => Arc::new(move |t| {
                let v = 1.0 + rate * t;
                Jet::new(
                    amp * v.powf(exponent),
                    amp * exponent * rate * v.powf(exponent - 1.0),
                    amp * exponent * (exponent - 1.0) * rate * rate * v.powf(exponent - 2.0),
                )
            }),
            Self::Sampled { ref t, ref values } => {
                let spline = CubicSpline::natural(t.clone(), values.clone()).map_err(BandError::InvalidModel)?;
                Arc::new(move |s| spline.eval(s))
            }
        };
        Ok(f)
    }
}

/// Serializable description of a band model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSpec {
    pub half_width: f64,
    pub genus: u32,
    pub fiber_area: f64,
    pub phi: PhiFamily,
}

impl BandSpec {
    pub fn build(&self) -> Result<BandModel, BandError> {
        if let PhiFamily::Sampled { t, .. } = &self.phi {
            let (lo, hi) = (t.first().copied().unwrap_or(0.0), t.last().copied().unwrap_or(0.0));
            if lo > -self.half_width || hi < self.half_width {
                return Err(BandError::InvalidModel(format!(
                    "samples cover [{lo}, {hi}], band is [-{0}, {0}]",
                    self.half_width
                )));
            }
        }
        BandModel::new(self.half_width, self.phi.evaluator()?, self.genus, self.fiber_area)
    }
}

/// Warped band `[−T, T] × V`.
#[derive(Clone)]
pub struct BandModel {
    half_width: f64,
    phi: JetFn,
    genus: u32,
    fiber_area: f64,
    fiber_scalar: f64,
}

impl fmt::Debug for BandModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BandModel")
            .field("half_width", &self.half_width)
            .field("genus", &self.genus)
            .field("fiber_area", &self.fiber_area)
            .field("fiber_scalar", &self.fiber_scalar)
            .finish_non_exhaustive()
    }
}

impl BandModel {
    /// Builds the model; `R_V` follows from Gauss–Bonnet,
    /// `R_V · A_V = 8π(1 − g)`.
    pub fn new(half_width: f64, phi: JetFn, genus: u32, fiber_area: f64) -> Result<Self, BandError> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(BandError::InvalidModel(format!("half width {half_width} must be positive")));
        }
        if genus < 1 {
            return Err(BandError::InvalidModel("fiber genus must be at least 1".into()));
        }
        if !(fiber_area > 0.0 && fiber_area.is_finite()) {
            return Err(BandError::InvalidModel(format!("fiber area {fiber_area} must be positive")));
        }
        let samples = 1001;
        let ts: Vec<f64> =
            (0..samples).map(|i| -half_width + 2.0 * half_width * i as f64 / (samples - 1) as f64).collect();
        if let Some(t) = ts.iter().find(|&&t| !(phi(t).value > 0.0)) {
            return Err(BandError::InvalidModel(format!("warp factor not positive at t = {t}")));
        }
        let interior: Vec<f64> = ts[1..samples - 1].iter().step_by(10).copied().collect();
        let worst = derivative_mismatch(phi.as_ref(), &interior, 1e-4f64.min(half_width / 1000.0));
        if worst > 1e-6 {
            return Err(BandError::InvalidModel(format!(
                "warp-factor derivatives disagree with finite differences ({worst:e})"
            )));
        }
        Ok(Self { half_width, phi, genus, fiber_area, fiber_scalar: 8.0 * PI * (1.0 - genus as f64) / fiber_area })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn fiber_area(&self) -> f64 {
        self.fiber_area
    }

    /// Constant scalar curvature `R_V` of the fiber metric.
    pub fn fiber_scalar(&self) -> f64 {
        self.fiber_scalar
    }

    pub fn phi(&self, t: f64) -> Jet {
        (self.phi)(t)
    }

    /// `4π χ(V) = 8π(1 − g)`.
    pub fn euler_total_curvature(&self) -> f64 {
        8.0 * PI * (1.0 - self.genus as f64)
    }

    /// Area of the slice `{t} × V`.
    pub fn slice_area(&self, t: f64) -> f64 {
        let p = self.phi(t).value;
        p * p * self.fiber_area
    }

    /// Scalar curvature `R_V/φ² − 4φ″/φ − 2(φ′/φ)²`.
    pub fn band_scalar(&self, t: f64) -> Result<f64, BandError> {
        if !(t.abs() <= self.half_width) {
            return Err(BandError::Domain(format!("t = {t} outside [-{0}, {0}]", self.half_width)));
        }
        let j = self.phi(t);
        if !(j.value > 0.0) {
            return Err(BandError::Domain(format!("warp factor {} ≤ 0 at t = {t}", j.value)));
        }
        let l = j.d1 / j.value;
        Ok(self.fiber_scalar / (j.value * j.value) - 4.0 * j.d2 / j.value - 2.0 * l * l)
    }

    /// Minimum of the scalar curvature over `[lo, hi]`: dense grid, then
    /// golden-section refinement around the best grid cell.
    pub fn min_scalar_on(&self, lo: f64, hi: f64) -> Result<f64, BandError> {
        let n = 2001;
        let ts: Vec<f64> = (0..n).map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).clamp(lo, hi)).collect();
        let vals: Vec<f64> = ts.iter().map(|&t| self.band_scalar(t)).collect::<Result<_, _>>()?;
        let (imin, &vmin) = vals.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("grid is nonempty");
        let a = ts[imin.saturating_sub(1)];
        let b = ts[(imin + 1).min(n - 1)];
        let (_, refined) = super::solve::golden_section(|t| self.band_scalar(t).unwrap_or(f64::INFINITY), a, b, 1e-12);
        Ok(vmin.min(refined))
    }
}
