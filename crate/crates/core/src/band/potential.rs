use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::BandError;

/// Parameters of the tangent potential
/// `h(d) = (1+ε″)(n−1)π/(nL) · tan(πd/(2L))` on `(−L, L)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialParams {
    pub half_length: f64,
    pub eps2: f64,
    pub dim_n: u32,
}

impl PotentialParams {
    pub fn new(half_length: f64, eps2: f64, dim_n: u32) -> Result<Self, BandError> {
        let p = Self { half_length, eps2, dim_n };
        p.validate()?;
        Ok(p)
    }

    /// Three-dimensional potential `(1+ε″)2π/(3L) · tan(πd/(2L))`.
    pub fn three_dim(half_length: f64, eps2: f64) -> Result<Self, BandError> {
        Self::new(half_length, eps2, 3)
    }

    pub fn validate(&self) -> Result<(), BandError> {
        if !(self.half_length > 0.0 && self.half_length.is_finite()) {
            return Err(BandError::Domain(format!("L = {} must be positive", self.half_length)));
        }
        if !(self.eps2 >= 0.0 && self.eps2.is_finite()) {
            return Err(BandError::Domain(format!("ε″ = {} must be ≥ 0", self.eps2)));
        }
        if self.dim_n < 2 {
            return Err(BandError::Domain(format!("dimension {} < 2", self.dim_n)));
        }
        Ok(())
    }

    /// `(1+ε″)(n−1)π/(nL)`.
    pub fn prefactor(&self) -> f64 {
        let n = self.dim_n as f64;
        (1.0 + self.eps2) * (n - 1.0) * PI / (n * self.half_length)
    }

    fn angle(&self, d: f64) -> f64 {
        PI * d / (2.0 * self.half_length)
    }

    fn check(&self, d: f64) -> Result<(), BandError> {
        if !(d.abs() < self.half_length) {
            return Err(BandError::Domain(format!("|d| = {} must be below L = {}", d.abs(), self.half_length)));
        }
        Ok(())
    }
}

pub fn potential(d: f64, p: &PotentialParams) -> Result<f64, BandError> {
    p.check(d)?;
    Ok(p.prefactor() * p.angle(d).tan())
}

/// `h′(d) = prefactor · π/(2L) · sec²(πd/(2L))`.
pub fn potential_derivative(d: f64, p: &PotentialParams) -> Result<f64, BandError> {
    p.check(d)?;
    let c = p.angle(d).cos();
    Ok(p.prefactor() * PI / (2.0 * p.half_length) / (c * c))
}

/// `count` equally spaced points strictly inside `(−L, L)`.
pub fn open_grid(half_length: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|i| -half_length + 2.0 * half_length * i as f64 / (count + 1) as f64).collect()
}

/// Worst value over `grid` of
/// `(3/2)h² − 2(1+ε″)|h′| + 2(1+ε″)²π²/(3L²)`, i.e. the pointwise bound with
/// the gradient of the distance function at its extreme `1+ε″`.
///
/// Near `±L` the two leading terms are each of order `tan²`, so the sum is
/// accumulated in double-double arithmetic; `sec²` is taken as `1 + tan²`.
pub fn potential_bound_check(p: &PotentialParams, grid: &[f64]) -> Result<f64, BandError> {
    p.validate()?;
    if p.dim_n != 3 {
        return Err(BandError::Domain(format!("bound check needs n = 3, got {}", p.dim_n)));
    }
    let l = p.half_length;
    let one_eps = Dd::from(1.0).add(Dd::from(p.eps2));
    // prefactor = (1+ε″)·2π/(3L), slope factor π/(2L)
    let prefactor = one_eps.mul(PI_DD).mul_f64(2.0).div_f64(3.0).div_f64(l);
    let slope = PI_DD.div_f64(2.0).div_f64(l);
    let square_coef = prefactor.mul(prefactor).mul_f64(1.5);
    let grad_coef = one_eps.mul_f64(2.0).mul(prefactor).mul(slope);
    let floor = one_eps.mul(one_eps).mul(PI_DD).mul(PI_DD).mul_f64(2.0).div_f64(3.0).div_f64(l).div_f64(l);

    let mut worst = f64::INFINITY;
    for &d in grid {
        p.check(d)?;
        let tan = Dd::from(p.angle(d).tan());
        let tan2 = tan.mul(tan);
        let sec2 = tan2.add(Dd::from(1.0));
        let margin = square_coef.mul(tan2).sub(grad_coef.mul(sec2)).add(floor);
        worst = worst.min(margin.to_f64());
    }
    Ok(worst)
}

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

const PI_DD: Dd = Dd { hi: PI, lo: 1.224_646_799_147_353_2e-16 };

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd { hi: p, lo: a.mul_add(b, -p) }
}

impl From<f64> for Dd {
    fn from(hi: f64) -> Self {
        Self { hi, lo: 0.0 }
    }
}

impl Dd {
    fn add(self, o: Self) -> Self {
        let s = two_sum(self.hi, o.hi);
        let t = two_sum(self.lo, o.lo);
        let v = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(v.hi, v.lo + t.lo)
    }

    fn sub(self, o: Self) -> Self {
        self.add(Dd { hi: -o.hi, lo: -o.lo })
    }

    fn mul(self, o: Self) -> Self {
        let p = two_prod(self.hi, o.hi);
        quick_two_sum(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }

    fn mul_f64(self, b: f64) -> Self {
        self.mul(Dd::from(b))
    }

    fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let p = two_prod(q1, b);
        let r = two_sum(self.hi, -p.hi);
        let rem = r.hi + (r.lo - p.lo + self.lo);
        quick_two_sum(q1, rem / b)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}
