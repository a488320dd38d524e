use serde::{Deserialize, Serialize};

/// Value of a one-variable function together with its first two derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const fn new(value: f64, d1: f64, d2: f64) -> Self {
        Self { value, d1, d2 }
    }

    pub const fn constant(value: f64) -> Self {
        Self::new(value, 0.0, 0.0)
    }

    /// Jet of `c · (1+t)^p`.
    pub fn power_of_shifted(c: f64, p: f64, t: f64) -> Self {
        let u = 1.0 + t;
        Self::new(c * u.powf(p), c * p * u.powf(p - 1.0), c * p * (p - 1.0) * u.powf(p - 2.0))
    }

    pub fn scale(self, c: f64) -> Self {
        Self::new(c * self.value, c * self.d1, c * self.d2)
    }
}

/// Shared reentrant evaluator `t ↦ (f, f′, f″)`.
pub type JetFn = std::sync::Arc<dyn Fn(f64) -> Jet + Send + Sync>;

/// Compares supplied derivatives against Richardson-extrapolated central
/// differences of the values (steps `h` and `2h`).
///
/// Returns the worst scaled discrepancy
/// `|fd − supplied| / max(1, |f|, |supplied|)` over the sample points.
pub fn derivative_mismatch(f: &(dyn Fn(f64) -> Jet + Send + Sync), ts: &[f64], step: f64) -> f64 {
    let mut worst = 0.0f64;
    for &t in ts {
        let c = f(t);
        let (p1, m1) = (f(t + step).value, f(t - step).value);
        let (p2, m2) = (f(t + 2.0 * step).value, f(t - 2.0 * step).value);
        let d1_h = (p1 - m1) / (2.0 * step);
        let d1_2h = (p2 - m2) / (4.0 * step);
        let d2_h = (p1 - 2.0 * c.value + m1) / (step * step);
        let d2_2h = (p2 - 2.0 * c.value + m2) / (4.0 * step * step);
        let fd1 = (4.0 * d1_h - d1_2h) / 3.0;
        let fd2 = (4.0 * d2_h - d2_2h) / 3.0;
        let scale1 = 1f64.max(c.value.abs()).max(c.d1.abs());
        let scale2 = 1f64.max(c.value.abs()).max(c.d2.abs());
        worst = worst.max((fd1 - c.d1).abs() / scale1).max((fd2 - c.d2).abs() / scale2);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_jet_matches_finite_differences() {
        let f = |t: f64| Jet::power_of_shifted(0.7, -0.4, t);
        let ts: Vec<f64> = (0..50).map(|i| i as f64 * 0.37).collect();
        assert!(derivative_mismatch(&f, &ts, 1e-4) < 1e-6);
    }

    #[test]
    fn mismatch_detects_wrong_derivative() {
        let f = |t: f64| Jet::new(t * t, 2.0 * t, 3.0);
        assert!(derivative_mismatch(&f, &[1.0], 1e-4) > 0.1);
    }
}
