//! Natural cubic spline through sampled values, used for tabulated warp
//! factors.

use serde::{Deserialize, Serialize};

use crate::jet::Jet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the knots.
    moments: Vec<f64>,
}

impl CubicSpline {
    /// Natural spline (zero end moments). Knots must be strictly increasing
    /// and at least three.
    pub fn natural(knots: Vec<f64>, values: Vec<f64>) -> Result<Self, String> {
        let n = knots.len();
        if n < 3 || values.len() != n {
            return Err(format!("need ≥ 3 knots with matching values, got {n} and {}", values.len()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err("knots must be strictly increasing".into());
        }
        if values.iter().chain(&knots).any(|v| !v.is_finite()) {
            return Err("knots and values must be finite".into());
        }
        // Tridiagonal system for interior moments (Thomas algorithm).
        let m = n - 2;
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        for i in 0..m {
            let h0 = knots[i + 1] - knots[i];
            let h1 = knots[i + 2] - knots[i + 1];
            diag[i] = 2.0 * (h0 + h1);
            upper[i] = h1;
            rhs[i] = 6.0 * ((values[i + 2] - values[i + 1]) / h1 - (values[i + 1] - values[i]) / h0);
        }
        for i in 1..m {
            let lower = knots[i + 1] - knots[i];
            let w = lower / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut interior = vec![0.0; m];
        for i in (0..m).rev() {
            let next = if i + 1 < m { interior[i + 1] } else { 0.0 };
            interior[i] = (rhs[i] - upper[i] * next) / diag[i];
        }
        let mut moments = vec![0.0; n];
        moments[1..n - 1].copy_from_slice(&interior);
        Ok(Self { knots, values, moments })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    /// Value and derivatives; outside the knot range the end cubic is
    /// extended.
    pub fn eval(&self, t: f64) -> Jet {
        let n = self.knots.len();
        let i = match self.knots.partition_point(|&k| k <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        let h = x1 - x0;
        let (a, b) = ((x1 - t) / h, (t - x0) / h);
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h - (3.0 * a * a - 1.0) * h / 6.0 * m0 + (3.0 * b * b - 1.0) * h / 6.0 * m1;
        let d2 = a * m0 + b * m1;
        Jet::new(value, d1, d2)
    }
}
