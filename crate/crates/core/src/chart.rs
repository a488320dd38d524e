//! Finite-difference curvature of coordinate-chart metrics.
//!
//! Christoffel symbols come from second-order central differences of the
//! metric components, the Riemann tensor from central differences of the
//! Christoffel symbols. The sign convention gives the unit round 2-sphere
//! scalar curvature `+2`, so that `∫ R dA = 4πχ` on closed surfaces.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

/// Default finite-difference step for O(1)-scaled charts.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Largest accepted condition number of a metric matrix.
pub const MAX_CONDITION: f64 = 1e12;

const SYMMETRY_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurvatureError {
    #[error("degenerate metric at {point:?}: {reason}")]
    DegenerateMetric { point: Vec<f64>, reason: String },
    #[error("metric components not symmetric at {point:?} (asymmetry {asymmetry:e})")]
    NotSymmetric { point: Vec<f64>, asymmetry: f64 },
    #[error("stencil around {point:?} with reach {reach:e} leaves the chart domain")]
    OutsideDomain { point: Vec<f64>, reach: f64 },
    #[error("point has {got} coordinates, chart has dimension {dim}")]
    WrongDimension { dim: usize, got: usize },
    #[error("unreliable step {step:e}: successive differences {coarse:e} then {fine:e}")]
    UnreliableStep { step: f64, coarse: f64, fine: f64 },
    #[error("invalid step {0}")]
    InvalidStep(f64),
}

pub type MetricFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// A coordinate chart carrying a Riemannian metric.
#[derive(Clone)]
pub struct ChartMetric {
    dim: usize,
    components: MetricFn,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl fmt::Debug for ChartMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartMetric")
            .field("dim", &self.dim)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .finish_non_exhaustive()
    }
}

impl ChartMetric {
    /// Chart valid on all of `R^dim`.
    pub fn new<F>(dim: usize, components: F) -> Self
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self {
            dim,
            components: Arc::new(components),
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    /// Restricts the chart to the coordinate box `lower ≤ x ≤ upper`.
    pub fn with_domain(mut self, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), self.dim);
        assert_eq!(upper.len(), self.dim);
        self.lower = lower;
        self.upper = upper;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> (&[f64], &[f64]) {
        (&self.lower, &self.upper)
    }

    /// Raw metric components at `p`, without validation.
    pub fn components(&self, p: &[f64]) -> DMatrix<f64> {
        (self.components)(p)
    }

    /// Metric `c² g` on the same chart.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.components.clone();
        let c2 = c * c;
        Self {
            dim: self.dim,
            components: Arc::new(move |p| inner(p) * c2),
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        }
    }

    /// Block-diagonal product of two charts; coordinates are concatenated.
    pub fn product(&self, other: &ChartMetric) -> Self {
        let (a, b) = (self.components.clone(), other.components.clone());
        let (da, db) = (self.dim, other.dim);
        let mut lower = self.lower.clone();
        lower.extend_from_slice(&other.lower);
        let mut upper = self.upper.clone();
        upper.extend_from_slice(&other.upper);
        Self {
            dim: da + db,
            components: Arc::new(move |p| {
                let mut g = DMatrix::zeros(da + db, da + db);
                g.view_mut((0, 0), (da, da)).copy_from(&a(&p[..da]));
                g.view_mut((da, da), (db, db)).copy_from(&b(&p[da..]));
                g
            }),
            lower,
            upper,
        }
    }

    fn check_point(&self, p: &[f64], reach: f64) -> Result<(), CurvatureError> {
        if p.len() != self.dim {
            return Err(CurvatureError::WrongDimension { dim: self.dim, got: p.len() });
        }
        let inside =
            p.iter().zip(self.lower.iter().zip(&self.upper)).all(|(&x, (&lo, &hi))| x - reach >= lo && x + reach <= hi);
        if inside {
            Ok(())
        } else {
            Err(CurvatureError::OutsideDomain { point: p.to_vec(), reach })
        }
    }

    /// Metric and its inverse at `p`, after symmetry and conditioning checks.
    fn metric_and_inverse(&self, p: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>), CurvatureError> {
        let g = self.components(p);
        let scale = g.amax().max(1.0);
        let asymmetry = (&g - g.transpose()).amax();
        if asymmetry > SYMMETRY_TOL * scale {
            return Err(CurvatureError::NotSymmetric { point: p.to_vec(), asymmetry });
        }
        let eig = SymmetricEigen::new(g.clone());
        let lo = eig.eigenvalues.min();
        let hi = eig.eigenvalues.max();
        if !(lo > 0.0) {
            return Err(CurvatureError::DegenerateMetric {
                point: p.to_vec(),
                reason: format!("smallest eigenvalue {lo:e}"),
            });
        }
        if hi / lo > MAX_CONDITION {
            return Err(CurvatureError::DegenerateMetric {
                point: p.to_vec(),
                reason: format!("condition number {:e}", hi / lo),
            });
        }
        let inv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| CurvatureError::DegenerateMetric { point: p.to_vec(), reason: "inversion failed".into() })?;
        Ok((g, inv))
    }

    fn christoffel_unchecked(&self, p: &[f64], step: f64) -> Result<Christoffel, CurvatureError> {
        let n = self.dim;
        let (_, ginv) = self.metric_and_inverse(p)?;
        // dg[l][(i, j)] = ∂_l g_ij
        let mut dg = Vec::with_capacity(n);
        let mut q = p.to_vec();
        for l in 0..n {
            q[l] = p[l] + step;
            let (gp, _) = self.metric_and_inverse(&q)?;
            q[l] = p[l] - step;
            let (gm, _) = self.metric_and_inverse(&q)?;
            q[l] = p[l];
            dg.push((gp - gm) / (2.0 * step));
        }
        let mut out = Christoffel::zeros(n);
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                    }
                    out.set(k, i, j, 0.5 * s);
                    out.set(k, j, i, 0.5 * s);
                }
            }
        }
        Ok(out)
    }

    fn ricci_and_scalar(&self, p: &[f64], step: f64) -> Result<(DMatrix<f64>, f64), CurvatureError> {
        let n = self.dim;
        let gamma = self.christoffel_unchecked(p, step)?;
        let (_, ginv) = self.metric_and_inverse(p)?;
        // dgamma[m] = ∂_m Γ
        let mut dgamma = Vec::with_capacity(n);
        let mut q = p.to_vec();
        for m in 0..n {
            q[m] = p[m] + step;
            let gp = self.christoffel_unchecked(&q, step)?;
            q[m] = p[m] - step;
            let gm = self.christoffel_unchecked(&q, step)?;
            q[m] = p[m];
            dgamma.push(gp.sub_scaled(&gm, 1.0 / (2.0 * step)));
        }
        // R_ij = ∂_k Γ^k_ij − ∂_j Γ^k_ik + Γ^k_kl Γ^l_ij − Γ^k_jl Γ^l_ik
        let mut ricci = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += dgamma[k].get(k, i, j) - dgamma[j].get(k, i, k);
                    for l in 0..n {
                        s += gamma.get(k, k, l) * gamma.get(l, i, j) - gamma.get(k, j, l) * gamma.get(l, i, k);
                    }
                }
                ricci[(i, j)] = s;
            }
        }
        let scalar = ginv.component_mul(&ricci).sum();
        Ok((ricci, scalar))
    }
}

/// Christoffel symbols of the second kind, indexed `Γ^k_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        self.data[(k * self.dim + i) * self.dim + j] = v;
    }

    fn sub_scaled(&self, other: &Self, c: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| (a - b) * c).collect() }
    }

    /// Largest `|Γ^k_ij − Γ^k_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        worst
    }
}

/// Scalar and Ricci curvature at a point, with a Richardson error estimate.
#[derive(Clone, Debug)]
pub struct CurvatureReport {
    pub point: Vec<f64>,
    pub scalar: f64,
    pub ricci: DMatrix<f64>,
    pub step: f64,
    pub estimated_error: f64,
}

impl CurvatureReport {
    pub fn ricci_asymmetry(&self) -> f64 {
        (&self.ricci - self.ricci.transpose()).amax()
    }
}

/// Christoffel symbols `Γ^k_ij` at `point` by central differences.
pub fn christoffel(metric: &ChartMetric, point: &[f64], step: f64) -> Result<Christoffel, CurvatureError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(CurvatureError::InvalidStep(step));
    }
    metric.check_point(point, step)?;
    metric.christoffel_unchecked(point, step)
}

/// Scalar curvature at `point`.
///
/// The reported value uses `step`; the error estimate compares steps `h`,
/// `h/2` and `h/4`. If the difference between the coarse pair is above the
/// roundoff floor and refining does not shrink it at least twofold, the step
/// is rejected.
pub fn scalar_curvature(metric: &ChartMetric, point: &[f64], step: f64) -> Result<CurvatureReport, CurvatureError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(CurvatureError::InvalidStep(step));
    }
    metric.check_point(point, 2.0 * step)?;
    let (ricci, r1) = metric.ricci_and_scalar(point, step)?;
    let (_, r2) = metric.ricci_and_scalar(point, 0.5 * step)?;
    let (_, r4) = metric.ricci_and_scalar(point, 0.25 * step)?;
    let coarse = (r1 - r2).abs();
    let fine = (r2 - r4).abs();
    let floor = 1e-6 * (1.0 + r1.abs());
    if coarse > floor && fine * 2.0 > coarse {
        return Err(CurvatureError::UnreliableStep { step, coarse, fine });
    }
    Ok(CurvatureReport { point: point.to_vec(), scalar: r1, ricci, step, estimated_error: coarse * 4.0 / 3.0 })
}
