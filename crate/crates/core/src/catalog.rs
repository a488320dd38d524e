//! Concrete circle bundles with explicit connection forms.
//!
//! Every entry supplies a base chart `(N, h)`, the connection components
//! `A_i` of `θ = dφ + A_i dx^i` (fiber coordinate `φ` of period `2π`), and
//! closed-form `R_h`, `|Ω|_h`. The total-space chart has coordinates
//! `(t, φ, x¹, …, x^{n−2})`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bundle::{BaseGeometry, BundleError, WarpProfile};
use crate::chart::ChartMetric;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Bundle(#[from] BundleError),
}

/// Smallest polar angle kept by reference points on spherical charts.
pub const POLE_MARGIN: f64 = 0.3;
/// Coordinate box margin of spherical charts, leaving room for stencils.
const CHART_MARGIN: f64 = 0.2;

type ConnectionFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub struct CatalogEntry {
    name: String,
    base: BaseGeometry,
    connection_desc: String,
    base_metric: ChartMetric,
    connection: ConnectionFn,
    reference_points: Vec<Vec<f64>>,
}

impl fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("name", &self.name)
            .field("base", &self.base)
            .field("connection", &self.connection_desc)
            .finish_non_exhaustive()
    }
}

/// Machine-readable summary of an entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryDescription {
    pub name: String,
    pub total_dim: usize,
    pub base_dim: usize,
    pub omega_sup: f64,
    pub base_scalar: f64,
    pub connection: String,
    pub coordinates: Vec<String>,
}

impl CatalogEntry {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base(&self) -> &BaseGeometry {
        &self.base
    }

    pub fn total_dim(&self) -> usize {
        self.base.total_dim()
    }

    pub fn connection_desc(&self) -> &str {
        &self.connection_desc
    }

    pub fn reference_points(&self) -> &[Vec<f64>] {
        &self.reference_points
    }

    pub fn base_metric(&self) -> &ChartMetric {
        &self.base_metric
    }

    pub fn describe(&self) -> EntryDescription {
        let k = self.base.base_dim();
        let mut coordinates = vec!["t".to_string(), "phi".to_string()];
        coordinates.extend((1..=k).map(|i| format!("x{i}")));
        EntryDescription {
            name: self.name.clone(),
            total_dim: self.total_dim(),
            base_dim: k,
            omega_sup: self.base.omega_sup(),
            base_scalar: self.base.scalar_h(&self.reference_points[0]),
            connection: self.connection_desc.clone(),
            coordinates,
        }
    }

    /// Total-space point `(t, φ, x)`.
    pub fn total_point(t: f64, phi: f64, x: &[f64]) -> Vec<f64> {
        let mut p = Vec::with_capacity(x.len() + 2);
        p.push(t);
        p.push(phi);
        p.extend_from_slice(x);
        p
    }

    /// Chart of `dt² + a²(dφ + A)² + b² h` on `(t, φ, x)`.
    pub fn total_chart(&self, profile: &WarpProfile) -> ChartMetric {
        let k = self.base.base_dim();
        let n = k + 2;
        let base_metric = self.base_metric.clone();
        let connection = self.connection.clone();
        let profile = profile.clone();
        let (blo, bhi) = self.base_metric.domain();
        let mut lower = vec![profile.t_min(), f64::NEG_INFINITY];
        lower.extend_from_slice(blo);
        let mut upper = vec![f64::INFINITY, f64::INFINITY];
        upper.extend_from_slice(bhi);
        ChartMetric::new(n, move |p| {
            let t = p[0];
            let x = &p[2..];
            let a = profile.a(t).value;
            let b = profile.b(t).value;
            let (a2, b2) = (a * a, b * b);
            let h = base_metric.components(x);
            let conn = connection(x);
            let mut g = DMatrix::zeros(n, n);
            g[(0, 0)] = 1.0;
            g[(1, 1)] = a2;
            for i in 0..k {
                g[(1, 2 + i)] = a2 * conn[i];
                g[(2 + i, 1)] = a2 * conn[i];
                for j in 0..k {
                    g[(2 + i, 2 + j)] = a2 * conn[i] * conn[j] + b2 * h[(i, j)];
                }
            }
            g
        })
        .with_domain(lower, upper)
    }

    /// `|Ω|_h` at a base point from central differences of the connection
    /// components, `Ω_ij = ∂_i A_j − ∂_j A_i`.
    pub fn chart_omega_norm(&self, x: &[f64], step: f64) -> f64 {
        let k = self.base.base_dim();
        if k < 2 {
            return 0.0;
        }
        let mut da = vec![vec![0.0; k]; k]; // da[i][j] = ∂_i A_j
        let mut q = x.to_vec();
        for i in 0..k {
            q[i] = x[i] + step;
            let ap = (self.connection)(&q);
            q[i] = x[i] - step;
            let am = (self.connection)(&q);
            q[i] = x[i];
            for j in 0..k {
                da[i][j] = (ap[j] - am[j]) / (2.0 * step);
            }
        }
        let omega = |i: usize, j: usize| da[i][j] - da[j][i];
        let hinv = self.base_metric.components(x).try_inverse().expect("catalog base metrics are nondegenerate");
        let mut s = 0.0;
        for i in 0..k {
            for j in 0..k {
                for a in 0..k {
                    for b in 0..k {
                        s += hinv[(i, a)] * hinv[(j, b)] * omega(i, j) * omega(a, b);
                    }
                }
            }
        }
        (0.5 * s).sqrt()
    }

    /// Length of the fiber circle through `(t, ·, x)`, by the trapezoid rule
    /// over `φ ∈ [0, 2π)`.
    pub fn fiber_length(&self, profile: &WarpProfile, t: f64, x: &[f64]) -> f64 {
        let chart = self.total_chart(profile);
        let samples = 64;
        let dphi = 2.0 * PI / samples as f64;
        (0..samples)
            .map(|i| {
                let p = Self::total_point(t, i as f64 * dphi, x);
                chart.components(&p)[(1, 1)].sqrt() * dphi
            })
            .sum()
    }
}

fn lattice_points(lo: &[f64], hi: &[f64], count: usize) -> Vec<Vec<f64>> {
    // Low-discrepancy (additive recurrence) points in a box.
    let k = lo.len();
    let alphas: Vec<f64> = (0..k).map(|i| ((i + 2) as f64).sqrt().fract()).collect();
    (1..=count).map(|m| (0..k).map(|i| lo[i] + (hi[i] - lo[i]) * (m as f64 * alphas[i]).fract()).collect()).collect()
}

fn diag(v: Vec<f64>) -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(v))
}

/// Heisenberg nilmanifold over the flat torus: `θ = dz − x dy`,
/// `Ω = −dx∧dy`, total dimension 4.
///
/// The lattice `(x, y, z) ~ (x + 2π, y, z + 2πy) ~ (x, y + 1, z) ~ (x, y, z + 2π)`
/// preserves `θ`, so the fiber coordinate `z` has period `2π`.
pub fn heisenberg_entry() -> CatalogEntry {
    let reference_points = lattice_points(&[-1.0, -1.0], &[1.0, 1.0], 16);
    let base = BaseGeometry::new(2, |_| 0.0, |_| 1.0, 1.0, reference_points.clone()).expect("Heisenberg base is valid");
    CatalogEntry {
        name: "heisenberg".into(),
        base,
        connection_desc: "theta = dz - x dy on the flat torus (x, y); Omega = -dx^dy".into(),
        base_metric: ChartMetric::new(2, |_| DMatrix::identity(2, 2)),
        connection: Arc::new(|x: &[f64]| vec![0.0, -x[0]]),
        reference_points,
    }
}

/// Hopf fibration `S³ → S²` over the unit round sphere in polar coordinates
/// `(ϑ, ϕ)`: `θ = dφ + ½ cos ϑ dϕ`, `Ω = −½ sin ϑ dϑ∧dϕ`, `|Ω|_h = ½`.
pub fn hopf_entry() -> CatalogEntry {
    hopf_entry_with_points(lattice_points(&[POLE_MARGIN, 0.0], &[PI - POLE_MARGIN, 2.0 * PI], 16))
        .expect("default Hopf reference points avoid the poles")
}

/// Hopf entry with caller-chosen reference points; points with polar angle
/// outside `[0.3, π − 0.3]` are rejected.
pub fn hopf_entry_with_points(reference_points: Vec<Vec<f64>>) -> Result<CatalogEntry, CatalogError> {
    for p in &reference_points {
        if p.len() != 2 || p[0] < POLE_MARGIN || p[0] > PI - POLE_MARGIN {
            return Err(CatalogError::Domain(format!("reference point {p:?} too close to a pole")));
        }
    }
    let base = BaseGeometry::new(2, |_| 2.0, |_| 0.5, 0.5, reference_points.clone())?;
    Ok(CatalogEntry {
        name: "hopf".into(),
        base,
        connection_desc: "theta = dphi + (1/2) cos(vartheta) dvarphi over the unit round S^2; Omega = -(1/2) sin(vartheta) dvartheta^dvarphi".into(),
        base_metric: sphere_chart(2, 1.0),
        connection: Arc::new(|x: &[f64]| vec![0.0, 0.5 * x[0].cos()]),
        reference_points,
    })
}

/// Round `S^k` of the given radius in hyperspherical coordinates.
fn sphere_chart(k: usize, radius: f64) -> ChartMetric {
    let r2 = radius * radius;
    let mut lower = vec![CHART_MARGIN; k];
    let mut upper = vec![PI - CHART_MARGIN; k];
    lower[k - 1] = f64::NEG_INFINITY;
    upper[k - 1] = f64::INFINITY;
    ChartMetric::new(k, move |x| {
        let mut d = Vec::with_capacity(k);
        let mut w = r2;
        for xi in x.iter().take(k) {
            d.push(w);
            w *= xi.sin().powi(2);
        }
        diag(d)
    })
    .with_domain(lower, upper)
}

/// Product bundle `S¹ × N` with `θ = dφ`. The base is the flat torus
/// `T^{base_dim}` when `base_r = 0`, otherwise the round sphere of scalar
/// curvature `base_r`.
pub fn trivial_entry(base_dim: usize, base_r: f64) -> Result<CatalogEntry, CatalogError> {
    if base_dim > 4 {
        return Err(CatalogError::Domain(format!("base dimension {base_dim} > 4")));
    }
    if !(base_r >= 0.0 && base_r.is_finite()) {
        return Err(CatalogError::Domain(format!("base scalar curvature {base_r} must be ≥ 0")));
    }
    if base_r > 0.0 && base_dim <= 1 {
        return Err(CatalogError::Domain(format!(
            "a base of dimension {base_dim} is flat; R_h = {base_r} is impossible"
        )));
    }
    let (base_metric, reference_points, shape) = if base_r == 0.0 {
        let pts =
            if base_dim == 0 { vec![vec![]] } else { lattice_points(&vec![-1.0; base_dim], &vec![1.0; base_dim], 16) };
        (ChartMetric::new(base_dim, move |_| DMatrix::identity(base_dim, base_dim)), pts, format!("flat T^{base_dim}"))
    } else {
        let k = base_dim as f64;
        let radius = (k * (k - 1.0) / base_r).sqrt();
        let mut lo = vec![POLE_MARGIN; base_dim];
        let mut hi = vec![PI - POLE_MARGIN; base_dim];
        lo[base_dim - 1] = 0.0;
        hi[base_dim - 1] = 2.0 * PI;
        (sphere_chart(base_dim, radius), lattice_points(&lo, &hi, 16), format!("round S^{base_dim} of radius {radius}"))
    };
    let base = BaseGeometry::new(base_dim, move |_| base_r, |_| 0.0, 0.0, reference_points.clone())?;
    Ok(CatalogEntry {
        name: format!("trivial-{base_dim}"),
        base,
        connection_desc: format!("theta = dphi (product bundle) over {shape}"),
        base_metric,
        connection: Arc::new(move |_| vec![0.0; base_dim]),
        reference_points,
    })
}

/// Every entry used by the CLI listing.
pub fn all_entries() -> Vec<CatalogEntry> {
    let mut out = vec![heisenberg_entry(), hopf_entry()];
    for (k, r) in [(0, 0.0), (1, 0.0), (2, 2.0), (3, 6.0), (4, 0.0)] {
        out.push(trivial_entry(k, r).expect("built-in trivial entries are valid"));
    }
    out
}
