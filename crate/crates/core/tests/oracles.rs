use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use psc_core::band::{BandSpec, PhiFamily};
use psc_core::bundle::{case_profile, threshold};
use psc_core::catalog::{heisenberg_entry, CatalogEntry};
use psc_core::chart::{christoffel, scalar_curvature, ChartMetric, DEFAULT_STEP};

/// `dt² + cosh²t · (dx² + dy²)/y²`: a band over a hyperbolic chart with
/// `R_V = −2`.
fn cosh_band_chart() -> ChartMetric {
    ChartMetric::new(3, |p| {
        let w = p[0].cosh().powi(2) / (p[2] * p[2]);
        DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, w, w]))
    })
    .with_domain(vec![-2.0, f64::NEG_INFINITY, 0.1], vec![2.0, f64::INFINITY, f64::INFINITY])
}

#[test]
fn cosh_band_matches_chart_oracle() {
    // Genus 2 over area 4π gives R_V = −2.
    let model =
        BandSpec { half_width: 1.5, genus: 2, fiber_area: 4.0 * PI, phi: PhiFamily::Cosh { amp: 1.0, rate: 1.0 } }
            .build()
            .unwrap();
    assert!((model.fiber_scalar() + 2.0).abs() < 1e-14);
    let chart = cosh_band_chart();
    for t in [-1.4, -0.6, 0.0, 0.3, 1.1, 1.5] {
        let oracle = scalar_curvature(&chart, &[t, 0.2, 1.3], DEFAULT_STEP).unwrap().scalar;
        let ours = model.band_scalar(t).unwrap();
        assert!((oracle - ours).abs() <= 1e-5 * ours.abs().max(1.0), "t={t}: {ours} vs {oracle}");
    }
}

/// RK4 for the geodesic equation in a chart.
fn shoot(chart: &ChartMetric, x0: &[f64], v0: &[f64], length: f64, steps: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let rhs = |x: &[f64], v: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let g = christoffel(chart, x, 1e-5).unwrap();
        let acc = (0..n)
            .map(|k| -(0..n).map(|i| (0..n).map(|j| g.get(k, i, j) * v[i] * v[j]).sum::<f64>()).sum::<f64>())
            .collect();
        (v.to_vec(), acc)
    };
    let h = length / steps as f64;
    let (mut x, mut v) = (x0.to_vec(), v0.to_vec());
    let mut arclength = 0.0;
    let add = |a: &[f64], b: &[f64], s: f64| a.iter().zip(b).map(|(p, q)| p + s * q).collect::<Vec<_>>();
    for _ in 0..steps {
        let (k1x, k1v) = rhs(&x, &v);
        let (k2x, k2v) = rhs(&add(&x, &k1x, h / 2.0), &add(&v, &k1v, h / 2.0));
        let (k3x, k3v) = rhs(&add(&x, &k2x, h / 2.0), &add(&v, &k2v, h / 2.0));
        let (k4x, k4v) = rhs(&add(&x, &k3x, h), &add(&v, &k3v, h));
        for i in 0..n {
            x[i] += h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            v[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        let g = chart.components(&x);
        arclength += h * (DVector::from_vec(v.clone()).transpose() * &g * DVector::from_vec(v.clone()))[(0, 0)].sqrt();
    }
    (x, arclength)
}

#[test]
fn slice_distance_is_the_coordinate_width() {
    // The normal geodesic from the middle slice stays at fixed fiber
    // coordinates and reaches t = T after arclength T.
    let chart = cosh_band_chart();
    let (x, len) = shoot(&chart, &[0.0, 0.2, 1.3], &[1.0, 0.0, 0.0], 1.5, 300);
    assert!((x[0] - 1.5).abs() < 1e-8, "{x:?}");
    assert!((x[1] - 0.2).abs() < 1e-10 && (x[2] - 1.3).abs() < 1e-10);
    assert!((len - 1.5).abs() < 1e-8);
    // Any tilted curve to the far slice is longer, since g ≥ dt².
    for tilt in [0.1, 0.5, 2.0] {
        let n = 2000;
        let mut total = 0.0;
        for i in 0..n {
            let t = 1.5 * (i as f64 + 0.5) / n as f64;
            let c = chart.components(&[t, 0.2 + tilt * t, 1.3]);
            total += (1.0 + c[(1, 1)] * tilt * tilt).sqrt() * 1.5 / n as f64;
        }
        assert!(total > 1.5);
    }
}

#[test]
fn displayed_four_dimensional_threshold_admits_negative_curvature() {
    // Just below the displayed n = 4 threshold the chart curvature at t = 0
    // is negative on the Heisenberg bundle: 6/25 − a₀²/2 < 0 for a₀ > 0.693.
    let entry = heisenberg_entry();
    let thr = threshold(4, entry.base().omega_sup()).unwrap().value().unwrap();
    let profile = case_profile(4, 0.99 * thr).unwrap();
    let chart = entry.total_chart(&profile);
    let r = scalar_curvature(&chart, &CatalogEntry::total_point(0.0, 0.0, &[0.1, 0.2]), DEFAULT_STEP).unwrap().scalar;
    let a0 = 0.99 * thr;
    assert!((r - (6.0 / 25.0 - a0 * a0 / 2.0)).abs() < 1e-6, "{r}");
    assert!(r < 0.0);
    // With the curvature-form coefficient a²/(2b⁴) the sharp bound is the
    // displayed one divided by √2.
    let sharp = thr / 2f64.sqrt();
    let below = case_profile(4, 0.99 * sharp).unwrap();
    let r =
        scalar_curvature(&entry.total_chart(&below), &CatalogEntry::total_point(0.0, 0.0, &[0.1, 0.2]), DEFAULT_STEP)
            .unwrap()
            .scalar;
    assert!(r > 0.0);
}
