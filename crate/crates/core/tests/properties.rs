use std::f64::consts::PI;

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;
use psc_core::band::{functional, potential, BandSpec, PhiFamily, PotentialParams};
use psc_core::bundle::{case_lower_bound, case_profile, scalar_closed_form};
use psc_core::chart::{christoffel, scalar_curvature, ChartMetric, DEFAULT_STEP};

fn sphere() -> ChartMetric {
    ChartMetric::new(2, |x| DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, x[0].sin().powi(2)])))
        .with_domain(vec![0.2, f64::NEG_INFINITY], vec![PI - 0.2, f64::INFINITY])
}

fn half_plane() -> ChartMetric {
    ChartMetric::new(2, |x| DMatrix::identity(2, 2) / (x[1] * x[1]))
        .with_domain(vec![f64::NEG_INFINITY, 0.1], vec![f64::INFINITY, f64::INFINITY])
}

/// Smooth symmetric positive-definite perturbation of the identity in
/// three dimensions.
fn wavy(c: [f64; 6]) -> ChartMetric {
    ChartMetric::new(3, move |x| {
        let s = |i: usize, k: f64| 0.15 * c[i] * (k * x[0] + (i as f64 + 1.0) * x[1] - 0.5 * x[2]).sin();
        let mut g = DMatrix::identity(3, 3);
        g[(0, 0)] += s(0, 1.0);
        g[(1, 1)] += s(1, 0.7);
        g[(2, 2)] += s(2, 1.3);
        g[(0, 1)] = s(3, 0.4);
        g[(1, 0)] = g[(0, 1)];
        g[(0, 2)] = s(4, 0.9);
        g[(2, 0)] = g[(0, 2)];
        g[(1, 2)] = s(5, 1.1);
        g[(2, 1)] = g[(1, 2)];
        g
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scaling_divides_curvature(theta in 0.4..2.7f64, y in 0.3..3.0f64, ci in 0..3usize) {
        let c = [0.5, 2.0, 10.0][ci];
        for (g, p) in [(sphere(), vec![theta, 0.1]), (half_plane(), vec![0.2, y])] {
            let r = scalar_curvature(&g, &p, DEFAULT_STEP).unwrap().scalar;
            let rc = scalar_curvature(&g.scaled(c), &p, DEFAULT_STEP).unwrap().scalar;
            prop_assert!((rc - r / (c * c)).abs() <= 1e-6 * (1.0 + r.abs()), "{} vs {}", rc, r / (c * c));
        }
    }

    #[test]
    fn christoffel_and_ricci_are_symmetric(c in prop::array::uniform6(-1.0..1.0f64), p in prop::array::uniform3(-1.0..1.0f64)) {
        let g = wavy(c);
        let gamma = christoffel(&g, &p, DEFAULT_STEP).unwrap();
        prop_assert!(gamma.max_asymmetry() <= 1e-12);
        let rep = scalar_curvature(&g, &p, DEFAULT_STEP).unwrap();
        prop_assert!(rep.ricci_asymmetry() <= 1e-6, "{}", rep.ricci_asymmetry());
    }

    #[test]
    fn product_adds_curvature(theta in 0.4..2.7f64, y in 0.3..3.0f64, r in 0.5..3.0f64) {
        let s = sphere().scaled(r);
        let h = half_plane();
        let rs = scalar_curvature(&s, &[theta, 0.0], DEFAULT_STEP).unwrap().scalar;
        let rh = scalar_curvature(&h, &[0.0, y], DEFAULT_STEP).unwrap().scalar;
        let rp = scalar_curvature(&s.product(&h), &[theta, 0.0, 0.0, y], DEFAULT_STEP).unwrap().scalar;
        prop_assert!((rp - rs - rh).abs() <= 1e-6 * (1.0 + rs.abs() + rh.abs()));
    }

    #[test]
    fn lower_bound_is_below_closed_form(
        n in 4usize..13,
        coeff in 0.01..3.0f64,
        omega_sup in 0.0..3.0f64,
        frac in 0.0..1.0f64,
        rh in 0.0..10.0f64,
        t in 0.0..200.0f64,
    ) {
        let w = frac * omega_sup;
        let profile = case_profile(n, coeff).unwrap();
        let exact = scalar_closed_form(&profile, n, t, rh, w).unwrap();
        let bound = case_lower_bound(n, coeff, omega_sup, t).unwrap();
        prop_assert!(bound <= exact + 1e-12 * exact.abs().max(1.0));
    }

    #[test]
    fn potential_is_odd(l in 0.01..100.0f64, eps2 in 0.0..0.5f64, frac in -0.999..0.999f64) {
        let p = PotentialParams::three_dim(l, eps2).unwrap();
        let d = frac * l;
        prop_assert_eq!(potential(-d, &p).unwrap(), -potential(d, &p).unwrap());
    }

    #[test]
    fn level_total_curvature_is_topological(
        genus in 1u32..6,
        area in 0.5..50.0f64,
        amp in 0.5..2.0f64,
        rate in 0.1..1.5f64,
        frac in -0.9..0.9f64,
    ) {
        let m = BandSpec { half_width: 1.0, genus, fiber_area: area, phi: PhiFamily::Cosh { amp, rate } }.build().unwrap();
        let s = frac * m.half_width();
        let phi = m.phi(s).value;
        let total = m.fiber_scalar() / (phi * phi) * m.slice_area(s);
        prop_assert!((total - 8.0 * PI * (1.0 - genus as f64)).abs() <= 1e-10);
    }

    #[test]
    fn functional_reference_normalisation(amp in 0.5..2.0f64, rate in 0.1..2.0f64, area in 1.0..50.0f64, l in 0.1..1.0f64) {
        let m = BandSpec { half_width: 1.0, genus: 2, fiber_area: area, phi: PhiFamily::Exp { amp, rate } }.build().unwrap();
        let p = PotentialParams::three_dim(l, 0.0).unwrap();
        assert_relative_eq!(functional(&m, 0.0, &p).unwrap(), amp * amp * area, max_relative = 1e-14);
    }
}
