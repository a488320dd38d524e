use serde::{Deserialize, Serialize};

use super::potential::{potential, potential_derivative, PotentialParams};
use super::{BandError, BandModel};

/// Dense-grid resolution used by [`minimize`].
pub const GRID_POINTS: usize = 10_000;
/// Grid stays `GRID_MARGIN · L` away from `±L`.
pub const GRID_MARGIN: f64 = 1e-4;
/// Criticality tolerance `|H − h(s*)|`.
pub const CRITICALITY_TOL: f64 = 1e-6;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a minimum of `f` on `[a, b]`; returns the
/// abscissa and value.
pub(crate) fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if b - a <= f64::EPSILON * (a.abs() + b.abs()) {
            break;
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    if fx <= fc.min(fd) {
        (x, fx)
    } else if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

// Five-point Gauss–Legendre on [a, b].
fn gauss5<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    const X: [f64; 5] =
        [0.0, 0.538_469_310_105_683_1, -0.538_469_310_105_683_1, 0.906_179_845_938_664, -0.906_179_845_938_664];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    r * X.iter().zip(W).map(|(x, w)| w * f(m + r * x)).sum::<f64>()
}

struct Piece {
    a: f64,
    b: f64,
    fine: f64,
    err: f64,
}

fn piece<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Piece {
    let m = 0.5 * (a + b);
    let fine = gauss5(f, a, m) + gauss5(f, m, b);
    Piece { a, b, fine, err: (fine - gauss5(f, a, b)).abs() }
}

/// Globally adaptive Gauss–Legendre: the piece with the largest error
/// estimate is bisected until the total estimate is below a relative
/// `1e-13`, or after `MAX_SPLITS` bisections. Near the tan singularity the
/// integrand carries rounding noise from its argument, so the cap, not the
/// tolerance, ends the refinement there.
fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    const MAX_SPLITS: usize = 2000;
    if a == b {
        return 0.0;
    }
    if b < a {
        return -integrate(f, b, a);
    }
    let mut pieces = vec![piece(&f, a, b)];
    for _ in 0..MAX_SPLITS {
        let total: f64 = pieces.iter().map(|p| p.fine).sum();
        let err: f64 = pieces.iter().map(|p| p.err).sum();
        if err <= 1e-13 * total.abs().max(1e-3) {
            break;
        }
        let (i, _) = pieces.iter().enumerate().max_by(|x, y| x.1.err.total_cmp(&y.1.err)).expect("at least one piece");
        let p = pieces.swap_remove(i);
        let m = 0.5 * (p.a + p.b);
        if !(m > p.a && m < p.b) {
            pieces.push(Piece { err: 0.0, ..p });
            continue;
        }
        pieces.push(piece(&f, p.a, m));
        pieces.push(piece(&f, m, p.b));
    }
    pieces.iter().map(|p| p.fine).sum()
}

fn check_level(model: &BandModel, s: f64, p: &PotentialParams) -> Result<(), BandError> {
    let limit = model.half_width().min(p.half_length);
    if !(s.abs() < limit) {
        return Err(BandError::Domain(format!("level {s} outside (-{limit}, {limit})")));
    }
    Ok(())
}

fn weighted_potential<'a>(model: &'a BandModel, p: &'a PotentialParams) -> impl Fn(f64) -> f64 + 'a {
    move |t| {
        let phi = model.phi(t).value;
        potential(t, p).unwrap_or(f64::NAN) * phi * phi
    }
}

/// Reduced functional on level regions `{t ≥ s}`:
/// `𝒜(s) = A_V (φ(s)² + ∫₀ˢ h(t) φ(t)² dt)`, with `𝒜(0)` the area of the
/// middle slice.
pub fn functional(model: &BandModel, s: f64, p: &PotentialParams) -> Result<f64, BandError> {
    p.validate()?;
    check_level(model, s, p)?;
    let phi = model.phi(s).value;
    Ok(model.fiber_area() * (phi * phi + integrate(weighted_potential(model, p), 0.0, s)))
}

/// `𝒜′(s) / (A_V φ²) = h(s) + 2φ′/φ = h(s) − H(s)`.
fn criticality(model: &BandModel, s: f64, p: &PotentialParams) -> f64 {
    let j = model.phi(s);
    potential(s, p).unwrap_or(f64::NAN) + 2.0 * j.d1 / j.value
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuBubbleSolution {
    pub level: f64,
    pub area: f64,
    /// `H = −2φ′/φ` with respect to the outward normal `−∂_t`.
    pub mean_curvature: f64,
    pub potential_at_level: f64,
    /// `𝒜″` at the level.
    pub second_derivative: f64,
    /// `∫ R_C dA` over the level surface.
    pub total_curvature: f64,
    pub functional_value: f64,
}

/// Global minimizer of the reduced functional over `(−L, L)`.
///
/// A dense grid locates the global basin, golden-section search refines it,
/// and a sign-change bisection on `𝒜′` inside the same grid cell polishes
/// the level to machine precision.
pub fn minimize(model: &BandModel, p: &PotentialParams) -> Result<MuBubbleSolution, BandError> {
    p.validate()?;
    let l = p.half_length;
    if l > model.half_width() {
        return Err(BandError::Domain(format!("L = {l} exceeds the half width {}", model.half_width())));
    }
    let lo = -l + GRID_MARGIN * l;
    let hi = l - GRID_MARGIN * l;
    let n = GRID_POINTS;
    let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let integrand = weighted_potential(model, p);

    // Cumulative ∫₀^{s_k} h φ² from the grid point nearest zero outward.
    let k0 = grid
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .expect("grid is nonempty");
    let mut cumulative = vec![0.0; n];
    cumulative[k0] = integrate(&integrand, 0.0, grid[k0]);
    for k in k0 + 1..n {
        cumulative[k] = cumulative[k - 1] + gauss5(&integrand, grid[k - 1], grid[k]);
    }
    for k in (0..k0).rev() {
        cumulative[k] = cumulative[k + 1] - gauss5(&integrand, grid[k], grid[k + 1]);
    }
    let values: Vec<f64> = grid
        .iter()
        .zip(&cumulative)
        .map(|(&s, &c)| {
            let phi = model.phi(s).value;
            model.fiber_area() * (phi * phi + c)
        })
        .collect();
    let kmin = values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).expect("grid is nonempty");
    if kmin == 0 || kmin == n - 1 {
        return Err(BandError::BoundaryEscape { level: grid[kmin] });
    }

    let (a, b) = (grid[kmin - 1], grid[kmin + 1]);
    let objective = |s: f64| functional(model, s, p).unwrap_or(f64::INFINITY);
    let (mut level, _) = golden_section(objective, a, b, 1e-10);

    let (ga, gb) = (criticality(model, a, p), criticality(model, b, p));
    if ga < 0.0 && gb > 0.0 {
        let (mut x0, mut x1) = (a, b);
        for _ in 0..200 {
            let mid = 0.5 * (x0 + x1);
            if mid <= x0 || mid >= x1 {
                break;
            }
            if criticality(model, mid, p) < 0.0 {
                x0 = mid;
            } else {
                x1 = mid;
            }
        }
        level = 0.5 * (x0 + x1);
    }

    let j = model.phi(level);
    let h = potential(level, p)?;
    let dh = potential_derivative(level, p)?;
    let mean_curvature = -2.0 * j.d1 / j.value;
    let residual = (mean_curvature - h).abs();
    if residual > CRITICALITY_TOL {
        return Err(BandError::NotCritical { residual });
    }
    let area = model.slice_area(level);
    let av = model.fiber_area();
    let second_derivative =
        av * (2.0 * j.d1 * j.d1 + 2.0 * j.value * j.d2 + dh * j.value * j.value + 2.0 * h * j.value * j.d1);
    // Level surfaces are homothetic copies of V: R_C = R_V/φ².
    let total_curvature = model.fiber_scalar() / (j.value * j.value) * area;
    Ok(MuBubbleSolution {
        level,
        area,
        mean_curvature,
        potential_at_level: h,
        second_derivative,
        total_curvature,
        functional_value: functional(model, level, p)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// `∫ R_C − ∫ ((3/2)h² − 2|∇h|)` over the level surface.
    pub margin: f64,
    /// Ambient scalar curvature on the level surface.
    pub ambient_scalar: f64,
    /// Whether the ambient curvature is nonnegative there, which is when
    /// the margin is guaranteed nonnegative.
    pub hypothesis_holds: bool,
}

pub fn stability_report(
    model: &BandModel,
    sol: &MuBubbleSolution,
    p: &PotentialParams,
) -> Result<StabilityReport, BandError> {
    let h = potential(sol.level, p)?;
    let dh = potential_derivative(sol.level, p)?;
    let margin = sol.total_curvature - (1.5 * h * h - 2.0 * dh.abs()) * sol.area;
    let ambient_scalar = model.band_scalar(sol.level)?;
    Ok(StabilityReport { margin, ambient_scalar, hypothesis_holds: ambient_scalar >= 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::band::{BandSpec, PhiFamily};
    use std::f64::consts::PI;

    fn model(phi: PhiFamily, genus: u32, area: f64, half_width: f64) -> BandModel {
        BandSpec { half_width, genus, fiber_area: area, phi }.build().unwrap()
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let (x, fx) = golden_section(|x| (x - 0.3) * (x - 0.3) + 1.0, -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-14);
    }

    #[test]
    fn functional_at_zero_is_middle_area() {
        let m = model(PhiFamily::Cosh { amp: 1.3, rate: 0.5 }, 2, 3.0, 1.0);
        let p = PotentialParams::three_dim(1.0, 0.0).unwrap();
        let a0 = functional(&m, 0.0, &p).unwrap();
        assert!((a0 - 1.69 * 3.0).abs() < 1e-13);
    }

    #[test]
    fn functional_matches_log_cosine_antiderivative() {
        // φ ≡ 1, A_V = 1: 𝒜(s) = 1 − (4/3) ln cos(πs/(2L)).
        let l = 1.7;
        let m = model(PhiFamily::Constant { amp: 1.0 }, 1, 1.0, l);
        let p = PotentialParams::three_dim(l, 0.0).unwrap();
        for s in [-1.6, -0.9, -0.1, 0.0, 0.25, 1.2, 1.69] {
            let exact = 1.0 - 4.0 / 3.0 * (PI * s / (2.0 * l)).cos().ln();
            let got = functional(&m, s, &p).unwrap();
            assert!((got - exact).abs() < 1e-10 * exact, "s={s}: {got} vs {exact}");
        }
    }

    #[test]
    fn functional_grows_without_bound_at_the_ends() {
        let l = 1.0;
        let m = model(PhiFamily::Constant { amp: 1.0 }, 1, 1.0, l);
        let p = PotentialParams::three_dim(l, 0.0).unwrap();
        let a0 = functional(&m, 0.0, &p).unwrap();
        let mut prev = a0;
        for k in 1..=10 {
            let s = l * (1.0 - 10f64.powi(-k));
            let v = functional(&m, s, &p).unwrap();
            assert!(v > prev);
            prev = v;
        }
        // Growth is logarithmic: each decade towards L adds (4/3) ln 10.
        assert!(prev - a0 > 10.0 * 4.0 / 3.0 * 10f64.ln() - 1.0);
        assert!(functional(&m, l, &p).is_err());
    }

    #[test]
    fn product_band_minimizer_is_the_middle() {
        for genus in [1, 2, 5] {
            let m = model(PhiFamily::Constant { amp: 0.8 }, genus, 2.0, 1.0);
            let p = PotentialParams::three_dim(1.0, 0.1).unwrap();
            let sol = minimize(&m, &p).unwrap();
            assert!(sol.level.abs() < 1e-9, "{}", sol.level);
            assert!(sol.potential_at_level.abs() < 1e-8);
            assert!((sol.total_curvature - 8.0 * PI * (1.0 - genus as f64)).abs() < 1e-10);
        }
    }

    #[test]
    fn exponential_warp_criticality() {
        let lambda = 0.6;
        let m = model(PhiFamily::Exp { amp: 1.0, rate: lambda }, 1, 1.0, 2.0);
        let p = PotentialParams::three_dim(1.5, 0.0).unwrap();
        let sol = minimize(&m, &p).unwrap();
        assert!((sol.potential_at_level + 2.0 * lambda).abs() < 1e-10);
        assert!((sol.mean_curvature + 2.0 * lambda).abs() < 1e-14);
        assert!(sol.level < 0.0);
        assert!(sol.second_derivative > 0.0);
    }

    #[test]
    fn stability_margin_for_flat_product() {
        let l = 0.9;
        let m = model(PhiFamily::Constant { amp: 1.0 }, 1, 1.0, 1.0);
        let p = PotentialParams::three_dim(l, 0.0).unwrap();
        let sol = minimize(&m, &p).unwrap();
        let rep = stability_report(&m, &sol, &p).unwrap();
        assert!(rep.hypothesis_holds);
        assert!((rep.margin - 2.0 * PI * PI / (3.0 * l * l)).abs() < 1e-8);
    }

    #[test]
    fn hyperbolic_product_is_reported_without_claim() {
        let m = model(PhiFamily::Constant { amp: 1.0 }, 2, 1.0, 1.0);
        let p = PotentialParams::three_dim(1.0, 0.0).unwrap();
        let sol = minimize(&m, &p).unwrap();
        let rep = stability_report(&m, &sol, &p).unwrap();
        assert!(!rep.hypothesis_holds);
        assert!(rep.ambient_scalar < 0.0);
    }

    #[test]
    fn rejects_potential_wider_than_band() {
        let m = model(PhiFamily::Constant { amp: 1.0 }, 1, 1.0, 1.0);
        let p = PotentialParams::three_dim(1.5, 0.0).unwrap();
        assert!(matches!(minimize(&m, &p), Err(BandError::Domain(_))));
    }
}
