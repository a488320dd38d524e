use std::f64::consts::PI;
use std::fs;

use psc_core::band::{
    band_width_audit, functional, minimize, open_grid, potential, stability_report, sweep, theorem1_hypothesis,
    AuditOutcome, BandError, HypothesisVerdict, PotentialParams, AREA_RATIO_THRESHOLD,
};
use psc_core::bundle::{
    case_lower_bound, case_profile, certify, scalar_closed_form, threshold, BaseGeometry, BundleError, Threshold,
    Verdict,
};
use psc_core::catalog::{all_entries, CatalogEntry};
use psc_core::chart::{scalar_curvature, CurvatureError, DEFAULT_STEP};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::{Command, ConfigError, RunConfig, SweepKind};
use crate::plot::{num, Table};
use crate::report::{
    AgreementRow, AuditSweepResult, BandResult, CertifyResult, CriticalitySweepResult, HypothesisResult, ReportBody,
    Results, ThresholdSweepResult, VerifyResult, SCHEMA_VERSION,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Band(#[from] BandError),
    #[error("curvature oracle at {point:?}: {source}")]
    Oracle { point: Vec<f64>, source: CurvatureError },
    #[error("{0}")]
    Input(String),
}

type Result<T> = std::result::Result<T, RunError>;

macro_rules! bail {
    ($($arg:tt)*) => { return Err(RunError::Input(format!($($arg)*))) };
}

/// Agreement tolerance for `verify`.
pub const VERIFY_TOLERANCE: f64 = 1e-5;

/// Deterministic output of a run: the report body and optional curves.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub body: ReportBody,
    pub curves: Option<Table>,
}

pub fn find_entry(name: &str) -> Result<CatalogEntry> {
    all_entries().into_iter().find(|e| e.name() == name).ok_or_else(|| {
        let names: Vec<String> = all_entries().iter().map(|e| e.name().to_string()).collect();
        RunError::Input(format!("unknown catalog entry `{name}` (known: {})", names.join(", ")))
    })
}

/// Executes `config` and assembles the report body.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let (success, summary, results, curves) = match config.command {
        Command::Verify => run_verify(config)?,
        Command::Certify => run_certify(config)?,
        Command::Sweep => match config.sweep.kind {
            SweepKind::Audit => run_audit_sweep(config)?,
            SweepKind::Criticality => run_criticality_sweep(config)?,
            SweepKind::Threshold => run_threshold_sweep(config)?,
        },
        Command::Band => run_band(config)?,
        Command::Catalog => {
            let entries: Vec<_> = all_entries().iter().map(CatalogEntry::describe).collect();
            (true, format!("{} catalog entries", entries.len()), Results::Catalog { entries }, None)
        }
        Command::Hypothesis => run_hypothesis(config)?,
    };
    Ok(RunOutput {
        body: ReportBody {
            schema_version: SCHEMA_VERSION,
            command: config.command.name().to_string(),
            seed: config.seed,
            config: config.clone(),
            success,
            summary,
            results,
        },
        curves,
    })
}

type Outcome = (bool, String, Results, Option<Table>);

/// Threshold of the case profile; `None` in dimensions 2 and 3, where the
/// profile has no free coefficient.
fn case_threshold(n: usize, omega_sup: f64) -> Result<Option<Threshold>> {
    match threshold(n, omega_sup) {
        Ok(t) => Ok(Some(t)),
        Err(BundleError::NoThreshold { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn default_coeff(n: usize, omega_sup: f64) -> Result<f64> {
    Ok(match case_threshold(n, omega_sup)? {
        Some(Threshold::Bounded(v)) => 0.5 * v,
        _ => 1.0,
    })
}

fn run_verify(config: &RunConfig) -> Result<Outcome> {
    let c = &config.case;
    let entry = find_entry(c.entry.as_deref().expect("validated"))?;
    let n = entry.total_dim();
    if let Some(m) = c.n {
        if m != n {
            bail!("entry `{}` has total dimension {n}, not {m}", entry.name());
        }
    }
    let base = entry.base();
    let coeff = match c.coeff {
        Some(a) => a,
        None => default_coeff(n, base.omega_sup())?,
    };
    let profile = case_profile(n, coeff)?;
    let chart = entry.total_chart(&profile);
    let pts = entry.reference_points();
    let k = base.base_dim();
    let lo: Vec<f64> = (0..k).map(|i| pts.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = (0..k).map(|i| pts.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rows = Vec::with_capacity(c.points);
    for _ in 0..c.points {
        let t = rng.gen_range(c.t_range[0]..c.t_range[1]);
        let phi = rng.gen_range(0.0..2.0 * PI);
        let x: Vec<f64> = lo.iter().zip(&hi).map(|(&l, &h)| if h > l { rng.gen_range(l..h) } else { l }).collect();
        let point = CatalogEntry::total_point(t, phi, &x);
        let rep = scalar_curvature(&chart, &point, DEFAULT_STEP)
            .map_err(|source| RunError::Oracle { point: point.clone(), source })?;
        let (rh, w) = (base.scalar_h(&x), base.omega_norm(&x));
        let closed = scalar_closed_form(&profile, n, t, rh, w)?;
        let (a, b) = (profile.a(t).value, profile.b(t).value);
        let doubled = closed - a * a * w * w / (4.0 * b.powi(4));
        let denom = rep.scalar.abs().max(f64::MIN_POSITIVE);
        rows.push(AgreementRow {
            point,
            closed_form: closed,
            oracle: rep.scalar,
            oracle_error_estimate: rep.estimated_error,
            relative_discrepancy: (closed - rep.scalar).abs() / denom,
            relative_discrepancy_doubled_form: (doubled - rep.scalar).abs() / denom,
        });
    }
    let worst = rows.iter().map(|r| r.relative_discrepancy).fold(0.0, f64::max);
    let worst_doubled = rows.iter().map(|r| r.relative_discrepancy_doubled_form).fold(0.0, f64::max);
    let mut table = Table::new(["t", "fiber", "closed_form", "oracle", "relative_discrepancy"]);
    for r in &rows {
        table.push_numbers(&[r.point[0], r.point[1], r.closed_form, r.oracle, r.relative_discrepancy]);
    }
    let success = worst <= VERIFY_TOLERANCE;
    let summary = format!(
        "{}: max relative discrepancy {worst:.3e} (tolerance {VERIFY_TOLERANCE:e}); with doubled curvature-form term {worst_doubled:.3e}",
        entry.name()
    );
    let result = VerifyResult {
        entry: entry.name().to_string(),
        n,
        coeff,
        tolerance: VERIFY_TOLERANCE,
        max_relative_discrepancy: worst,
        max_relative_discrepancy_doubled_form: worst_doubled,
        rows,
    };
    Ok((success, summary, Results::Verify(result), Some(table)))
}

/// Base for a certification: a catalog entry, or a synthetic base with
/// `R_h ≡ 0` and `|Ω| ≡ Ω_∞`.
fn certification_base(config: &RunConfig) -> Result<(String, usize, BaseGeometry)> {
    let c = &config.case;
    if let Some(name) = &c.entry {
        let entry = find_entry(name)?;
        let n = entry.total_dim();
        if c.n.is_some_and(|m| m != n) {
            bail!("entry `{name}` has total dimension {n}, not {}", c.n.unwrap());
        }
        if c.omega_sup.is_some() {
            bail!("`case.omega_sup` cannot be combined with a catalog entry");
        }
        return Ok((name.clone(), n, entry.base().clone()));
    }
    let n = c.n.expect("validated");
    if n < 2 {
        bail!("total dimension {n} < 2");
    }
    let w = c.omega_sup.unwrap_or(0.0);
    let base = BaseGeometry::new(n - 2, |_| 0.0, move |_| w, w, vec![vec![0.0; n - 2]])?;
    Ok((format!("synthetic base of dimension {} with R_h = 0, |Omega| = {w}", n - 2), n, base))
}

fn run_certify(config: &RunConfig) -> Result<Outcome> {
    let c = &config.case;
    let (base_name, n, base) = certification_base(config)?;
    let omega_sup = base.omega_sup();
    let coeff = match c.coeff {
        Some(a) => a,
        None => default_coeff(n, omega_sup)?,
    };
    let thr = case_threshold(n, omega_sup)?;
    let cert = certify(n, coeff, &base, c.t_max, c.grid_points)?;
    let profile = case_profile(n, coeff)?;
    let mut table = Table::new(["t", "lower_bound", "min_scalar"]);
    for i in 0..c.grid_points {
        let t = c.t_max * i as f64 / (c.grid_points - 1) as f64;
        let min_scalar = base
            .samples()
            .iter()
            .map(|p| scalar_closed_form(&profile, n, t, base.scalar_h(p), base.omega_norm(p)))
            .try_fold(f64::INFINITY, |acc, r| r.map(|r| acc.min(r)))?;
        table.push_numbers(&[t, case_lower_bound(n, coeff, omega_sup, t)?, min_scalar]);
    }
    let success = cert.verdict == Verdict::Positive;
    let summary = format!("n = {n}, coefficient {coeff}: {:?}", cert.verdict);
    Ok((
        success,
        summary,
        Results::Certify(CertifyResult { base: base_name, threshold: thr, certificate: cert }),
        Some(table),
    ))
}

fn run_audit_sweep(config: &RunConfig) -> Result<Outcome> {
    let s = &config.sweep;
    let result = sweep::audit_sweep(config.seed, s.models, s.max_draws, &s.genera, s.doubling);
    let mut table = Table::new([
        "index",
        "family",
        "genus",
        "fiber_area",
        "half_width",
        "outcome",
        "r0",
        "a0",
        "bound",
        "distance",
    ]);
    for rec in &result.records {
        let (label, r0, a0, bound, distance) = match &rec.outcome {
            AuditOutcome::Holds { r0, a0, bound, distance } => ("holds", *r0, *a0, num(*bound), num(*distance)),
            AuditOutcome::Violated { r0, a0, bound, distance } => ("violated", *r0, *a0, num(*bound), num(*distance)),
            AuditOutcome::NotApplicable { r0, a0, .. } => ("not_applicable", *r0, *a0, String::new(), String::new()),
        };
        table.push(vec![
            rec.index.to_string(),
            rec.spec.phi.name().to_string(),
            rec.spec.genus.to_string(),
            num(rec.spec.fiber_area),
            num(rec.spec.half_width),
            label.to_string(),
            num(r0),
            num(a0),
            bound,
            distance,
        ]);
    }
    let applicable = result.applicable();
    let violating: Vec<_> = result.violations().into_iter().cloned().collect();
    let success = violating.is_empty() && applicable >= s.models;
    let summary = format!(
        "{applicable} applicable models in {} draws, {} violations{}",
        result.draws,
        violating.len(),
        if applicable < s.models { " (draw cap reached first)" } else { "" }
    );
    let res = AuditSweepResult {
        distributions: sweep::distribution_summary(),
        draws: result.draws,
        applicable,
        violations: violating.len(),
        rejected: result.rejected,
        violating_models: violating,
    };
    Ok((success, summary, Results::AuditSweep(res), Some(table)))
}

fn run_criticality_sweep(config: &RunConfig) -> Result<Outcome> {
    let s = &config.sweep;
    let out = sweep::criticality_sweep(config.seed, s.models as u64, &s.genera);
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (i, r) in out {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => failures.push((i, e.to_string())),
        }
    }
    let mut table = Table::new([
        "index",
        "family",
        "genus",
        "level",
        "mean_curvature",
        "potential_at_level",
        "second_derivative",
        "total_curvature",
    ]);
    let (mut residual, mut second, mut gb) = (0.0f64, f64::INFINITY, 0.0f64);
    for rec in &records {
        let sol = &rec.solution;
        residual = residual.max((sol.mean_curvature - sol.potential_at_level).abs());
        second = second.min(sol.second_derivative);
        gb = gb.max((sol.total_curvature - 8.0 * PI * (1.0 - rec.spec.genus as f64)).abs());
        let mut row = vec![rec.index.to_string(), rec.spec.phi.name().to_string(), rec.spec.genus.to_string()];
        row.extend(
            [sol.level, sol.mean_curvature, sol.potential_at_level, sol.second_derivative, sol.total_curvature]
                .map(num),
        );
        table.push(row);
    }
    let success = failures.is_empty() && residual <= 1e-6 && second >= -1e-8;
    let summary = format!(
        "{} solved, {} failed; max |H - h| {residual:.3e}, min second derivative {second:.3e}, max Gauss-Bonnet error {gb:.3e}",
        records.len(),
        failures.len()
    );
    let res = CriticalitySweepResult {
        distributions: sweep::distribution_summary(),
        solved: records.len(),
        failures,
        max_criticality_residual: residual,
        min_second_derivative: second,
        max_gauss_bonnet_error: gb,
        records,
    };
    Ok((success, summary, Results::CriticalitySweep(res), Some(table)))
}

fn run_threshold_sweep(config: &RunConfig) -> Result<Outcome> {
    let (_, n, base) = certification_base(config)?;
    let omega_sup = base.omega_sup();
    let thr = threshold(n, omega_sup)?;
    let Threshold::Bounded(limit) = thr else {
        bail!("no finite threshold for n = {n} with omega_sup = {omega_sup}");
    };
    let count = config.sweep.models;
    let mut table = Table::new(["coeff", "coeff_over_threshold", "bound_at_t0", "certified"]);
    let mut sign_change = None;
    let mut prev: Option<(f64, f64)> = None;
    for i in 1..=count {
        let coeff = 2.0 * limit * i as f64 / (count + 1) as f64;
        let b0 = case_lower_bound(n, coeff, omega_sup, 0.0)?;
        let cert = certify(n, coeff, &base, config.case.t_max, config.case.grid_points)?;
        let certified = if cert.verdict == Verdict::Positive { 1.0 } else { 0.0 };
        table.push_numbers(&[coeff, coeff / limit, b0, certified]);
        if let Some((pc, pb)) = prev {
            if pb > 0.0 && b0 <= 0.0 && sign_change.is_none() {
                sign_change = Some([pc, coeff]);
            }
        }
        prev = Some((coeff, b0));
    }
    let success = sign_change.is_some_and(|[a, b]| a < limit && limit <= b);
    let summary = format!("n = {n}, threshold {limit}: bound at t = 0 changes sign in {sign_change:?}");
    let res = ThresholdSweepResult { n, omega_sup, threshold: thr, sign_change };
    Ok((success, summary, Results::ThresholdSweep(res), Some(table)))
}

fn run_band(config: &RunConfig) -> Result<Outcome> {
    let b = &config.band;
    let model = b.spec().build()?;
    let p = PotentialParams::three_dim(b.half_length(), b.eps2)?;
    let solution = minimize(&model, &p)?;
    let stability = stability_report(&model, &solution, &p)?;
    let audit = band_width_audit(&model, b.doubling)?;
    let min_scalar = model.min_scalar_on(-b.half_width, b.half_width)?;
    let l = p.half_length;
    let mut table = Table::new(["t", "phi", "band_scalar", "potential", "functional"]);
    for t in open_grid(l, b.curve_points) {
        table.push_numbers(&[
            t,
            model.phi(t).value,
            model.band_scalar(t)?,
            potential(t, &p)?,
            functional(&model, t, &p)?,
        ]);
    }
    let success = !audit.is_violated();
    let summary = format!(
        "level {:.6}, |H - h| = {:.3e}, stability margin {:.6}, audit: {}",
        solution.level,
        (solution.mean_curvature - solution.potential_at_level).abs(),
        stability.margin,
        match &audit {
            AuditOutcome::Holds { .. } => "holds",
            AuditOutcome::Violated { .. } => "violated",
            AuditOutcome::NotApplicable { .. } => "not applicable",
        }
    );
    let res = BandResult { fiber_scalar: model.fiber_scalar(), min_scalar, solution, stability, audit };
    Ok((success, summary, Results::Band(res), Some(table)))
}

fn read_samples_csv(path: &std::path::Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path).map_err(|e| RunError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| RunError::Input(format!("{} is empty", path.display())))?;
    if header.split(',').map(str::trim).collect::<Vec<_>>() != ["r", "area"] {
        bail!("{}: header must be `r,area`, got `{header}`", path.display());
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            let bad = || RunError::Input(format!("{} line {}: expected two numbers, got `{l}`", path.display(), i + 2));
            let cells: Vec<&str> = l.split(',').map(str::trim).collect();
            match cells.as_slice() {
                [r, a] => Ok((r.parse().map_err(|_| bad())?, a.parse().map_err(|_| bad())?)),
                _ => Err(bad()),
            }
        })
        .collect()
}

fn run_hypothesis(config: &RunConfig) -> Result<Outcome> {
    let h = &config.hypothesis;
    let samples: Vec<(f64, f64)> = if let Some(path) = &h.samples_csv {
        read_samples_csv(path)?
    } else if let Some(c) = h.coefficient {
        (1..=h.count.unwrap_or(50)).map(|i| (i as f64, c * (i * i) as f64)).collect()
    } else {
        h.samples.iter().map(|&[r, a]| (r, a)).collect()
    };
    let verdict = theorem1_hypothesis(&samples)?;
    let success = matches!(verdict, HypothesisVerdict::Satisfied { .. });
    let summary = match &verdict {
        HypothesisVerdict::Satisfied { tail_ratio, margin, .. } => {
            format!("liminf estimate {tail_ratio} < 12/pi, margin {margin:.6e}")
        }
        HypothesisVerdict::NotSatisfied { tail_ratio, .. } => {
            format!("liminf estimate {tail_ratio} is not below 12/pi")
        }
        HypothesisVerdict::InsufficientData { samples } => format!("{samples} samples are not enough"),
    };
    let res = HypothesisResult { samples: samples.len(), threshold: AREA_RATIO_THRESHOLD, verdict };
    let mut table = Table::new(["r", "area", "ratio"]);
    for (r, a) in &samples {
        table.push_numbers(&[*r, *a, a / (r * r)]);
    }
    Ok((success, summary, Results::Hypothesis(res), (!table.is_empty()).then_some(table)))
}
