//! Seeded random band models for falsification sweeps.
//!
//! Draw `i` of a sweep with seed `s` uses its own ChaCha8 stream `i`, so
//! results do not depend on thread count or on how many draws are made.

use std::f64::consts::FRAC_PI_2;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    band_width_audit, minimize, AuditOutcome, BandError, BandSpec, MuBubbleSolution, PhiFamily, PotentialParams,
};

/// Documented sampling distributions.
pub const AMPLITUDE_RANGE: (f64, f64) = (0.5, 2.0);
pub const RATE_RANGE: (f64, f64) = (0.1, 2.0);
pub const FIBER_AREA_RANGE: (f64, f64) = (1.0, 50.0);
pub const HALF_WIDTH_RANGE: (f64, f64) = (0.2, 3.0);
pub const EXPONENT_RANGE: (f64, f64) = (-2.0, 2.0);
const FAMILY_WEIGHTS: [(&str, u32); 6] =
    [("constant", 1), ("exp", 1), ("cosh", 1), ("cos", 3), ("cos_power", 3), ("power", 1)];

const BATCH: usize = 256;

fn log_uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Plain-text description of the distributions, for reports.
pub fn distribution_summary() -> String {
    format!(
        "amplitude log-uniform {AMPLITUDE_RANGE:?}; rate log-uniform {RATE_RANGE:?}; \
         fiber area log-uniform {FIBER_AREA_RANGE:?}; family weights {FAMILY_WEIGHTS:?}; \
         cos families: shift uniform in ±0.3·π/(2·rate), T uniform in (0.2, 0.95)·(π/(2·rate) − |shift|); \
         power: exponent uniform {EXPONENT_RANGE:?}, T ≤ 0.7/rate; otherwise T uniform {HALF_WIDTH_RANGE:?}"
    )
}

/// Draws one band model description; genus uniform from `genera`.
pub fn random_band_spec<R: Rng>(rng: &mut R, genera: &[u32]) -> BandSpec {
    let weights = WeightedIndex::new(FAMILY_WEIGHTS.iter().map(|w| w.1)).expect("weights are positive");
    let family = FAMILY_WEIGHTS[weights.sample(rng)].0;
    let amp = log_uniform(rng, AMPLITUDE_RANGE);
    let rate = log_uniform(rng, RATE_RANGE);
    let (phi, half_width) = match family {
        "constant" => (PhiFamily::Constant { amp }, rng.gen_range(HALF_WIDTH_RANGE.0..HALF_WIDTH_RANGE.1)),
        "exp" => (PhiFamily::Exp { amp, rate }, rng.gen_range(HALF_WIDTH_RANGE.0..HALF_WIDTH_RANGE.1)),
        "cosh" => (PhiFamily::Cosh { amp, rate }, rng.gen_range(HALF_WIDTH_RANGE.0..HALF_WIDTH_RANGE.1)),
        "cos" | "cos_power" => {
            let quarter = FRAC_PI_2 / rate;
            let shift = rng.gen_range(-0.3..0.3) * quarter;
            let t = rng.gen_range(0.2..0.95) * (quarter - shift.abs());
            let phi = if family == "cos" {
                PhiFamily::Cos { amp, rate, shift }
            } else {
                PhiFamily::CosPower { amp, rate, shift }
            };
            (phi, t)
        }
        _ => {
            let exponent = rng.gen_range(EXPONENT_RANGE.0..EXPONENT_RANGE.1);
            let t = rng.gen_range(HALF_WIDTH_RANGE.0..HALF_WIDTH_RANGE.1).min(0.7 / rate);
            (PhiFamily::Power { amp, rate, exponent }, t)
        }
    };
    let genus = *genera.choose(rng).expect("at least one genus");
    let fiber_area = log_uniform(rng, FIBER_AREA_RANGE);
    BandSpec { half_width, genus, fiber_area, phi }
}

fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draw `index` of the sweep with the given seed.
pub fn draw(seed: u64, index: u64, genera: &[u32]) -> BandSpec {
    random_band_spec(&mut stream_rng(seed, index), genera)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub index: u64,
    pub spec: BandSpec,
    pub outcome: AuditOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditSweep {
    pub seed: u64,
    pub draws: u64,
    /// Models whose construction failed, with the reason.
    pub rejected: Vec<(u64, String)>,
    pub records: Vec<AuditRecord>,
}

impl AuditSweep {
    pub fn applicable(&self) -> usize {
        self.records.iter().filter(|r| r.outcome.is_applicable()).count()
    }

    pub fn violations(&self) -> Vec<&AuditRecord> {
        self.records.iter().filter(|r| r.outcome.is_violated()).collect()
    }
}

/// Draws models until `target` of them satisfy the strict hypothesis, or
/// `max_draws` models have been drawn.
pub fn audit_sweep(seed: u64, target: usize, max_draws: u64, genera: &[u32], doubling: bool) -> AuditSweep {
    let mut out = AuditSweep { seed, draws: 0, rejected: Vec::new(), records: Vec::new() };
    let mut applicable = 0;
    while applicable < target && out.draws < max_draws {
        let start = out.draws;
        let end = (start + BATCH as u64).min(max_draws);
        let batch: Vec<(u64, Result<AuditRecord, BandError>)> = (start..end)
            .into_par_iter()
            .map(|index| {
                let spec = draw(seed, index, genera);
                let res = spec.build().and_then(|m| band_width_audit(&m, doubling)).map(|outcome| AuditRecord {
                    index,
                    spec,
                    outcome,
                });
                (index, res)
            })
            .collect();
        for (index, res) in batch {
            out.draws = index + 1;
            match res {
                Ok(rec) => {
                    applicable += rec.outcome.is_applicable() as usize;
                    out.records.push(rec);
                }
                Err(e) => out.rejected.push((index, e.to_string())),
            }
            if applicable >= target {
                break;
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalityRecord {
    pub index: u64,
    pub spec: BandSpec,
    pub potential: PotentialParams,
    pub solution: MuBubbleSolution,
}

/// `count` random models with genus drawn from `genera`, each paired with
/// a potential of half length `L = T·U(0.3, 1)` and `ε″ = U(0, 0.2)`, and
/// minimized.
pub fn criticality_sweep(seed: u64, count: u64, genera: &[u32]) -> Vec<(u64, Result<CriticalityRecord, BandError>)> {
    (0..count)
        .into_par_iter()
        .map(|index| {
            let mut rng = stream_rng(seed, index);
            let spec = random_band_spec(&mut rng, genera);
            let l = spec.half_width * rng.gen_range(0.3..1.0);
            let eps2 = rng.gen_range(0.0..0.2);
            let res = PotentialParams::three_dim(l, eps2).and_then(|potential| {
                let model = spec.build()?;
                let solution = minimize(&model, &potential)?;
                Ok(CriticalityRecord { index, spec: spec.clone(), potential, solution })
            });
            (index, res)
        })
        .collect()
}
