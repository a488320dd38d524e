//! Report documents. A report is a mutable `header` (tool version and
//! timestamp) and a deterministic `body`: the same configuration and seed
//! always serialize to the same body bytes.

use std::path::Path;

use psc_core::band::sweep::{AuditRecord, CriticalityRecord};
use psc_core::band::{AuditOutcome, HypothesisVerdict, MuBubbleSolution, StabilityReport};
use psc_core::bundle::{PositivityCertificate, Threshold};
use psc_core::catalog::EntryDescription;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::plot::{write_new, PlotError};

/// Bumped whenever the body layout changes; never decreases.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub tool_version: String,
    /// RFC 3339, UTC.
    pub timestamp: String,
}

impl Header {
    pub fn now() -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub header: Header,
    pub body: ReportBody,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportBody {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub config: RunConfig,
    /// Whether the verdict is positive (exit code 0) or not (exit code 2).
    pub success: bool,
    pub summary: String,
    pub results: Results,
}

impl ReportBody {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report bodies serialize")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementRow {
    pub point: Vec<f64>,
    pub closed_form: f64,
    pub oracle: f64,
    pub oracle_error_estimate: f64,
    pub relative_discrepancy: f64,
    /// Discrepancy when the curvature-form term carries `a²/(2b⁴)`.
    pub relative_discrepancy_doubled_form: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyResult {
    pub entry: String,
    pub n: usize,
    pub coeff: f64,
    pub tolerance: f64,
    pub max_relative_discrepancy: f64,
    pub max_relative_discrepancy_doubled_form: f64,
    pub rows: Vec<AgreementRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyResult {
    pub base: String,
    /// Absent when the profile has no free coefficient.
    pub threshold: Option<Threshold>,
    pub certificate: PositivityCertificate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditSweepResult {
    pub distributions: String,
    pub draws: u64,
    pub applicable: usize,
    pub violations: usize,
    pub rejected: Vec<(u64, String)>,
    pub violating_models: Vec<AuditRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalitySweepResult {
    pub distributions: String,
    pub solved: usize,
    pub failures: Vec<(u64, String)>,
    pub max_criticality_residual: f64,
    pub min_second_derivative: f64,
    pub max_gauss_bonnet_error: f64,
    pub records: Vec<CriticalityRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSweepResult {
    pub n: usize,
    pub omega_sup: f64,
    pub threshold: Threshold,
    /// Last coefficient with a positive bound at `t = 0` and the next one.
    pub sign_change: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandResult {
    pub fiber_scalar: f64,
    pub min_scalar: f64,
    pub solution: MuBubbleSolution,
    pub stability: StabilityReport,
    pub audit: AuditOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisResult {
    pub samples: usize,
    pub threshold: f64,
    pub verdict: HypothesisVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Results {
    Verify(VerifyResult),
    Certify(CertifyResult),
    AuditSweep(AuditSweepResult),
    CriticalitySweep(CriticalitySweepResult),
    ThresholdSweep(ThresholdSweepResult),
    Band(BandResult),
    Catalog { entries: Vec<EntryDescription> },
    Hypothesis(HypothesisResult),
}

/// Writes the report as pretty JSON without replacing an existing file
/// unless `overwrite` is set.
pub fn write_report(report: &Report, path: &Path, overwrite: bool) -> Result<(), PlotError> {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    write_new(path, text.as_bytes(), overwrite)
}
