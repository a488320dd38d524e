//! Run configuration. Files are TOML; unknown keys are rejected and every
//! command-line flag overrides the matching field.

use std::fs;
use std::path::{Path, PathBuf};

use psc_core::band::{BandSpec, PhiFamily};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Verify,
    Certify,
    Sweep,
    Band,
    Catalog,
    Hypothesis,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Verify => "verify",
            Self::Certify => "certify",
            Self::Sweep => "sweep",
            Self::Band => "band",
            Self::Catalog => "catalog",
            Self::Hypothesis => "hypothesis",
        }
    }
}

/// Warped circle-bundle parameters (`verify`, `certify`, threshold sweeps).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CaseConfig {
    /// Catalog entry name; when set, `n` and `omega_sup` come from it.
    pub entry: Option<String>,
    /// Total dimension.
    pub n: Option<usize>,
    /// Free coefficient `a₀` / `ε` of the case profile (dimensionless).
    pub coeff: Option<f64>,
    /// `Ω_∞` for a synthetic base with `R_h ≡ 0`, `|Ω| ≡ Ω_∞`.
    pub omega_sup: Option<f64>,
    /// Right end of the certification grid in `t`.
    pub t_max: f64,
    pub grid_points: usize,
    /// Random total-space points for `verify`.
    pub points: usize,
    /// `t` range sampled by `verify`.
    pub t_range: [f64; 2],
}

impl Default for CaseConfig {
    fn default() -> Self {
        Self {
            entry: None,
            n: None,
            coeff: None,
            omega_sup: None,
            t_max: 100.0,
            grid_points: 1001,
            points: 50,
            t_range: [0.0, 5.0],
        }
    }
}

/// Band model and potential (`band`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandConfig {
    pub genus: u32,
    /// Area of the fiber surface.
    pub fiber_area: f64,
    /// Band is `t ∈ [−half_width, half_width]`.
    pub half_width: f64,
    pub phi: PhiFamily,
    /// Potential half length `L`; defaults to `half_width`.
    pub potential_half_length: Option<f64>,
    /// `ε″ ≥ 0`.
    pub eps2: f64,
    pub doubling: bool,
    /// Samples of the curve table.
    pub curve_points: usize,
}

impl Default for BandConfig {
    fn default() -> Self {
        Self {
            genus: 1,
            fiber_area: 1.0,
            half_width: 1.0,
            phi: PhiFamily::Constant { amp: 1.0 },
            potential_half_length: None,
            eps2: 0.0,
            doubling: false,
            curve_points: 401,
        }
    }
}

impl BandConfig {
    pub fn spec(&self) -> BandSpec {
        BandSpec { half_width: self.half_width, genus: self.genus, fiber_area: self.fiber_area, phi: self.phi.clone() }
    }

    pub fn half_length(&self) -> f64 {
        self.potential_half_length.unwrap_or(self.half_width)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Randomized band-width audit.
    Audit,
    /// Randomized μ-bubble solves.
    Criticality,
    /// Free coefficient swept across `(0, 2·threshold)`.
    Threshold,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub kind: SweepKind,
    /// Applicable models (audit), solved models (criticality) or
    /// coefficient values (threshold).
    pub models: usize,
    /// Cap on draws for the audit sweep.
    pub max_draws: u64,
    pub genera: Vec<u32>,
    pub doubling: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { kind: SweepKind::Audit, models: 1000, max_draws: 200_000, genera: vec![1, 2, 3], doubling: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HypothesisConfig {
    /// Inline `(r, A(r))` pairs.
    pub samples: Vec<[f64; 2]>,
    /// CSV file with header `r,area`.
    pub samples_csv: Option<PathBuf>,
    /// Generate `A(r) = c·r²` at `r = 1, …, count` instead.
    pub coefficient: Option<f64>,
    pub count: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Report file name; default `<command>-report.json`.
    pub report: Option<String>,
    /// Curve file name; default `<command>.csv`.
    pub csv: Option<String>,
    pub overwrite: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub case: CaseConfig,
    #[serde(default)]
    pub band: BandConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub hypothesis: HypothesisConfig,
    #[serde(default, skip_serializing)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            seed: 0,
            case: CaseConfig::default(),
            band: BandConfig::default(),
            sweep: SweepConfig::default(),
            hypothesis: HypothesisConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: origin.to_path_buf(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::from_toml_str(&text, path)
    }

    /// Checks the fields the selected command uses.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let c = &self.case;
        match self.command {
            Command::Verify => {
                if c.entry.is_none() {
                    return Err(invalid("case.entry", "verify needs a catalog entry"));
                }
                if c.points == 0 {
                    return Err(invalid("case.points", "must be positive"));
                }
                if !(c.t_range[0] >= 0.0 && c.t_range[1] > c.t_range[0]) {
                    return Err(invalid("case.t_range", format!("{:?} is not an interval in [0, ∞)", c.t_range)));
                }
            }
            Command::Certify => {
                if c.entry.is_none() && c.n.is_none() {
                    return Err(invalid("case.n", "give a dimension or a catalog entry"));
                }
                if !(c.t_max > 0.0 && c.t_max.is_finite()) {
                    return Err(invalid("case.t_max", format!("{} must be positive", c.t_max)));
                }
                if c.grid_points < 2 {
                    return Err(invalid("case.grid_points", "need at least 2"));
                }
            }
            Command::Sweep => {
                if self.sweep.models == 0 {
                    return Err(invalid("sweep.models", "must be positive"));
                }
                match self.sweep.kind {
                    SweepKind::Threshold => {
                        if c.n.is_none() && c.entry.is_none() {
                            return Err(invalid("case.n", "threshold sweeps need a dimension or entry"));
                        }
                    }
                    _ => {
                        if self.sweep.genera.is_empty() || self.sweep.genera.contains(&0) {
                            return Err(invalid("sweep.genera", "need a nonempty list of genera ≥ 1"));
                        }
                    }
                }
            }
            Command::Band => {
                let b = &self.band;
                if b.genus < 1 {
                    return Err(invalid("band.genus", "must be at least 1"));
                }
                if !(b.fiber_area > 0.0) {
                    return Err(invalid("band.fiber_area", "must be positive"));
                }
                if !(b.half_width > 0.0) {
                    return Err(invalid("band.half_width", "must be positive"));
                }
                let l = b.half_length();
                if !(l > 0.0 && l <= b.half_width) {
                    return Err(invalid("band.potential_half_length", format!("L = {l} must lie in (0, half_width]")));
                }
                if !(b.eps2 >= 0.0) {
                    return Err(invalid("band.eps2", "must be ≥ 0"));
                }
                if b.curve_points < 2 {
                    return Err(invalid("band.curve_points", "need at least 2"));
                }
            }
            Command::Catalog => {}
            Command::Hypothesis => {
                let h = &self.hypothesis;
                let sources = [!h.samples.is_empty(), h.samples_csv.is_some(), h.coefficient.is_some()];
                if sources.iter().filter(|&&s| s).count() != 1 {
                    return Err(invalid("hypothesis", "give exactly one of `samples`, `samples_csv` or `coefficient`"));
                }
            }
        }
        if let Some(w) = c.omega_sup {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(invalid("case.omega_sup", format!("{w} must be finite and ≥ 0")));
            }
        }
        if let Some(a) = c.coeff {
            if !(a > 0.0 && a.is_finite()) {
                return Err(invalid("case.coeff", format!("{a} must be positive")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_band_file() {
        let text = r#"
            command = "band"
            seed = 7
            [band]
            genus = 2
            fiber_area = 12.5
            half_width = 0.8
            eps2 = 0.05
            phi = { family = "cosh", amp = 1.0, rate = 0.5 }
        "#;
        let cfg = RunConfig::from_toml_str(text, Path::new("inline")).unwrap();
        assert_eq!(cfg.command, Command::Band);
        assert_eq!(cfg.band.phi, PhiFamily::Cosh { amp: 1.0, rate: 0.5 });
        assert_eq!(cfg.band.half_length(), 0.8);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = RunConfig::from_toml_str("command = \"catalog\"\ncolour = 3\n", Path::new("x")).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
        let err = RunConfig::from_toml_str("command = \"band\"\n[band]\nwidth = 3\n", Path::new("x")).unwrap_err();
        assert!(err.to_string().contains("width"), "{err}");
    }

    #[test]
    fn validation_names_the_field() {
        let mut cfg = RunConfig::new(Command::Band);
        cfg.band.potential_half_length = Some(2.0);
        match cfg.validate() {
            Err(ConfigError::Invalid { field, .. }) => assert_eq!(field, "band.potential_half_length"),
            other => panic!("{other:?}"),
        }
        let cfg = RunConfig::new(Command::Hypothesis);
        assert!(cfg.validate().is_err());
    }
}
