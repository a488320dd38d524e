use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use psc_cli::config::{Command, ConfigError, RunConfig, SweepKind};
use psc_cli::plot::{emit_plot_data, PlotError};
use psc_cli::report::{write_report, Header, Report};
use psc_cli::run::{run, RunError};
use psc_core::band::PhiFamily;

const OUT_DIR_ENV: &str = "PSC_OUT_DIR";

/// Positive scalar curvature toolkit: warped circle bundles and
/// band/μ-bubble models.
#[derive(Parser, Debug)]
#[command(name = "psc", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [precedence: flag, config, $PSC_OUT_DIR, "."].
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Replace existing report and CSV files.
    #[arg(long, global = true)]
    overwrite: bool,
    /// RNG seed for sampling and sweeps.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also print the report body to stdout.
    #[arg(long, global = true)]
    print_body: bool,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Compare the closed-form bundle curvature with the chart oracle on a
    /// catalog entry.
    Verify {
        #[arg(long)]
        entry: Option<String>,
        #[command(flatten)]
        case: CaseArgs,
        /// Random points to sample.
        #[arg(long)]
        points: Option<usize>,
        /// Sampled t interval, as `LO,HI`.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        t_range: Option<Vec<f64>>,
    },
    /// Certify positive curvature of a case profile for all t ≥ 0.
    Certify {
        #[arg(long)]
        entry: Option<String>,
        #[command(flatten)]
        case: CaseArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Randomized band-width audit, μ-bubble sweep or threshold scan.
    Sweep {
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        /// Applicable models, solved models or coefficient values.
        #[arg(long)]
        models: Option<usize>,
        #[arg(long)]
        max_draws: Option<u64>,
        /// Fiber genera, comma separated.
        #[arg(long, value_delimiter = ',')]
        genera: Option<Vec<u32>>,
        #[arg(long)]
        doubling: bool,
        #[arg(long)]
        entry: Option<String>,
        #[command(flatten)]
        case: CaseArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Solve the μ-bubble problem on one band model.
    Band {
        #[arg(long)]
        genus: Option<u32>,
        #[arg(long)]
        fiber_area: Option<f64>,
        #[arg(long)]
        half_width: Option<f64>,
        /// Warp factor as a TOML inline table, e.g.
        /// `{ family = "cosh", amp = 1.0, rate = 0.5 }`.
        #[arg(long, value_parser = parse_phi)]
        phi: Option<PhiFamily>,
        /// Potential half length L (≤ half width).
        #[arg(long)]
        potential_half_length: Option<f64>,
        #[arg(long)]
        eps2: Option<f64>,
        #[arg(long)]
        doubling: bool,
        #[arg(long)]
        curve_points: Option<usize>,
    },
    /// List the built-in bundle catalog.
    Catalog,
    /// Test the area-growth hypothesis on sampled (r, A(r)) data.
    Hypothesis {
        /// One sample as `R,AREA`; repeat for more.
        #[arg(long = "sample", value_parser = parse_sample)]
        samples: Vec<[f64; 2]>,
        /// CSV file with header `r,area`.
        #[arg(long)]
        samples_csv: Option<PathBuf>,
        /// Generate A(r) = c·r² instead.
        #[arg(long)]
        coefficient: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
    },
    /// Run whatever command the --config file names.
    Run,
}

#[derive(Args, Debug)]
struct CaseArgs {
    /// Total dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Free profile coefficient.
    #[arg(long)]
    coeff: Option<f64>,
    /// Ω_∞ of a synthetic base with R_h = 0.
    #[arg(long)]
    omega_sup: Option<f64>,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Audit,
    Criticality,
    Threshold,
}

fn parse_phi(s: &str) -> Result<PhiFamily, String> {
    #[derive(serde::Deserialize)]
    struct Wrap {
        phi: PhiFamily,
    }
    toml::from_str::<Wrap>(&format!("phi = {s}")).map(|w| w.phi).map_err(|e| e.to_string())
}

fn parse_sample(s: &str) -> Result<[f64; 2], String> {
    let (r, a) = s.split_once(',').ok_or("expected R,AREA")?;
    Ok([r.trim().parse().map_err(|e| format!("{e}"))?, a.trim().parse().map_err(|e| format!("{e}"))?])
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Output(#[from] PlotError),
    #[error("{0}")]
    Usage(String),
}

fn apply_case(cfg: &mut RunConfig, entry: Option<String>, case: CaseArgs) {
    let c = &mut cfg.case;
    if entry.is_some() {
        c.entry = entry;
    }
    c.n = case.n.or(c.n);
    c.coeff = case.coeff.or(c.coeff);
    c.omega_sup = case.omega_sup.or(c.omega_sup);
}

fn apply_grid(cfg: &mut RunConfig, grid: GridArgs) {
    if let Some(t) = grid.t_max {
        cfg.case.t_max = t;
    }
    if let Some(g) = grid.grid_points {
        cfg.case.grid_points = g;
    }
}

fn sub_command(sub: &Sub) -> Option<Command> {
    Some(match sub {
        Sub::Verify { .. } => Command::Verify,
        Sub::Certify { .. } => Command::Certify,
        Sub::Sweep { .. } => Command::Sweep,
        Sub::Band { .. } => Command::Band,
        Sub::Catalog => Command::Catalog,
        Sub::Hypothesis { .. } => Command::Hypothesis,
        Sub::Run => return None,
    })
}

fn build_config(cli: Cli) -> Result<RunConfig, CliError> {
    let wanted = sub_command(&cli.command);
    let mut cfg = match (&cli.common.config, wanted) {
        (Some(path), _) => {
            let cfg = RunConfig::load(path)?;
            if let Some(cmd) = wanted {
                if cmd != cfg.command {
                    return Err(CliError::Usage(format!(
                        "{} is a `{}` configuration, not `{}`",
                        path.display(),
                        cfg.command.name(),
                        cmd.name()
                    )));
                }
            }
            cfg
        }
        (None, Some(cmd)) => RunConfig::new(cmd),
        (None, None) => return Err(CliError::Usage("`psc run` needs --config".into())),
    };
    if let Some(seed) = cli.common.seed {
        cfg.seed = seed;
    }
    if cli.common.overwrite {
        cfg.output.overwrite = true;
    }
    if let Some(dir) = cli.common.out_dir {
        cfg.output.dir = Some(dir);
    }
    match cli.command {
        Sub::Verify { entry, case, points, t_range } => {
            apply_case(&mut cfg, entry, case);
            if let Some(p) = points {
                cfg.case.points = p;
            }
            if let Some(r) = t_range {
                cfg.case.t_range = [r[0], r[1]];
            }
        }
        Sub::Certify { entry, case, grid } => {
            apply_case(&mut cfg, entry, case);
            apply_grid(&mut cfg, grid);
        }
        Sub::Sweep { kind, models, max_draws, genera, doubling, entry, case, grid } => {
            let s = &mut cfg.sweep;
            if let Some(k) = kind {
                s.kind = match k {
                    KindArg::Audit => SweepKind::Audit,
                    KindArg::Criticality => SweepKind::Criticality,
                    KindArg::Threshold => SweepKind::Threshold,
                };
            }
            s.models = models.unwrap_or(s.models);
            s.max_draws = max_draws.unwrap_or(s.max_draws);
            if let Some(g) = genera {
                s.genera = g;
            }
            s.doubling |= doubling;
            apply_case(&mut cfg, entry, case);
            apply_grid(&mut cfg, grid);
        }
        Sub::Band { genus, fiber_area, half_width, phi, potential_half_length, eps2, doubling, curve_points } => {
            let b = &mut cfg.band;
            b.genus = genus.unwrap_or(b.genus);
            b.fiber_area = fiber_area.unwrap_or(b.fiber_area);
            b.half_width = half_width.unwrap_or(b.half_width);
            if let Some(p) = phi {
                b.phi = p;
            }
            b.potential_half_length = potential_half_length.or(b.potential_half_length);
            b.eps2 = eps2.unwrap_or(b.eps2);
            b.doubling |= doubling;
            b.curve_points = curve_points.unwrap_or(b.curve_points);
        }
        Sub::Catalog | Sub::Run => {}
        Sub::Hypothesis { samples, samples_csv, coefficient, count } => {
            let h = &mut cfg.hypothesis;
            if !samples.is_empty() {
                h.samples = samples;
            }
            h.samples_csv = samples_csv.or(h.samples_csv.take());
            h.coefficient = coefficient.or(h.coefficient);
            h.count = count.or(h.count);
        }
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output
        .dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let print_body = cli.common.print_body;
    let cfg = build_config(cli)?;
    cfg.validate()?;
    let dir = out_dir(&cfg);
    let name = cfg.command.name();
    let report_path = dir.join(cfg.output.report.clone().unwrap_or_else(|| format!("{name}-report.json")));
    let csv_path = dir.join(cfg.output.csv.clone().unwrap_or_else(|| format!("{name}.csv")));
    let overwrite = cfg.output.overwrite;
    // Refuse before computing so a long sweep never ends in a clobber error.
    if !overwrite {
        for p in [&report_path, &csv_path] {
            if p.exists() {
                return Err(PlotError::Exists(p.display().to_string()).into());
            }
        }
    }
    let out = run(&cfg)?;
    std::fs::create_dir_all(&dir).map_err(|source| PlotError::Io { path: dir.display().to_string(), source })?;
    if let Some(table) = &out.curves {
        emit_plot_data(table, &csv_path, overwrite)?;
    }
    let report = Report { header: Header::now(), body: out.body };
    write_report(&report, &report_path, overwrite)?;
    // Files are already written; a closed stdout (e.g. `| head`) is not an error.
    let mut stdout = std::io::stdout().lock();
    if print_body {
        let _ = writeln!(stdout, "{}", report.body.to_json());
    }
    let verdict = if report.body.success { "ok" } else { "negative" };
    let _ = writeln!(stdout, "{verdict}: {}", report.body.summary);
    let _ = writeln!(stdout, "report: {}", display(&report_path));
    if out.curves.is_some() {
        let _ = writeln!(stdout, "curves: {}", display(&csv_path));
    }
    Ok(report.body.success)
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
