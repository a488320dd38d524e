//! Configuration, reports and curve output for the `psc` command.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod plot;
pub mod report;
pub mod run;

pub use config::{Command, ConfigError, RunConfig};
pub use plot::{emit_plot_data, PlotError, Table};
pub use report::{write_report, Header, Report, ReportBody};
pub use run::{run, RunError, RunOutput};
