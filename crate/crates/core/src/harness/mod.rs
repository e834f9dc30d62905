//! Experiment configuration, the sweep runner and report emission.
//!
//! This is the only module that reads ground truth (replaced rows, the clean
//! sample); solvers see the corrupted data alone.

mod config;
mod report;
mod run;

pub use config::{DataConfig, DoroSettings, ExperimentConfig, Method, OutputConfig};
pub use report::{
    emit_report, median, read_report_csv, read_report_json, summarize, write_report, ReportFormat, SummaryRow, CSV_COLUMNS,
};
pub use run::{run_experiment, run_experiment_with_threads, worker_threads, MetricsRow, THREADS_ENV};
