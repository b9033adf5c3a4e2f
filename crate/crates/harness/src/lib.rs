//! Model benchmarks over a pattern corpus and the statistics that compare
//! them with recorded human sessions.

pub mod analysis;
pub mod bench;
pub mod stats;

pub use analysis::{
    analyze_sessions, behavioral_records, load_session_logs, Analysis, AnalysisError, AnalysisRow,
    BehavioralRecord, Correlations, SessionLog, ANALYSIS_COLUMNS,
};
pub use bench::{
    audit_report, logical_csv, parse_report_csv, read_report_csv, read_sidecar, run_bench,
    sidecar_path, AuditError, BenchReport, BenchRow, ReportError, Sidecar, BENCH_COLUMNS,
};
pub use stats::{pearson, regress, regress_loglinear, LinearFit, StatsError};
