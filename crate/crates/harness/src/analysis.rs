use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use pbt_core::{parse, Variant};
use pbt_session::{EventBody, SessionEvent};
use thiserror::Error;

use crate::bench::BenchRow;
use crate::stats::{pearson, regress_loglinear, LinearFit, StatsError};

pub const ANALYSIS_COLUMNS: [&str; 8] = [
    "pattern_id",
    "n_sessions",
    "mean_steps",
    "mean_time_s",
    "mean_helper_use_rate",
    "mean_helpers_created",
    "nodes_expanded",
    "program_length",
];

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("{name}, line {line}: {message}")]
    Log {
        name: String,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A session log and a name to report errors against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionLog {
    pub name: String,
    pub text: String,
}

/// Reads every `.jsonl` file in `dir`, sorted by name.
pub fn load_session_logs(dir: &Path) -> Result<Vec<SessionLog>, AnalysisError> {
    let io = |source| AnalysisError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.extension().is_some_and(|e| e == "jsonl") {
            paths.push(path);
        }
    }
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let text = fs::read_to_string(&path).map_err(|source| AnalysisError::Io {
                path: path.clone(),
                source,
            })?;
            Ok(SessionLog {
                name: path.display().to_string(),
                text,
            })
        })
        .collect()
}

/// One participant's attempt at one pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct BehavioralRecord {
    pub session_id: String,
    pub pattern_id: String,
    pub steps: usize,
    /// Steps whose program names a saved helper.
    pub helper_steps: usize,
    /// From `trial_started` to `submitted`.
    pub solution_time_us: u64,
    pub accuracy: bool,
    pub helpers_created: usize,
}

impl BehavioralRecord {
    pub fn solution_time_s(&self) -> f64 {
        self.solution_time_us as f64 / 1e6
    }

    pub fn helper_use_rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.helper_steps as f64 / self.steps as f64
        }
    }
}

#[derive(Default)]
struct Trial {
    started: u64,
    steps: usize,
    helper_steps: usize,
    helpers_created: usize,
}

/// Extracts one record per submitted trial from a log.
pub fn behavioral_records(log: &SessionLog) -> Result<Vec<BehavioralRecord>, AnalysisError> {
    let err = |line: usize, message: String| AnalysisError::Log {
        name: log.name.clone(),
        line,
        message,
    };
    let mut records = Vec::new();
    let mut trial: Option<Trial> = None;
    for (i, line) in log.text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 1;
        let event: SessionEvent =
            serde_json::from_str(line).map_err(|e| err(line_no, e.to_string()))?;
        match event.body {
            EventBody::TrialStarted { trial_id, .. } => {
                trial = trial_id.map(|_| Trial {
                    started: event.ts,
                    ..Trial::default()
                });
            }
            EventBody::StepAdded { program, .. } => {
                let expr = parse(&program).map_err(|e| err(line_no, e.to_string()))?;
                if let Some(t) = trial.as_mut() {
                    t.steps += 1;
                    if !expr.helper_refs().is_empty() {
                        t.helper_steps += 1;
                    }
                }
            }
            EventBody::HelperSaved { .. } => {
                if let Some(t) = trial.as_mut() {
                    t.helpers_created += 1;
                }
            }
            EventBody::Submitted {
                trial_id, accuracy, ..
            } => {
                let t = trial
                    .take()
                    .ok_or_else(|| err(line_no, "submission outside a trial".into()))?;
                if event.ts < t.started {
                    return Err(err(line_no, "submission precedes its trial".into()));
                }
                records.push(BehavioralRecord {
                    session_id: event.session_id,
                    pattern_id: trial_id,
                    steps: t.steps,
                    helper_steps: t.helper_steps,
                    solution_time_us: event.ts - t.started,
                    accuracy,
                    helpers_created: t.helpers_created,
                });
            }
            _ => {}
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRow {
    pub pattern_id: String,
    pub n_sessions: usize,
    pub mean_steps: f64,
    pub mean_time_s: f64,
    pub mean_helper_use_rate: f64,
    pub mean_helpers_created: f64,
    /// From the joined model variant; absent if the report lacks the pattern.
    pub nodes_expanded: Option<u64>,
    pub program_length: Option<usize>,
}

/// Human measures against model measures across patterns the model solved.
#[derive(Debug, Clone, PartialEq)]
pub struct Correlations {
    pub steps_vs_log_nodes: Result<LinearFit, StatsError>,
    pub time_vs_log_nodes: Result<LinearFit, StatsError>,
    pub steps_vs_program_length: Result<f64, StatsError>,
    pub time_vs_program_length: Result<f64, StatsError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub rows: Vec<AnalysisRow>,
    pub correlations: Correlations,
    pub join_variant: Variant,
}

/// Per-pattern means over all submitted trials, joined with `join`'s rows
/// of the bench report. Row order follows the report, then pattern id.
pub fn analyze_sessions(
    logs: &[SessionLog],
    report: &[BenchRow],
    join: Variant,
) -> Result<Analysis, AnalysisError> {
    let mut records = Vec::new();
    for log in logs {
        records.extend(behavioral_records(log)?);
    }
    let mut by_pattern: BTreeMap<&str, Vec<&BehavioralRecord>> = BTreeMap::new();
    for r in &records {
        by_pattern.entry(r.pattern_id.as_str()).or_default().push(r);
    }
    let model: Vec<&BenchRow> = report.iter().filter(|r| r.variant == join).collect();
    let mut order: Vec<&str> = model.iter().map(|r| r.pattern_id.as_str()).collect();
    order.extend(
        by_pattern
            .keys()
            .filter(|k| !order.contains(k))
            .copied()
            .collect::<Vec<_>>(),
    );

    let rows: Vec<AnalysisRow> = order
        .into_iter()
        .filter_map(|id| {
            let recs = by_pattern.get(id)?;
            let n = recs.len() as u128;
            let mean = |f: &dyn Fn(&BehavioralRecord) -> u64| {
                recs.iter().map(|r| f(r) as u128).sum::<u128>() as f64 / n as f64
            };
            let m = model.iter().find(|r| r.pattern_id == id);
            Some(AnalysisRow {
                pattern_id: id.to_string(),
                n_sessions: recs
                    .iter()
                    .map(|r| &r.session_id)
                    .collect::<BTreeSet<_>>()
                    .len(),
                mean_steps: mean(&|r| r.steps as u64),
                mean_time_s: recs
                    .iter()
                    .map(|r| r.solution_time_us as u128)
                    .sum::<u128>() as f64
                    / (n * 1_000_000) as f64,
                mean_helper_use_rate: mean_rate(recs),
                mean_helpers_created: mean(&|r| r.helpers_created as u64),
                nodes_expanded: m.map(|r| r.nodes_expanded),
                program_length: m.and_then(|r| r.program_length),
            })
        })
        .collect();
    Ok(Analysis {
        correlations: correlate(&rows),
        rows,
        join_variant: join,
    })
}

/// Mean of per-record helper-use fractions, summed as an exact fraction and
/// rounded once, so the result does not depend on record order.
fn mean_rate(recs: &[&BehavioralRecord]) -> f64 {
    fn gcd(a: u128, b: u128) -> u128 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let exact = recs.iter().try_fold((0u128, 1u128), |(num, den), r| {
        if r.steps == 0 {
            return Some((num, den));
        }
        let (a, b) = (r.helper_steps as u128, r.steps as u128);
        let g = gcd(den, b);
        let lcm = (den / g).checked_mul(b)?;
        let num = num
            .checked_mul(lcm / den)?
            .checked_add(a.checked_mul(lcm / b)?)?;
        let g = gcd(num, lcm).max(1);
        Some((num / g, lcm / g))
    });
    let n = recs.len() as f64;
    match exact {
        // Both parts are exact in f64 below 2^53, so the quotient is
        // correctly rounded.
        Some((num, den))
            if den
                .checked_mul(recs.len() as u128)
                .is_some_and(|d| d < 1 << 53)
                && num < 1 << 53 =>
        {
            num as f64 / (den * recs.len() as u128) as f64
        }
        _ => recs.iter().map(|r| r.helper_use_rate()).sum::<f64>() / n,
    }
}

fn correlate(rows: &[AnalysisRow]) -> Correlations {
    let solved: Vec<(&AnalysisRow, u64, usize)> = rows
        .iter()
        .filter_map(|r| Some((r, r.nodes_expanded?, r.program_length?)))
        .collect();
    let nodes: Vec<f64> = solved.iter().map(|s| s.1 as f64).collect();
    let lengths: Vec<f64> = solved.iter().map(|s| s.2 as f64).collect();
    let steps: Vec<f64> = solved.iter().map(|s| s.0.mean_steps).collect();
    let times: Vec<f64> = solved.iter().map(|s| s.0.mean_time_s).collect();
    Correlations {
        steps_vs_log_nodes: regress_loglinear(&nodes, &steps),
        time_vs_log_nodes: regress_loglinear(&nodes, &times),
        steps_vs_program_length: pearson(&lengths, &steps),
        time_vs_program_length: pearson(&lengths, &times),
    }
}

impl Analysis {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(ANALYSIS_COLUMNS).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.pattern_id.clone(),
                r.n_sessions.to_string(),
                r.mean_steps.to_string(),
                r.mean_time_s.to_string(),
                r.mean_helper_use_rate.to_string(),
                r.mean_helpers_created.to_string(),
                r.nodes_expanded.map(|n| n.to_string()).unwrap_or_default(),
                r.program_length.map(|n| n.to_string()).unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    /// Human-readable correlation lines.
    pub fn summary(&self) -> Vec<String> {
        let fit = |label: &str, f: &Result<LinearFit, StatsError>| match f {
            Ok(f) => format!(
                "{label}: r = {:.4}, slope = {:.4}, intercept = {:.4}",
                f.r, f.slope, f.intercept
            ),
            Err(e) => format!("{label}: undefined ({e})"),
        };
        let r = |label: &str, v: &Result<f64, StatsError>| match v {
            Ok(v) => format!("{label}: r = {v:.4}"),
            Err(e) => format!("{label}: undefined ({e})"),
        };
        let c = &self.correlations;
        vec![
            fit("mean steps ~ log10(nodes expanded)", &c.steps_vs_log_nodes),
            fit("mean time ~ log10(nodes expanded)", &c.time_vs_log_nodes),
            r("mean steps ~ program length", &c.steps_vs_program_length),
            r("mean time ~ program length", &c.time_vs_program_length),
        ]
    }
}
