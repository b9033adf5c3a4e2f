use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use pbt_core::synth::helper_name;
use pbt_core::{
    evaluate, parse, solve_sequence, Library, Origin, PatternCorpus, SearchConfig, Variant,
};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const BENCH_COLUMNS: [&str; 8] = [
    "pattern_id",
    "variant",
    "solved",
    "program",
    "program_length",
    "nodes_expanded",
    "library_size_before",
    "wall_time_ms",
];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: unexpected header {found:?}")]
    Header { path: PathBuf, found: Vec<String> },
    #[error("{path}: {source}")]
    Sidecar {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub pattern_id: String,
    #[serde(serialize_with = "ser_variant", deserialize_with = "de_variant")]
    pub variant: Variant,
    pub solved: bool,
    pub program: Option<String>,
    pub program_length: Option<usize>,
    pub nodes_expanded: u64,
    pub library_size_before: usize,
    pub wall_time_ms: f64,
}

fn ser_variant<S: Serializer>(v: &Variant, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(v.name())
}

fn de_variant<'de, D: Deserializer<'de>>(d: D) -> Result<Variant, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub variant: String,
    pub max_nodes: u64,
    pub max_size: usize,
}

impl From<&SearchConfig> for ConfigEcho {
    fn from(c: &SearchConfig) -> Self {
        ConfigEcho {
            variant: c.variant.name().to_string(),
            max_nodes: c.max_nodes,
            max_size: c.max_size,
        }
    }
}

/// The JSON file written next to a report CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sidecar {
    pub corpus_digest: String,
    pub corpus_path: Option<String>,
    pub patterns: usize,
    pub configs: Vec<ConfigEcho>,
    pub columns: Vec<String>,
}

/// One row per (config, pattern), config-major, patterns in corpus order.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub configs: Vec<SearchConfig>,
    pub corpus_digest: String,
    pub corpus_path: Option<PathBuf>,
}

/// Runs every config over the corpus. Configs run on separate threads; the
/// row order does not depend on scheduling.
pub fn run_bench(corpus: &PatternCorpus, configs: &[SearchConfig]) -> BenchReport {
    let targets = corpus.canvases();
    let per_config: Vec<Vec<BenchRow>> = thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|config| {
                let targets = &targets;
                scope.spawn(move || {
                    solve_sequence(targets, config)
                        .into_iter()
                        .zip(&corpus.patterns)
                        .map(|(r, p)| BenchRow {
                            pattern_id: p.id.clone(),
                            variant: config.variant,
                            solved: r.solved,
                            program: r.program.as_ref().map(|e| e.to_string()),
                            program_length: r.program_length,
                            nodes_expanded: r.stats.nodes_expanded,
                            library_size_before: r.library_size,
                            wall_time_ms: r.stats.wall_time.as_secs_f64() * 1e3,
                        })
                        .collect()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("bench worker panicked"))
            .collect()
    });
    BenchReport {
        rows: per_config.into_iter().flatten().collect(),
        configs: configs.to_vec(),
        corpus_digest: corpus.digest(),
        corpus_path: corpus.source_path.clone(),
    }
}

impl BenchReport {
    pub fn rows_for(&self, variant: Variant) -> impl Iterator<Item = &BenchRow> {
        self.rows.iter().filter(move |r| r.variant == variant)
    }

    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows)
    }

    pub fn sidecar(&self) -> Sidecar {
        Sidecar {
            corpus_digest: self.corpus_digest.clone(),
            corpus_path: self.corpus_path.as_ref().map(|p| p.display().to_string()),
            patterns: self.rows.len().checked_div(self.configs.len()).unwrap_or(0),
            configs: self.configs.iter().map(ConfigEcho::from).collect(),
            columns: BENCH_COLUMNS.iter().map(|c| c.to_string()).collect(),
        }
    }

    /// Writes the CSV at `path` and the sidecar at the same path with a
    /// `.json` extension. Returns the sidecar path.
    pub fn write(&self, path: &Path) -> Result<PathBuf, ReportError> {
        write_file(path, &self.to_csv())?;
        let sidecar = sidecar_path(path);
        let json = serde_json::to_string_pretty(&self.sidecar()).expect("sidecar serializes");
        write_file(&sidecar, &(json + "\n"))?;
        Ok(sidecar)
    }
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

fn write_file(path: &Path, text: &str) -> Result<(), ReportError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| ReportError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(BENCH_COLUMNS).expect("in-memory write");
    for row in rows {
        w.write_record([
            row.pattern_id.clone(),
            row.variant.name().to_string(),
            row.solved.to_string(),
            row.program.clone().unwrap_or_default(),
            row.program_length
                .map(|n| n.to_string())
                .unwrap_or_default(),
            row.nodes_expanded.to_string(),
            row.library_size_before.to_string(),
            format!("{:.3}", row.wall_time_ms),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// Parses report CSV text. The header must match [`BENCH_COLUMNS`].
pub fn parse_report_csv(text: &str, path: &Path) -> Result<Vec<BenchRow>, ReportError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let csv_err = |source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let header: Vec<String> = r
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(String::from)
        .collect();
    if header != BENCH_COLUMNS {
        return Err(ReportError::Header {
            path: path.to_path_buf(),
            found: header,
        });
    }
    r.deserialize().collect::<Result<_, _>>().map_err(csv_err)
}

pub fn read_report_csv(path: &Path) -> Result<Vec<BenchRow>, ReportError> {
    let text = fs::read_to_string(path).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_report_csv(&text, path)
}

pub fn read_sidecar(csv_path: &Path) -> Result<Sidecar, ReportError> {
    let path = sidecar_path(csv_path);
    let text = fs::read_to_string(&path).map_err(|source| ReportError::Io {
        path: path.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| ReportError::Sidecar { path, source })
}

/// Report CSV text with the `wall_time_ms` column removed, for comparing
/// runs.
pub fn logical_csv(text: &str) -> String {
    text.lines()
        .map(|line| match line.rfind(',') {
            Some(i) => &line[..i],
            None => line,
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AuditError {
    #[error("{variant} {pattern_id}: unknown pattern")]
    UnknownPattern { variant: String, pattern_id: String },
    #[error(
        "{variant} {pattern_id}: program `{program}` does not re-evaluate to the target ({reason})"
    )]
    Mismatch {
        variant: String,
        pattern_id: String,
        program: String,
        reason: String,
    },
    #[error("{variant} {pattern_id}: library size {found}, expected {expected}")]
    LibrarySize {
        variant: String,
        pattern_id: String,
        expected: usize,
        found: usize,
    },
}

/// Re-evaluates every solved row against the library that row's search saw,
/// rebuilt from the report alone.
pub fn audit_report(rows: &[BenchRow], corpus: &PatternCorpus) -> Result<(), AuditError> {
    let mut libs: Vec<(Variant, Library)> = Vec::new();
    for row in rows {
        let lib = match libs.iter().position(|(v, _)| *v == row.variant) {
            Some(i) => &mut libs[i].1,
            None => {
                libs.push((row.variant, Library::default()));
                &mut libs.last_mut().expect("just pushed").1
            }
        };
        let err_ctx = (row.variant.name().to_string(), row.pattern_id.clone());
        let (index, pattern) = corpus
            .patterns
            .iter()
            .enumerate()
            .find(|(_, p)| p.id == row.pattern_id)
            .ok_or_else(|| AuditError::UnknownPattern {
                variant: err_ctx.0.clone(),
                pattern_id: err_ctx.1.clone(),
            })?;
        if lib.len() != row.library_size_before {
            return Err(AuditError::LibrarySize {
                variant: err_ctx.0,
                pattern_id: err_ctx.1,
                expected: lib.len(),
                found: row.library_size_before,
            });
        }
        let Some(text) = row.program.as_deref().filter(|_| row.solved) else {
            continue;
        };
        let mismatch = |reason: String| AuditError::Mismatch {
            variant: err_ctx.0.clone(),
            pattern_id: err_ctx.1.clone(),
            program: text.to_string(),
            reason,
        };
        let expr = parse(text).map_err(|e| mismatch(e.to_string()))?;
        let canvas = evaluate(&expr, lib).map_err(|e| mismatch(e.to_string()))?;
        if canvas != pattern.canvas {
            return Err(mismatch("different canvas".into()));
        }
        if row.variant.learns_library() {
            lib.push(
                helper_name(index + 1),
                pattern.canvas,
                Origin::Program(expr),
            )
            .map_err(|e| mismatch(e.to_string()))?;
        }
    }
    Ok(())
}
