use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pbt_core::corpus::{extend_library, load_geometry, parse_blocks};
use pbt_core::{
    evaluate, load_corpus, parse, solve, Canvas, Library, PrimitiveGeometry, SearchConfig, Variant,
};
use pbt_harness::{analyze_sessions, load_session_logs, read_report_csv, run_bench};
use pbt_server::{serve, shutdown_signal, AppState};
use pbt_session::SessionStore;

/// Pattern Builder toolkit: evaluate programs, run the search models,
/// benchmark them and serve the task.
#[derive(Debug, Parser)]
#[command(name = "pbt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a program and print its canvas and measures.
    Eval {
        program: String,
        #[command(flatten)]
        lib: LibraryArgs,
    },
    /// Search for a program that draws a target canvas.
    Synth {
        /// A 10-line canvas file, or a corpus-style file (first block used).
        target: PathBuf,
        #[arg(long, default_value = "short")]
        variant: Variant,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        lib: LibraryArgs,
    },
    /// Run search variants over a corpus and write a CSV report plus a
    /// JSON sidecar.
    Bench {
        corpus: PathBuf,
        /// Comma-separated variants.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "baseline,short,library,short_library"
        )]
        variants: Vec<Variant>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Aggregate session logs per pattern and relate them to a bench report.
    Analyze {
        /// Directory of `.jsonl` session logs.
        logs: PathBuf,
        /// Bench report CSV.
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Variant whose model measures are joined in.
        #[arg(long, default_value = "short_library")]
        join: Variant,
    },
    /// Print the patterns of a corpus file.
    Render {
        corpus: PathBuf,
        /// Only this pattern.
        #[arg(long)]
        id: Option<String>,
    },
    /// Serve the task API.
    Serve {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, env = "PBT_DATA_DIR", default_value = "sessions")]
        data_dir: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long, default_value_t = pbt_core::synth::DEFAULT_MAX_NODES)]
    max_nodes: u64,
    #[arg(long, default_value_t = pbt_core::synth::DEFAULT_MAX_SIZE)]
    max_size: usize,
}

#[derive(Debug, Args)]
struct LibraryArgs {
    /// Named canvases to add as helpers (corpus format).
    #[arg(long)]
    library: Option<PathBuf>,
    /// Replacement primitive geometry (corpus format, one block per primitive).
    #[arg(long)]
    geometry: Option<PathBuf>,
}

impl LibraryArgs {
    fn load(&self) -> Result<Library> {
        let geometry = match &self.geometry {
            Some(p) => load_geometry(p)?,
            None => PrimitiveGeometry::default(),
        };
        let mut lib = Library::with_geometry(&geometry);
        if let Some(p) = &self.library {
            let text = read(p)?;
            extend_library(&mut lib, &text).with_context(|| p.display().to_string())?;
        }
        Ok(lib)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Eval { program, lib } => {
            let lib = lib.load()?;
            let expr = parse(&program)?;
            let canvas = evaluate(&expr, &lib)?;
            let m = expr.measures();
            print!("{}", canvas.to_text());
            println!(
                "node_count={} leaf_count={} expanded_leaf_count={} depth={} cells={}",
                m.node_count,
                m.leaf_count,
                expr.expanded_leaf_count(&lib),
                m.depth,
                canvas.popcount()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth {
            target,
            variant,
            search,
            lib,
        } => {
            let lib = lib.load()?;
            let text = read(&target)?;
            let canvas = if text.trim_start().starts_with('=') {
                parse_blocks(&text)?[0].canvas
            } else {
                Canvas::from_text(&text).with_context(|| target.display().to_string())?
            };
            let config = SearchConfig::new(variant)
                .with_max_nodes(search.max_nodes)
                .with_max_size(search.max_size);
            let r = solve(canvas, &lib, &config);
            match &r.program {
                Some(p) => println!("program: {p}"),
                None => println!("program: (none)"),
            }
            if let Some(n) = r.program_length {
                println!("program_length: {n}");
            }
            println!("nodes_expanded: {}", r.stats.nodes_expanded);
            println!("strata_completed: {}", r.stats.strata_completed);
            println!("budget_exhausted: {}", r.budget_exhausted);
            println!("wall_time_ms: {:.3}", r.stats.wall_time.as_secs_f64() * 1e3);
            Ok(if r.solved {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Bench {
            corpus,
            variants,
            out,
            search,
        } => {
            if variants.is_empty() {
                bail!("no variants given");
            }
            let corpus = load_corpus(&corpus)?;
            let configs: Vec<SearchConfig> = variants
                .iter()
                .map(|&v| {
                    SearchConfig::new(v)
                        .with_max_nodes(search.max_nodes)
                        .with_max_size(search.max_size)
                })
                .collect();
            let report = run_bench(&corpus, &configs);
            let sidecar = report.write(&out)?;
            for v in &variants {
                let solved: Vec<&str> = report
                    .rows_for(*v)
                    .filter(|r| r.solved)
                    .map(|r| r.pattern_id.as_str())
                    .collect();
                println!(
                    "{:<14} solved {:>2}/{}: {}",
                    v.name(),
                    solved.len(),
                    corpus.len(),
                    solved.join(" ")
                );
            }
            println!("wrote {} and {}", out.display(), sidecar.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Analyze {
            logs,
            report,
            out,
            join,
        } => {
            let logs = load_session_logs(&logs)?;
            let rows = read_report_csv(&report)?;
            let analysis = analyze_sessions(&logs, &rows, join)?;
            fs::write(&out, analysis.to_csv())
                .with_context(|| format!("cannot write {}", out.display()))?;
            println!("{} sessions, {} patterns", logs.len(), analysis.rows.len());
            for line in analysis.summary() {
                println!("{line}");
            }
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Render { corpus, id } => {
            let corpus = load_corpus(&corpus)?;
            let mut shown = 0;
            for p in corpus
                .patterns
                .iter()
                .filter(|p| id.as_ref().is_none_or(|i| *i == p.id))
            {
                if shown > 0 {
                    println!();
                }
                println!("= {}", p.id);
                print!("{}", p.canvas.to_text());
                shown += 1;
            }
            if shown == 0 {
                bail!("no pattern `{}`", id.unwrap_or_default());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve {
            corpus,
            data_dir,
            port,
            host,
        } => {
            tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env()
                        .unwrap_or_else(|_| "info".into()),
                )
                .with_writer(std::io::stderr)
                .init();
            let corpus = Arc::new(load_corpus(&corpus)?);
            let store = SessionStore::open(&data_dir)?;
            let state = Arc::new(AppState::open(Some(corpus), store)?);
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port))
                    .await
                    .with_context(|| format!("cannot bind {host}:{port}"))?;
                let addr = listener.local_addr()?;
                println!("listening on http://{addr}");
                serve(listener, state, shutdown_signal()).await?;
                anyhow::Ok(())
            })?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
