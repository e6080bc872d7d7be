//! `nistt`: analysis of trace logs and the overhead benchmark.
//!
//! Exit codes: 0 success, 1 output failure or failed benchmark, 2 malformed
//! trace log, 3 bad arguments.

mod output;

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nistt_core::analyzer::{
    compute_rtf, compute_time_table, event_timeline, quantum_points, wait_event_episodes,
    EventFilter, ProcessFilter, DEFAULT_BUCKET,
};
use nistt_core::harness::{
    run_benchmark, runs_csv, summarize, BenchConfig, Configuration, ReportFormat, WorkloadSpec,
};
use nistt_core::store::{import_csv, read_log, StoreError};
use nistt_core::{SimTime, TraceLog, TraceSelection};

#[derive(Parser, Debug)]
#[command(name = "nistt", version, about = "Analyze simulation trace logs and measure tracing overhead")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Real-time factor per sim-time bucket: `bucket_mid_s,rtf`.
    Rtf(RtfArgs),
    /// Quantum durations at each timed synchronization: `process,sim_ps,duration_ps`.
    Quantum(QuantumArgs),
    /// Event notifications: `event,kind,programmed_at_ps,fires_at_ps`.
    Events(EventsArgs),
    /// Wait-on-event episodes: `process,event,suspend_ps,resume_ps`.
    Episodes(Io),
    /// Per-process compute time: `process,compute_time_s,share_pct` plus a Total row.
    Table(Io),
    /// Every record as CSV: `kind,sim_ps,real_ns,subject,flags,aux`.
    Export(Io),
    /// Build a binary log from the CSV produced by `export`.
    Import(ImportArgs),
    /// Run a workload under the tracing configurations and report wall times.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct Io {
    /// Trace log to read.
    log: PathBuf,
    /// Emit JSON instead of CSV.
    #[arg(long)]
    json: bool,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RtfArgs {
    #[command(flatten)]
    io: Io,
    /// Sim-time bucket width.
    #[arg(long, default_value_t = DEFAULT_BUCKET)]
    bucket: SimTime,
}

#[derive(Args, Debug)]
struct QuantumArgs {
    #[command(flatten)]
    io: Io,
    /// Only this process (exact name).
    #[arg(long)]
    process: Option<String>,
}

#[derive(Args, Debug)]
struct EventsArgs {
    #[command(flatten)]
    io: Io,
    /// Only these events (exact names, comma separated or repeated).
    #[arg(long, value_delimiter = ',')]
    event: Vec<String>,
}

#[derive(Args, Debug)]
struct ImportArgs {
    csv: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Reference (untraced) workload binary; variants and the shim are
    /// looked up next to it.
    #[arg(long)]
    workload: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "reference,intrusive_static,intrusive_shared,nonintrusive_shared")]
    configs: Vec<Configuration>,
    /// One trace set per occurrence, e.g. `--traces none --traces quantum,event`.
    #[arg(long = "traces", default_value = "none")]
    traces: Vec<String>,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    #[arg(long, default_value_t = 2)]
    warmup: usize,
    /// Per-run CSV (`configuration,traces,run,wall_s,record_count`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary table destination; stdout when absent.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long, default_value = "text")]
    format: ReportFormat,
    /// Directory for per-run trace files.
    #[arg(long)]
    scratch: Option<PathBuf>,
    /// Arguments passed to the workload.
    #[arg(last = true)]
    args: Vec<String>,
}

enum Failure {
    Output(String),
    Format(String),
    Usage(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Output(_) => 1,
            Failure::Format(_) => 2,
            Failure::Usage(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Output(m) | Failure::Format(m) | Failure::Usage(m) => m,
        }
    }
}

fn store_failure(err: StoreError) -> Failure {
    if err.is_format_error() {
        Failure::Format(err.to_string())
    } else {
        Failure::Usage(err.to_string())
    }
}

fn load(path: &Path) -> Result<TraceLog, Failure> {
    let log = read_log(path).map_err(store_failure)?;
    if log.truncated {
        eprintln!("nistt: {}: log is truncated; using the complete records", path.display());
    }
    Ok(log)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    let result = match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => match io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
                Err(format!("cannot write output: {e}"))
            }
            _ => Ok(()),
        },
    };
    result.map_err(Failure::Output)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Rtf(args) => {
            if args.bucket == SimTime::ZERO {
                return Err(Failure::Usage("--bucket must be positive".into()));
            }
            let log = load(&args.io.log)?;
            let points = compute_rtf(&log, args.bucket);
            emit(args.io.out.as_deref(), &output::rtf(&points, args.io.json))
        }
        Command::Quantum(args) => {
            let log = load(&args.io.log)?;
            let filter = args.process.map_or(ProcessFilter::All, ProcessFilter::Named);
            let points = quantum_points(&log, &filter).map_err(|e| Failure::Usage(e.to_string()))?;
            emit(args.io.out.as_deref(), &output::quantum(&points, args.io.json))
        }
        Command::Events(args) => {
            let log = load(&args.io.log)?;
            let filter = if args.event.is_empty() {
                EventFilter::All
            } else {
                EventFilter::Names(args.event)
            };
            let entries = event_timeline(&log, &filter);
            emit(args.io.out.as_deref(), &output::events(&entries, args.io.json))
        }
        Command::Episodes(io) => {
            let log = load(&io.log)?;
            let episodes = wait_event_episodes(&log);
            emit(io.out.as_deref(), &output::episodes(&episodes, io.json))
        }
        Command::Table(io) => {
            let log = load(&io.log)?;
            let table = compute_time_table(&log);
            for row in table.rows.iter().filter(|r| r.unpaired > 0) {
                eprintln!("nistt: {}: {} unpaired records ignored", row.process, row.unpaired);
            }
            emit(io.out.as_deref(), &output::table(&table, io.json))
        }
        Command::Export(io) => {
            let log = load(&io.log)?;
            let text = output::export(&log, io.json).map_err(|e| Failure::Output(e.to_string()))?;
            emit(io.out.as_deref(), &text)
        }
        Command::Import(args) => {
            let file = File::open(&args.csv)
                .map_err(|e| Failure::Usage(format!("cannot open {}: {e}", args.csv.display())))?;
            let log = import_csv(BufReader::new(file)).map_err(|e| Failure::Format(e.to_string()))?;
            std::fs::write(&args.out, log.to_bytes())
                .map_err(|e| Failure::Output(format!("cannot write {}: {e}", args.out.display())))
        }
        Command::Bench(args) => bench(args),
    }
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let trace_sets = args
        .traces
        .iter()
        .map(|t| t.parse::<TraceSelection>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let scratch = args
        .scratch
        .unwrap_or_else(|| std::env::temp_dir().join(format!("nistt-bench-{}", std::process::id())));
    let workload = WorkloadSpec::discover(&args.workload).with_args(&args.args);
    let mut cfg = BenchConfig::new(workload, &scratch);
    cfg.configurations = args.configs;
    cfg.trace_sets = trace_sets;
    cfg.runs = args.runs;
    cfg.warmup = args.warmup;
    let result = run_benchmark(&cfg).map_err(|e| match e {
        nistt_core::harness::HarnessError::TooFewRuns(_)
        | nistt_core::harness::HarnessError::NoTraceSets
        | nistt_core::harness::HarnessError::MissingReference(_) => Failure::Usage(e.to_string()),
        other => Failure::Output(other.to_string()),
    })?;
    let _ = std::fs::remove_dir(&scratch);
    for warning in &result.warnings {
        eprintln!("nistt: {warning}");
    }
    if let Some(path) = &args.out {
        emit(Some(path), &runs_csv(&result))?;
    }
    emit(args.summary.as_deref(), &summarize(&result, args.format))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("nistt: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
