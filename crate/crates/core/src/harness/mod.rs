//! Overhead study: runs a workload under the four tracing configurations,
//! each run in a fresh process, and reports wall-time statistics.

mod report;
mod stats;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::category::TraceSelection;
use crate::recorder::{ENV_DB_PATH, ENV_TRACE};
use crate::store::{read_log, StoreError};

pub use report::{runs_csv, summarize, summary_rows, ReportFormat, SummaryRow, RUNS_CSV_HEADER};
pub use stats::{bootstrap_median_diff, median, Interval, Summary};

pub const PRELOAD_VAR: &str = "LD_PRELOAD";
pub const SHIM_FILE_NAME: &str = "libnistt_shim.so";
pub const STATIC_SUFFIX: &str = "-intrusive-static";
pub const SHARED_SUFFIX: &str = "-intrusive-shared";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Configuration {
    /// Untraced, dynamically linked.
    Reference,
    /// Tracing built into a statically linked kernel.
    IntrusiveStatic,
    /// Tracing built into the shared kernel library.
    IntrusiveShared,
    /// Untraced binary with the interposition shim preloaded.
    NonintrusiveShared,
}

impl Configuration {
    pub const ALL: [Configuration; 4] = [
        Configuration::Reference,
        Configuration::IntrusiveStatic,
        Configuration::IntrusiveShared,
        Configuration::NonintrusiveShared,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Configuration::Reference => "reference",
            Configuration::IntrusiveStatic => "intrusive_static",
            Configuration::IntrusiveShared => "intrusive_shared",
            Configuration::NonintrusiveShared => "nonintrusive_shared",
        }
    }

    fn traced(self) -> bool {
        self != Configuration::Reference
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Configuration {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Configuration::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| HarnessError::UnknownConfiguration(s.to_owned()))
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown configuration `{0}` (expected reference, intrusive_static, intrusive_shared or nonintrusive_shared)")]
    UnknownConfiguration(String),
    #[error("at least 3 measured runs are needed for statistics, got {0}")]
    TooFewRuns(usize),
    #[error("no trace sets given")]
    NoTraceSets,
    #[error("reference binary {0} does not exist")]
    MissingReference(PathBuf),
    #[error("failed to spawn {path}: {source}")]
    Spawn {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{configuration}/{traces}: workload failed twice in a row ({status})")]
    WorkloadFailed {
        configuration: Configuration,
        traces: TraceSelection,
        status: String,
    },
    #[error("reference run produced a trace file at {0}")]
    ReferenceTraced(PathBuf),
    #[error("reading trace of {configuration}/{traces}: {source}")]
    Trace {
        configuration: Configuration,
        traces: TraceSelection,
        #[source]
        source: StoreError,
    },
    #[error("scratch directory {path}: {source}")]
    Scratch {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Binaries implementing each configuration of one workload.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub reference: PathBuf,
    pub intrusive_static: Option<PathBuf>,
    pub intrusive_shared: Option<PathBuf>,
    pub shim: Option<PathBuf>,
    pub args: Vec<OsString>,
}

impl WorkloadSpec {
    /// Looks for `<name>-intrusive-static`, `<name>-intrusive-shared` and
    /// the shim library next to the reference binary.
    pub fn discover(reference: impl Into<PathBuf>) -> WorkloadSpec {
        let reference = reference.into();
        let dir = reference.parent().unwrap_or(Path::new(".")).to_path_buf();
        let stem = reference
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let existing = |p: PathBuf| p.is_file().then_some(p);
        WorkloadSpec {
            intrusive_static: existing(dir.join(format!("{stem}{STATIC_SUFFIX}"))),
            intrusive_shared: existing(dir.join(format!("{stem}{SHARED_SUFFIX}"))),
            shim: existing(dir.join(SHIM_FILE_NAME))
                .or_else(|| existing(dir.join("deps").join(SHIM_FILE_NAME))),
            reference,
            args: Vec::new(),
        }
    }

    pub fn with_args<I, S>(mut self, args: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<OsString>,
    {
        self.args = args.into_iter().map(Into::into).collect();
        self
    }

    fn binary(&self, configuration: Configuration) -> Option<&Path> {
        match configuration {
            Configuration::Reference => Some(&self.reference),
            Configuration::IntrusiveStatic => self.intrusive_static.as_deref(),
            Configuration::IntrusiveShared => self.intrusive_shared.as_deref(),
            Configuration::NonintrusiveShared => self.shim.as_ref().map(|_| self.reference.as_path()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub workload: WorkloadSpec,
    pub configurations: Vec<Configuration>,
    pub trace_sets: Vec<TraceSelection>,
    pub runs: usize,
    pub warmup: usize,
    /// Where per-run trace files go; removed after each run is read.
    pub scratch_dir: PathBuf,
}

impl BenchConfig {
    pub fn new(workload: WorkloadSpec, scratch_dir: impl Into<PathBuf>) -> Self {
        BenchConfig {
            workload,
            configurations: Configuration::ALL.to_vec(),
            trace_sets: vec![TraceSelection::NONE],
            runs: 20,
            warmup: 2,
            scratch_dir: scratch_dir.into(),
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.runs < 3 {
            return Err(HarnessError::TooFewRuns(self.runs));
        }
        if self.trace_sets.is_empty() {
            return Err(HarnessError::NoTraceSets);
        }
        if !self.workload.reference.is_file() {
            return Err(HarnessError::MissingReference(self.workload.reference.clone()));
        }
        Ok(())
    }
}

/// Measurements of one (configuration, trace set) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub configuration: Configuration,
    pub traces: TraceSelection,
    /// Post-warmup wall times in seconds, in run order.
    pub wall_s: Vec<f64>,
    pub summary: Summary,
    /// Records in the trace file of the last measured run.
    pub record_count: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub cells: Vec<CellResult>,
    pub warnings: Vec<String>,
}

impl BenchResult {
    pub fn cell(&self, configuration: Configuration, traces: TraceSelection) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.configuration == configuration && c.traces == traces)
    }
}

struct Cell {
    configuration: Configuration,
    traces: TraceSelection,
    binary: PathBuf,
    wall_s: Vec<f64>,
    record_count: u64,
}

/// Runs the grid. Rounds are interleaved (every cell runs once per round)
/// so slow drift of the machine affects all cells alike; runs never overlap.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchResult, HarnessError> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.scratch_dir).map_err(|source| HarnessError::Scratch {
        path: cfg.scratch_dir.clone(),
        source,
    })?;

    let mut result = BenchResult::default();
    let mut cells: Vec<Cell> = Vec::new();
    for &configuration in &cfg.configurations {
        let Some(binary) = cfg.workload.binary(configuration) else {
            result
                .warnings
                .push(format!("{configuration}: binary not available, skipped"));
            continue;
        };
        if !binary.is_file() {
            result
                .warnings
                .push(format!("{configuration}: {} not found, skipped", binary.display()));
            continue;
        }
        for &traces in &cfg.trace_sets {
            cells.push(Cell {
                configuration,
                traces,
                binary: binary.to_path_buf(),
                wall_s: Vec::with_capacity(cfg.runs),
                record_count: 0,
            });
        }
    }

    for round in 0..cfg.warmup + cfg.runs {
        for (index, cell) in cells.iter_mut().enumerate() {
            let trace_path = cfg.scratch_dir.join(format!("cell{index}-round{round}.bin"));
            let wall = run_once(cfg, cell, &trace_path)?;
            let record_count = collect_trace(cell, &trace_path)?;
            if round >= cfg.warmup {
                cell.wall_s.push(wall);
                cell.record_count = record_count;
            }
        }
    }

    result.cells = cells
        .into_iter()
        .map(|c| CellResult {
            summary: Summary::of(&c.wall_s),
            configuration: c.configuration,
            traces: c.traces,
            wall_s: c.wall_s,
            record_count: c.record_count,
        })
        .collect();
    Ok(result)
}

fn command_for(cfg: &BenchConfig, cell: &Cell, trace_path: &Path) -> Command {
    let mut cmd = Command::new(&cell.binary);
    cmd.args(&cfg.workload.args)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .env_remove(PRELOAD_VAR)
        .env(ENV_DB_PATH, trace_path)
        .env(ENV_TRACE, cell.traces.to_string());
    if cell.configuration == Configuration::NonintrusiveShared {
        if let Some(shim) = &cfg.workload.shim {
            cmd.env(PRELOAD_VAR, shim);
        }
    }
    cmd
}

fn run_once(cfg: &BenchConfig, cell: &Cell, trace_path: &Path) -> Result<f64, HarnessError> {
    let mut last_status = String::new();
    for _attempt in 0..2 {
        let _ = std::fs::remove_file(trace_path);
        let mut cmd = command_for(cfg, cell, trace_path);
        let started = Instant::now();
        let status = cmd.status().map_err(|source| HarnessError::Spawn {
            path: cell.binary.clone(),
            source,
        })?;
        let wall = started.elapsed().as_secs_f64();
        if status.success() {
            return Ok(wall);
        }
        last_status = status.to_string();
    }
    Err(HarnessError::WorkloadFailed {
        configuration: cell.configuration,
        traces: cell.traces,
        status: last_status,
    })
}

fn collect_trace(cell: &Cell, trace_path: &Path) -> Result<u64, HarnessError> {
    if !cell.configuration.traced() {
        if trace_path.exists() {
            return Err(HarnessError::ReferenceTraced(trace_path.to_path_buf()));
        }
        return Ok(0);
    }
    let log = read_log(trace_path).map_err(|source| HarnessError::Trace {
        configuration: cell.configuration,
        traces: cell.traces,
        source,
    })?;
    let _ = std::fs::remove_file(trace_path);
    Ok(log.records.len() as u64)
}
