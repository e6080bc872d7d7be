#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nistt_core::store::{read_log, NameEntry};
use nistt_core::TraceRecord;

pub const TRACED_SYMBOLS: &str = include_str!("../../../kernel/traced_symbols.txt");

/// The three builds of one workload.
#[derive(Clone, Copy, Debug)]
pub struct Workload {
    pub name: &'static str,
    pub reference: &'static str,
    pub intrusive_static: &'static str,
    pub intrusive_shared: &'static str,
}

pub const WORKLOADS: [Workload; 3] = [
    Workload {
        name: "busy",
        reference: env!("CARGO_BIN_EXE_busy"),
        intrusive_static: env!("CARGO_BIN_EXE_busy-intrusive-static"),
        intrusive_shared: env!("CARGO_BIN_EXE_busy-intrusive-shared"),
    },
    Workload {
        name: "timer_idle",
        reference: env!("CARGO_BIN_EXE_timer_idle"),
        intrusive_static: env!("CARGO_BIN_EXE_timer_idle-intrusive-static"),
        intrusive_shared: env!("CARGO_BIN_EXE_timer_idle-intrusive-shared"),
    },
    Workload {
        name: "periph",
        reference: env!("CARGO_BIN_EXE_periph"),
        intrusive_static: env!("CARGO_BIN_EXE_periph-intrusive-static"),
        intrusive_shared: env!("CARGO_BIN_EXE_periph-intrusive-shared"),
    },
];

pub fn workload(name: &str) -> Workload {
    *WORKLOADS.iter().find(|w| w.name == name).expect("bundled workload")
}

fn deps_dir() -> PathBuf {
    Path::new(WORKLOADS[0].reference)
        .parent()
        .expect("binary directory")
        .join("deps")
}

pub fn shim_path() -> PathBuf {
    deps_dir().join("libnistt_shim.so")
}

pub fn kernel_so_path() -> PathBuf {
    deps_dir().join("libltsim.so")
}

pub fn traced_symbols() -> Vec<String> {
    let mut names: Vec<String> = TRACED_SYMBOLS
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect();
    names.sort();
    names
}

/// How a run is traced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tracing<'a> {
    Off,
    /// Environment for the recorder, without preloading.
    Env { traces: &'a str, db: &'a Path },
    /// Shim preloaded with this trace set.
    Shim { traces: &'a str, db: &'a Path },
}

pub fn run(binary: &str, args: &[&str], tracing: Tracing) -> Output {
    let mut cmd = Command::new(binary);
    cmd.args(args)
        .env_remove("LD_PRELOAD")
        .env_remove("NISTT_TRACE")
        .env_remove("NISTT_DB_PATH")
        .env_remove("NISTT_FLUSH_EVERY");
    match tracing {
        Tracing::Off => {}
        Tracing::Env { traces, db } => {
            cmd.env("NISTT_TRACE", traces).env("NISTT_DB_PATH", db);
        }
        Tracing::Shim { traces, db } => {
            cmd.env("NISTT_TRACE", traces)
                .env("NISTT_DB_PATH", db)
                .env("LD_PRELOAD", shim_path());
        }
    }
    cmd.output().unwrap_or_else(|e| panic!("cannot run {binary}: {e}"))
}

/// Digest line `key=value` from a workload's stdout.
pub fn digest_value(out: &Output, key: &str) -> Option<u64> {
    let text = String::from_utf8_lossy(&out.stdout);
    let prefix = format!("{key}=");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .and_then(|v| v.parse().ok())
}

/// A log with every real-time field cleared.
#[derive(Debug, PartialEq, Eq)]
pub struct SimView {
    pub records: Vec<TraceRecord>,
    pub names: BTreeMap<u32, NameEntry>,
    pub truncated: bool,
}

pub fn sim_view(path: &Path) -> SimView {
    let log = read_log(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    SimView {
        records: log
            .records
            .iter()
            .map(|r| {
                let mut r = *r;
                r.ts.real_ns = 0;
                r
            })
            .collect(),
        names: log.names,
        truncated: log.truncated,
    }
}

/// Global dynamic symbols a shared object defines.
pub fn exported_symbols(path: &Path) -> Vec<String> {
    use object::{Object, ObjectSymbol};
    let data = std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let file = object::File::parse(&*data).expect("shared object parses");
    let mut names: Vec<String> = file
        .dynamic_symbols()
        .filter(|s| s.is_definition() && s.is_global())
        .filter_map(|s| s.name().ok().map(str::to_owned))
        .collect();
    names.sort();
    names.dedup();
    names
}
