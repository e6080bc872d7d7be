//! Record emission shared by the preloaded shim and the intrusive kernel
//! build, so both produce the same record sequence for the same run.

use std::path::PathBuf;

use crate::category::{TraceCategory, TraceSelection};
use crate::store::{
    RecordKind, TimeStamp, TraceRecord, Writer, WriterOptions, DEFAULT_FLUSH_EVERY,
    FLAG_EVENT_NAME, FLAG_EVENT_REASON, NO_SUBJECT,
};
use crate::time::SimTime;

pub const ENV_DB_PATH: &str = "NISTT_DB_PATH";
pub const ENV_TRACE: &str = "NISTT_TRACE";
pub const ENV_FLUSH_EVERY: &str = "NISTT_FLUSH_EVERY";
pub const DEFAULT_DB_PATH: &str = "./nistt_trace.bin";

/// Raw `CLOCK_MONOTONIC` reading in nanoseconds.
pub fn monotonic_ns() -> u64 {
    let mut ts = libc::timespec {
        tv_sec: 0,
        tv_nsec: 0,
    };
    // SAFETY: valid out-pointer; CLOCK_MONOTONIC is always available on Linux.
    unsafe { libc::clock_gettime(libc::CLOCK_MONOTONIC, &mut ts) };
    ts.tv_sec as u64 * 1_000_000_000 + ts.tv_nsec as u64
}

/// Prints a diagnostic on the side channel (stderr).
pub fn diagnostic(message: &str) {
    eprintln!("nistt: {message}");
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecorderConfig {
    pub db_path: PathBuf,
    pub traces: TraceSelection,
    pub flush_every: usize,
}

impl Default for RecorderConfig {
    fn default() -> Self {
        RecorderConfig {
            db_path: PathBuf::from(DEFAULT_DB_PATH),
            traces: TraceSelection::ALL,
            flush_every: DEFAULT_FLUSH_EVERY,
        }
    }
}

impl RecorderConfig {
    pub fn from_env() -> (RecorderConfig, Vec<String>) {
        Self::from_lookup(|key| std::env::var(key).ok())
    }

    /// Builds a config from an environment lookup. Invalid values fall back
    /// to defaults and are reported in the returned diagnostics.
    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> (RecorderConfig, Vec<String>) {
        let mut config = RecorderConfig::default();
        let mut problems = Vec::new();
        if let Some(path) = lookup(ENV_DB_PATH).filter(|p| !p.is_empty()) {
            config.db_path = PathBuf::from(path);
        }
        if let Some(list) = lookup(ENV_TRACE) {
            let (traces, unknown) = TraceSelection::parse_lenient(&list);
            config.traces = traces;
            problems.extend(unknown.into_iter().map(|u| format!("{ENV_TRACE}: {u}")));
        }
        if let Some(raw) = lookup(ENV_FLUSH_EVERY) {
            match raw.trim().parse::<usize>() {
                Ok(n) if n > 0 => config.flush_every = n,
                _ => problems.push(format!(
                    "{ENV_FLUSH_EVERY}: `{raw}` is not a positive integer, using {DEFAULT_FLUSH_EVERY}"
                )),
            }
        }
        (config, problems)
    }
}

/// Looks up names the first time an id is referenced.
pub trait NameSource {
    fn process_name(&self, pid: u32) -> String;
    fn event_name(&self, event: u32) -> String;
}

/// Emits trace records into a store.
///
/// Failures never surface to the caller: an I/O error prints one
/// diagnostic and turns the recorder inert.
pub struct Recorder {
    writer: Option<Writer>,
    traces: TraceSelection,
    anchor_ns: u64,
    last_sim: SimTime,
    process_names: Vec<u32>,
    event_names: Vec<u32>,
    next_name: u32,
}

impl Recorder {
    /// Opens the store and writes `SIM_START`.
    pub fn open(config: &RecorderConfig) -> Recorder {
        let anchor_ns = monotonic_ns();
        let options = WriterOptions {
            flush_every: config.flush_every,
            anchor_real_ns: anchor_ns,
        };
        let writer = match Writer::create(&config.db_path, options) {
            Ok(w) => Some(w),
            Err(e) => {
                diagnostic(&format!("tracing disabled: {e}"));
                None
            }
        };
        let mut recorder = Recorder {
            writer,
            traces: config.traces,
            anchor_ns,
            last_sim: SimTime::ZERO,
            process_names: Vec::new(),
            event_names: Vec::new(),
            next_name: 1,
        };
        recorder.emit(TraceRecord::new(
            RecordKind::SimStart,
            TimeStamp::new(SimTime::ZERO, 0),
            NO_SUBJECT,
            0,
        ));
        recorder
    }

    pub fn inert() -> Recorder {
        Recorder {
            writer: None,
            traces: TraceSelection::NONE,
            anchor_ns: 0,
            last_sim: SimTime::ZERO,
            process_names: Vec::new(),
            event_names: Vec::new(),
            next_name: 1,
        }
    }

    pub fn is_active(&self) -> bool {
        self.writer.is_some()
    }

    pub fn traces(&self) -> TraceSelection {
        self.traces
    }

    /// Whether the category is enabled and the store is writable.
    pub fn wants(&self, category: TraceCategory) -> bool {
        self.writer.is_some() && self.traces.contains(category)
    }

    pub fn record_count(&self) -> u64 {
        self.writer.as_ref().map_or(0, Writer::record_count)
    }

    fn stamp(&self, sim: SimTime) -> TimeStamp {
        TimeStamp::new(sim, monotonic_ns().saturating_sub(self.anchor_ns))
    }

    fn emit(&mut self, record: TraceRecord) {
        if let Some(writer) = self.writer.as_mut() {
            if let Err(e) = writer.append(&record) {
                diagnostic(&format!("tracing stopped: {e}"));
                self.writer = None;
            }
        }
        self.last_sim = record.ts.sim;
    }

    fn intern(&mut self, sim: SimTime, index: u32, is_event: bool, text: impl FnOnce() -> String) -> u32 {
        let table = if is_event {
            &mut self.event_names
        } else {
            &mut self.process_names
        };
        let slot = index as usize;
        if let Some(&id) = table.get(slot).filter(|id| **id != NO_SUBJECT) {
            return id;
        }
        if table.len() <= slot {
            table.resize(slot + 1, NO_SUBJECT);
        }
        let id = self.next_name;
        self.next_name += 1;
        table[slot] = id;
        let flags = if is_event { FLAG_EVENT_NAME } else { 0 };
        let text = text();
        let ts = self.stamp(sim);
        if let Some(writer) = self.writer.as_mut() {
            if let Err(e) = writer.append_name(ts, id, flags, &text) {
                diagnostic(&format!("tracing stopped: {e}"));
                self.writer = None;
            }
        }
        id
    }

    fn process_id(&mut self, sim: SimTime, pid: u32, names: &dyn NameSource) -> u32 {
        self.intern(sim, pid, false, || names.process_name(pid))
    }

    fn event_id(&mut self, sim: SimTime, event: u32, names: &dyn NameSource) -> u32 {
        self.intern(sim, event, true, || names.event_name(event))
    }

    pub fn process_enter(&mut self, sim: SimTime, pid: u32, names: &dyn NameSource) {
        if !self.wants(TraceCategory::Process) {
            return;
        }
        let subject = self.process_id(sim, pid, names);
        let ts = self.stamp(sim);
        self.emit(TraceRecord::new(RecordKind::ProcEnter, ts, subject, 0));
    }

    pub fn suspend_time(&mut self, sim: SimTime, pid: u32, duration: SimTime, names: &dyn NameSource) {
        self.time_wait(RecordKind::ProcSuspend, sim, pid, duration, names);
    }

    pub fn resume_time(&mut self, sim: SimTime, pid: u32, duration: SimTime, names: &dyn NameSource) {
        self.time_wait(RecordKind::ProcResume, sim, pid, duration, names);
    }

    fn time_wait(
        &mut self,
        kind: RecordKind,
        sim: SimTime,
        pid: u32,
        duration: SimTime,
        names: &dyn NameSource,
    ) {
        if !self.wants(TraceCategory::Quantum) {
            return;
        }
        let subject = self.process_id(sim, pid, names);
        let ts = self.stamp(sim);
        self.emit(TraceRecord::new(kind, ts, subject, duration.as_ps()));
    }

    pub fn suspend_event(&mut self, sim: SimTime, pid: u32, event: u32, names: &dyn NameSource) {
        self.event_wait(RecordKind::ProcSuspend, sim, pid, event, names);
    }

    pub fn resume_event(&mut self, sim: SimTime, pid: u32, event: u32, names: &dyn NameSource) {
        self.event_wait(RecordKind::ProcResume, sim, pid, event, names);
    }

    fn event_wait(
        &mut self,
        kind: RecordKind,
        sim: SimTime,
        pid: u32,
        event: u32,
        names: &dyn NameSource,
    ) {
        if !self.wants(TraceCategory::WaitEvent) {
            return;
        }
        let subject = self.process_id(sim, pid, names);
        let event_id = self.event_id(sim, event, names);
        let ts = self.stamp(sim);
        self.emit(
            TraceRecord::new(kind, ts, subject, u64::from(event_id)).with_flags(FLAG_EVENT_REASON),
        );
    }

    pub fn notify(&mut self, sim: SimTime, event: u32, delay: SimTime, names: &dyn NameSource) {
        if !self.wants(TraceCategory::Event) {
            return;
        }
        let subject = self.event_id(sim, event, names);
        let kind = if delay == SimTime::ZERO {
            RecordKind::NotifyImmediate
        } else {
            RecordKind::NotifyDelayed
        };
        let ts = self.stamp(sim);
        self.emit(TraceRecord::new(kind, ts, subject, delay.as_ps()));
    }

    /// Writes `SIM_END`, flushes and closes the store. Later calls are no-ops.
    pub fn finish(&mut self, sim: SimTime) {
        let sim = sim.max(self.last_sim);
        let ts = self.stamp(sim);
        self.emit(TraceRecord::new(RecordKind::SimEnd, ts, NO_SUBJECT, 0));
        if let Some(writer) = self.writer.take() {
            if let Err(e) = writer.close() {
                diagnostic(&format!("closing trace store failed: {e}"));
            }
        }
    }
}
