//! Record-per-row CSV dialect: `kind,sim_ps,real_ns,subject,flags,aux`.
//!
//! `subject` holds the resolved name (empty for `SIM_START`/`SIM_END`, and
//! `#<id>` when the id was never defined). Name ids are not written; import
//! assigns ids to `NAME_DEF` rows in order of appearance starting at 1, which
//! reproduces every log produced by the recorder.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use super::format::{
    Header, RecordKind, TimeStamp, TraceRecord, FLAG_EVENT_NAME, NO_SUBJECT,
};
use super::reader::{NameEntry, TraceLog};
use super::StoreError;
use crate::time::SimTime;

pub const CSV_HEADER: &str = "kind,sim_ps,real_ns,subject,flags,aux";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExportSummary {
    pub rows: usize,
    /// Rows whose subject id had no name definition.
    pub unresolved: usize,
}

pub fn export_csv(log: &TraceLog, out: impl Write) -> io::Result<ExportSummary> {
    let mut out = io::BufWriter::new(out);
    let mut summary = ExportSummary::default();
    writeln!(out, "{CSV_HEADER}")?;
    for rec in &log.records {
        let kind = rec.kind.as_str();
        let (sim, real, flags, aux) = (rec.ts.sim.as_ps(), rec.ts.real_ns, rec.flags, rec.aux);
        let subject_less = matches!(rec.kind, RecordKind::SimStart | RecordKind::SimEnd)
            && rec.subject_id == NO_SUBJECT;
        if subject_less {
            writeln!(out, "{kind},{sim},{real},,{flags},{aux}")?;
        } else if let Some(name) = log.name(rec.subject_id) {
            writeln!(out, "{kind},{sim},{real},{name},{flags},{aux}")?;
        } else {
            summary.unresolved += 1;
            writeln!(out, "{kind},{sim},{real},#{},{flags},{aux}", rec.subject_id)?;
        }
        summary.rows += 1;
    }
    out.flush()?;
    Ok(summary)
}

/// Rebuilds a log from exported CSV (the header's anchor is not part of the
/// CSV and comes back as zero).
pub fn import_csv(input: impl BufRead) -> Result<TraceLog, StoreError> {
    let mut log = TraceLog::new(Header::new(0));
    // Separate namespaces: the record kind says which one a subject lives in.
    let mut processes: HashMap<String, u32> = HashMap::new();
    let mut events: HashMap<String, u32> = HashMap::new();
    let mut next_id = 1u32;

    for (index, line) in input.lines().enumerate() {
        let line = line.map_err(|source| StoreError::Io {
            path: "<csv>".into(),
            source,
        })?;
        let line_no = index + 1;
        if index == 0 {
            if line != CSV_HEADER {
                return Err(StoreError::Csv {
                    line: line_no,
                    message: format!("expected header `{CSV_HEADER}`"),
                });
            }
            continue;
        }
        let bad = |message: &str| StoreError::Csv {
            line: line_no,
            message: message.to_owned(),
        };
        let fields: Vec<&str> = line.split(',').collect();
        let [kind, sim, real, subject, flags, aux] = fields[..] else {
            return Err(bad("expected 6 fields"));
        };
        let kind = RecordKind::parse(kind).ok_or_else(|| bad("unknown kind"))?;
        let sim: u64 = sim.parse().map_err(|_| bad("bad sim_ps"))?;
        let real: u64 = real.parse().map_err(|_| bad("bad real_ns"))?;
        let flags: u8 = flags.parse().map_err(|_| bad("bad flags"))?;
        let mut aux: u64 = aux.parse().map_err(|_| bad("bad aux"))?;

        let subject_id = if kind == RecordKind::NameDef {
            let id = next_id;
            next_id += 1;
            let is_event = flags & FLAG_EVENT_NAME != 0;
            let table = if is_event { &mut events } else { &mut processes };
            table.insert(subject.to_owned(), id);
            aux = subject.len() as u64;
            log.names.insert(
                id,
                NameEntry {
                    text: subject.to_owned(),
                    is_event,
                },
            );
            id
        } else if subject.is_empty() {
            NO_SUBJECT
        } else if let Some(raw) = subject.strip_prefix('#') {
            raw.parse().map_err(|_| bad("bad placeholder id"))?
        } else {
            let table = if kind.subject_is_event() {
                &events
            } else {
                &processes
            };
            *table.get(subject).ok_or_else(|| bad("undefined subject name"))?
        };
        log.records.push(TraceRecord {
            kind,
            flags,
            ts: TimeStamp::new(SimTime::from_ps(sim), real),
            subject_id,
            aux,
        });
    }
    Ok(log)
}
