//! CSV and JSON renderings of analyzer results. Sim times are integer
//! picoseconds, except `bucket_mid_s`, which is exact seconds.

use std::fmt::Write as _;
use std::io;

use nistt_core::analyzer::{ComputeTable, QuantumPoint, RtfPoint, TimelineEntry, WaitEpisode};
use nistt_core::store::{export_csv, NO_SUBJECT};
use nistt_core::{RecordKind, SimTime, TraceLog};
use serde::Serialize;

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    text
}

/// Exact decimal seconds of a sim time.
pub fn secs(t: SimTime) -> String {
    let ps = t.as_ps();
    format!("{}.{:012}", ps / 1_000_000_000_000, ps % 1_000_000_000_000)
}

#[derive(Serialize)]
struct RtfRow {
    bucket_mid_s: f64,
    rtf: f64,
}

pub fn rtf(points: &[RtfPoint], as_json: bool) -> String {
    if as_json {
        let rows: Vec<_> = points
            .iter()
            .map(|p| RtfRow {
                bucket_mid_s: p.bucket_mid.as_secs_f64(),
                rtf: p.rtf,
            })
            .collect();
        return json(&rows);
    }
    let mut out = String::from("bucket_mid_s,rtf\n");
    for p in points {
        let _ = writeln!(out, "{},{}", secs(p.bucket_mid), p.rtf);
    }
    out
}

#[derive(Serialize)]
struct QuantumRow<'a> {
    process: &'a str,
    sim_ps: u64,
    duration_ps: u64,
}

pub fn quantum(points: &[QuantumPoint], as_json: bool) -> String {
    let rows: Vec<_> = points
        .iter()
        .map(|p| QuantumRow {
            process: &p.process,
            sim_ps: p.at.as_ps(),
            duration_ps: p.duration.as_ps(),
        })
        .collect();
    if as_json {
        return json(&rows);
    }
    let mut out = String::from("process,sim_ps,duration_ps\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.process, r.sim_ps, r.duration_ps);
    }
    out
}

#[derive(Serialize)]
struct EventRow<'a> {
    event: &'a str,
    kind: &'static str,
    programmed_at_ps: u64,
    fires_at_ps: u64,
}

fn event_rows(entries: &[TimelineEntry]) -> Vec<EventRow<'_>> {
    let mut rows = Vec::new();
    for entry in entries {
        let mut these: Vec<EventRow> = entry
            .instants
            .iter()
            .map(|t| EventRow {
                event: &entry.event,
                kind: "instant",
                programmed_at_ps: t.as_ps(),
                fires_at_ps: t.as_ps(),
            })
            .chain(entry.spans.iter().map(|s| EventRow {
                event: &entry.event,
                kind: "delayed",
                programmed_at_ps: s.programmed_at.as_ps(),
                fires_at_ps: s.fires_at.as_ps(),
            }))
            .collect();
        these.sort_by_key(|r| (r.programmed_at_ps, r.kind == "delayed", r.fires_at_ps));
        rows.extend(these);
    }
    rows
}

pub fn events(entries: &[TimelineEntry], as_json: bool) -> String {
    if as_json {
        return json(entries);
    }
    let mut out = String::from("event,kind,programmed_at_ps,fires_at_ps\n");
    for r in event_rows(entries) {
        let _ = writeln!(out, "{},{},{},{}", r.event, r.kind, r.programmed_at_ps, r.fires_at_ps);
    }
    out
}

#[derive(Serialize)]
struct EpisodeRow<'a> {
    process: &'a str,
    event: &'a str,
    suspend_ps: u64,
    resume_ps: Option<u64>,
}

pub fn episodes(episodes: &[WaitEpisode], as_json: bool) -> String {
    let rows: Vec<_> = episodes
        .iter()
        .map(|e| EpisodeRow {
            process: &e.process,
            event: &e.event,
            suspend_ps: e.suspended_at.as_ps(),
            resume_ps: e.resumed_at.map(SimTime::as_ps),
        })
        .collect();
    if as_json {
        return json(&rows);
    }
    let mut out = String::from("process,event,suspend_ps,resume_ps\n");
    for r in rows {
        let resume = r.resume_ps.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{}", r.process, r.event, r.suspend_ps, resume);
    }
    out
}

pub fn table(table: &ComputeTable, as_json: bool) -> String {
    if as_json {
        return json(table);
    }
    let mut out = String::from("process,compute_time_s,share_pct\n");
    for row in table.rows.iter().chain(std::iter::once(&table.total)) {
        let _ = writeln!(out, "{},{:.6},{:.6}", row.process, row.compute_time_s, row.share_pct);
    }
    out
}

#[derive(Serialize)]
struct RecordRow<'a> {
    kind: &'static str,
    sim_ps: u64,
    real_ns: u64,
    subject_id: u32,
    subject: Option<&'a str>,
    flags: u8,
    aux: u64,
}

pub fn export(log: &TraceLog, as_json: bool) -> io::Result<String> {
    if as_json {
        let rows: Vec<_> = log
            .records
            .iter()
            .map(|r| RecordRow {
                kind: r.kind.as_str(),
                sim_ps: r.ts.sim.as_ps(),
                real_ns: r.ts.real_ns,
                subject_id: r.subject_id,
                subject: match (r.kind, r.subject_id) {
                    (RecordKind::SimStart | RecordKind::SimEnd, NO_SUBJECT) => None,
                    (_, id) => log.name(id),
                },
                flags: r.flags,
                aux: r.aux,
            })
            .collect();
        return Ok(json(&rows));
    }
    let mut buf = Vec::new();
    let summary = export_csv(log, &mut buf)?;
    if summary.unresolved > 0 {
        eprintln!("nistt: {} records reference undefined names", summary.unresolved);
    }
    Ok(String::from_utf8(buf).expect("export writes UTF-8"))
}
