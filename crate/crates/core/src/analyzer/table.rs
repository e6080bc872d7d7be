use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::store::{RecordKind, TraceLog};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComputeTimeRow {
    pub process: String,
    pub compute_time_s: f64,
    pub share_pct: f64,
    /// Suspends or resumes that could not be paired; only complete
    /// activations contribute to `compute_time_s`.
    pub unpaired: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComputeTable {
    /// Ascending by compute time.
    pub rows: Vec<ComputeTimeRow>,
    pub total: ComputeTimeRow,
    pub wall_time_s: f64,
}

pub fn share_pct(compute_s: f64, wall_s: f64) -> f64 {
    if wall_s > 0.0 {
        compute_s / wall_s * 100.0
    } else {
        0.0
    }
}

impl ComputeTable {
    /// Builds the table from per-process compute times and the wall span.
    pub fn from_times(times: impl IntoIterator<Item = (String, f64, usize)>, wall_time_s: f64) -> Self {
        let mut rows: Vec<ComputeTimeRow> = times
            .into_iter()
            .map(|(process, compute_time_s, unpaired)| ComputeTimeRow {
                share_pct: share_pct(compute_time_s, wall_time_s),
                process,
                compute_time_s,
                unpaired,
            })
            .collect();
        rows.sort_by(|a, b| {
            a.compute_time_s
                .total_cmp(&b.compute_time_s)
                .then_with(|| a.process.cmp(&b.process))
        });
        let total = ComputeTimeRow {
            process: "Total".to_owned(),
            compute_time_s: rows.iter().map(|r| r.compute_time_s).sum(),
            share_pct: rows.iter().map(|r| r.share_pct).sum(),
            unpaired: rows.iter().map(|r| r.unpaired).sum(),
        };
        ComputeTable {
            rows,
            total,
            wall_time_s,
        }
    }
}

/// Real time each process spent executing.
///
/// An activation starts at `PROC_ENTER` or `PROC_RESUME` and ends at the
/// process's next `PROC_SUSPEND`, at the next activation of any other
/// process (the kernel runs one process at a time, so a process that
/// returned without suspending stops there), or at `SIM_END`.
pub fn compute_time_table(log: &TraceLog) -> ComputeTable {
    let start = log
        .records
        .iter()
        .find(|r| r.kind == RecordKind::SimStart)
        .or(log.records.first())
        .map_or(0, |r| r.ts.real_ns);
    let end = log
        .records
        .iter()
        .rev()
        .find(|r| r.kind == RecordKind::SimEnd)
        .or(log.records.last())
        .map_or(0, |r| r.ts.real_ns);

    #[derive(Default)]
    struct Acc {
        ns: u64,
        unpaired: usize,
    }
    let mut acc: BTreeMap<u32, Acc> = log
        .names
        .iter()
        .filter(|(_, n)| !n.is_event)
        .map(|(id, _)| (*id, Acc::default()))
        .collect();
    let mut active: Option<(u32, u64)> = None;

    for rec in log.data_records() {
        let real = rec.ts.real_ns;
        match rec.kind {
            RecordKind::ProcEnter | RecordKind::ProcResume => {
                let pid = rec.subject_id;
                match active {
                    Some((other, since)) if other != pid => {
                        acc.entry(other).or_default().ns += real.saturating_sub(since);
                    }
                    // Activated twice without a suspend in between.
                    Some(_) => acc.entry(pid).or_default().unpaired += 1,
                    None => {}
                }
                active = Some((pid, real));
            }
            RecordKind::ProcSuspend => {
                let pid = rec.subject_id;
                match active {
                    Some((p, since)) if p == pid => {
                        acc.entry(pid).or_default().ns += real.saturating_sub(since);
                        active = None;
                    }
                    _ => acc.entry(pid).or_default().unpaired += 1,
                }
            }
            RecordKind::SimEnd => {
                if let Some((pid, since)) = active.take() {
                    acc.entry(pid).or_default().ns += real.saturating_sub(since);
                }
            }
            _ => {}
        }
    }

    let wall_s = end.saturating_sub(start) as f64 / 1e9;
    ComputeTable::from_times(
        acc.into_iter().map(|(id, a)| {
            (
                super::subject_name(log, id),
                a.ns as f64 / 1e9,
                a.unpaired,
            )
        }),
        wall_s,
    )
}
