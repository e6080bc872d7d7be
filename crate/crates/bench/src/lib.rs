//! Synthetic inputs shared by the benchmarks.

use nistt_core::store::{Header, NameEntry, FLAG_EVENT_NAME, FLAG_EVENT_REASON};
use nistt_core::{RecordKind, SimTime, TimeStamp, TraceLog, TraceRecord};

/// A log shaped like a traced `busy`-style run: one CPU process syncing
/// every `quantum`, plus a timer that raises an interrupt every tenth sync.
/// Real time advances 5 ns per simulated microsecond.
pub fn synthetic_log(syncs: u64, quantum: SimTime) -> TraceLog {
    let mut log = TraceLog::new(Header::new(0));
    let real = |sim: u64| sim / 200_000;
    let push = |log: &mut TraceLog, kind, sim: u64, subject, aux, flags| {
        log.records.push(
            TraceRecord::new(kind, TimeStamp::new(SimTime::from_ps(sim), real(sim)), subject, aux)
                .with_flags(flags),
        );
    };
    push(&mut log, RecordKind::SimStart, 0, 0, 0, 0);
    for (id, text, is_event) in [(1, "cpu", false), (2, "timer", false), (3, "irq", true)] {
        let flags = if is_event { FLAG_EVENT_NAME } else { 0 };
        push(&mut log, RecordKind::NameDef, 0, id, text.len() as u64, flags);
        log.names.insert(id, NameEntry { text: text.into(), is_event });
    }
    push(&mut log, RecordKind::ProcEnter, 0, 1, 0, 0);
    push(&mut log, RecordKind::ProcEnter, 0, 2, 0, 0);
    push(&mut log, RecordKind::ProcSuspend, 0, 2, 3, FLAG_EVENT_REASON);
    let q = quantum.as_ps();
    for i in 0..syncs {
        let at = i * q;
        push(&mut log, RecordKind::ProcSuspend, at, 1, q, 0);
        push(&mut log, RecordKind::ProcResume, at + q, 1, q, 0);
        if i % 10 == 9 {
            push(&mut log, RecordKind::NotifyImmediate, at + q, 3, 0, 0);
        }
    }
    push(&mut log, RecordKind::SimEnd, syncs * q, 0, 0, 0);
    log
}
