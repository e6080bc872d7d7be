use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::store::{RecordKind, TraceLog};
use crate::time::SimTime;

/// A delayed notification: programmed at one instant to fire at another.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub programmed_at: SimTime,
    pub fires_at: SimTime,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub event: String,
    /// Immediate notifications.
    pub instants: Vec<SimTime>,
    pub spans: Vec<Span>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum EventFilter {
    #[default]
    All,
    /// Exact names; names absent from the log yield empty entries.
    Names(Vec<String>),
}

/// Notifications per event, ordered by first definition (or by the filter's
/// order when names are given).
pub fn event_timeline(log: &TraceLog, filter: &EventFilter) -> Vec<TimelineEntry> {
    let mut by_name: BTreeMap<&str, TimelineEntry> = BTreeMap::new();
    let mut order: Vec<&str> = Vec::new();
    for (_, name) in log.names.iter().filter(|(_, n)| n.is_event) {
        if !by_name.contains_key(name.text.as_str()) {
            order.push(&name.text);
            by_name.insert(
                &name.text,
                TimelineEntry {
                    event: name.text.clone(),
                    ..TimelineEntry::default()
                },
            );
        }
    }

    for rec in &log.records {
        let Some(name) = log.names.get(&rec.subject_id).filter(|n| n.is_event) else {
            continue;
        };
        let entry = by_name.get_mut(name.text.as_str()).expect("event names registered");
        match rec.kind {
            RecordKind::NotifyImmediate => entry.instants.push(rec.ts.sim),
            RecordKind::NotifyDelayed => entry.spans.push(Span {
                programmed_at: rec.ts.sim,
                fires_at: rec.ts.sim.saturating_add(SimTime::from_ps(rec.aux)),
            }),
            _ => {}
        }
    }

    match filter {
        EventFilter::All => order
            .into_iter()
            .filter_map(|n| by_name.remove(n))
            .collect(),
        EventFilter::Names(names) => names
            .iter()
            .map(|n| {
                by_name.get(n.as_str()).cloned().unwrap_or_else(|| TimelineEntry {
                    event: n.clone(),
                    ..TimelineEntry::default()
                })
            })
            .collect(),
    }
}
