//! Post-processing of trace logs: RTF series, quantum durations, event
//! timelines, wait-on-event episodes and per-process compute time.

mod episodes;
mod quantum;
mod rtf;
mod table;
mod timeline;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::store::TraceLog;

pub use episodes::{wait_event_episodes, WaitEpisode};
pub use quantum::{quantum_points, QuantumPoint};
pub use rtf::{compute_rtf, overall_rtf, RtfPoint, DEFAULT_BUCKET};
pub use table::{compute_time_table, share_pct, ComputeTable, ComputeTimeRow};
pub use timeline::{event_timeline, EventFilter, Span, TimelineEntry};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalyzeError {
    #[error("unknown process `{name}` (known: {})", known.join(", "))]
    UnknownProcess { name: String, known: Vec<String> },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum ProcessFilter {
    #[default]
    All,
    /// Exact name match.
    Named(String),
}

impl ProcessFilter {
    /// Name ids matching the filter, `None` meaning every process.
    fn resolve(&self, log: &TraceLog) -> Result<Option<BTreeSet<u32>>, AnalyzeError> {
        match self {
            ProcessFilter::All => Ok(None),
            ProcessFilter::Named(name) => {
                let ids: BTreeSet<u32> = log.ids_named(name, false).collect();
                if ids.is_empty() {
                    let mut known: Vec<String> =
                        log.process_names().into_iter().map(str::to_owned).collect();
                    known.sort();
                    known.dedup();
                    return Err(AnalyzeError::UnknownProcess {
                        name: name.clone(),
                        known,
                    });
                }
                Ok(Some(ids))
            }
        }
    }
}

fn subject_name(log: &TraceLog, id: u32) -> String {
    log.name(id)
        .map(str::to_owned)
        .unwrap_or_else(|| format!("#{id}"))
}
