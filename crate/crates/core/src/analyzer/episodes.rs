use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::store::{RecordKind, TraceLog};
use crate::time::SimTime;

/// A process blocked on an event, from suspend to resume.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaitEpisode {
    pub process: String,
    pub event: String,
    pub suspended_at: SimTime,
    /// `None` when the log ended with the process still waiting.
    pub resumed_at: Option<SimTime>,
}

pub fn wait_event_episodes(log: &TraceLog) -> Vec<WaitEpisode> {
    let mut episodes: Vec<WaitEpisode> = Vec::new();
    let mut open: HashMap<u32, usize> = HashMap::new();
    for rec in log.records.iter().filter(|r| r.is_event_reason()) {
        match rec.kind {
            RecordKind::ProcSuspend => {
                open.insert(rec.subject_id, episodes.len());
                episodes.push(WaitEpisode {
                    process: super::subject_name(log, rec.subject_id),
                    event: super::subject_name(log, rec.aux as u32),
                    suspended_at: rec.ts.sim,
                    resumed_at: None,
                });
            }
            RecordKind::ProcResume => {
                if let Some(index) = open.remove(&rec.subject_id) {
                    episodes[index].resumed_at = Some(rec.ts.sim);
                }
            }
            _ => {}
        }
    }
    episodes
}
