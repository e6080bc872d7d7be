use serde::{Deserialize, Serialize};

use super::{AnalyzeError, ProcessFilter};
use crate::store::{RecordKind, TraceLog};
use crate::time::SimTime;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantumPoint {
    pub process: String,
    /// Sim time at which the process synchronized.
    pub at: SimTime,
    pub duration: SimTime,
}

/// One point per time-reason suspend: the quantum the process synchronized.
pub fn quantum_points(log: &TraceLog, filter: &ProcessFilter) -> Result<Vec<QuantumPoint>, AnalyzeError> {
    let wanted = filter.resolve(log)?;
    Ok(log
        .records
        .iter()
        .filter(|r| r.kind == RecordKind::ProcSuspend && !r.is_event_reason())
        .filter(|r| wanted.as_ref().is_none_or(|ids| ids.contains(&r.subject_id)))
        .map(|r| QuantumPoint {
            process: super::subject_name(log, r.subject_id),
            at: r.ts.sim,
            duration: SimTime::from_ps(r.aux),
        })
        .collect())
}
