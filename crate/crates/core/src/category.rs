//! Trace categories selectable through `NISTT_TRACE`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::store::RecordKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceCategory {
    /// First entry of every process (`PROC_ENTER`).
    Process,
    /// Time-reason suspend/resume pairs; the suspend carries the quantum.
    Quantum,
    /// Event-reason suspend/resume pairs.
    WaitEvent,
    /// Immediate and delayed notifications.
    Event,
}

impl TraceCategory {
    pub const ALL: [TraceCategory; 4] = [
        TraceCategory::Process,
        TraceCategory::Quantum,
        TraceCategory::WaitEvent,
        TraceCategory::Event,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TraceCategory::Process => "process",
            TraceCategory::Quantum => "quantum",
            TraceCategory::WaitEvent => "wait_event",
            TraceCategory::Event => "event",
        }
    }

    fn bit(self) -> u8 {
        1 << self as u8
    }

    /// Category a record belongs to, or `None` for bookkeeping records
    /// (`SIM_START`, `SIM_END`, `NAME_DEF`) that are always written.
    pub fn of_record(kind: RecordKind, flags: u8) -> Option<TraceCategory> {
        match kind {
            RecordKind::ProcEnter => Some(TraceCategory::Process),
            RecordKind::ProcSuspend | RecordKind::ProcResume => {
                if flags & crate::store::FLAG_EVENT_REASON != 0 {
                    Some(TraceCategory::WaitEvent)
                } else {
                    Some(TraceCategory::Quantum)
                }
            }
            RecordKind::NotifyImmediate | RecordKind::NotifyDelayed => Some(TraceCategory::Event),
            RecordKind::SimStart | RecordKind::SimEnd | RecordKind::NameDef => None,
        }
    }
}

impl fmt::Display for TraceCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A set of enabled trace categories.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TraceSelection(u8);

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown trace name `{0}` (expected process, quantum, wait_event, event, all or none)")]
pub struct UnknownTrace(pub String);

impl TraceSelection {
    pub const NONE: TraceSelection = TraceSelection(0);
    pub const ALL: TraceSelection = TraceSelection(0b1111);

    pub fn only(category: TraceCategory) -> Self {
        TraceSelection(category.bit())
    }

    pub fn contains(self, category: TraceCategory) -> bool {
        self.0 & category.bit() != 0
    }

    pub fn with(self, category: TraceCategory) -> Self {
        TraceSelection(self.0 | category.bit())
    }

    pub fn without(self, category: TraceCategory) -> Self {
        TraceSelection(self.0 & !category.bit())
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn categories(self) -> impl Iterator<Item = TraceCategory> {
        TraceCategory::ALL.into_iter().filter(move |c| self.contains(*c))
    }

    /// Whether a record of this kind would be written under this selection.
    pub fn admits(self, kind: RecordKind, flags: u8) -> bool {
        TraceCategory::of_record(kind, flags).is_none_or(|c| self.contains(c))
    }

    /// Lenient parse: unknown names are collected instead of failing the
    /// whole list, so a typo never disables the valid categories.
    pub fn parse_lenient(list: &str) -> (TraceSelection, Vec<UnknownTrace>) {
        let mut selection = TraceSelection::NONE;
        let mut unknown = Vec::new();
        for token in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match token {
                "all" => selection = TraceSelection::ALL,
                "none" => {}
                other => match TraceCategory::ALL.iter().find(|c| c.name() == other) {
                    Some(c) => selection = selection.with(*c),
                    None => unknown.push(UnknownTrace(other.to_owned())),
                },
            }
        }
        (selection, unknown)
    }
}

impl FromStr for TraceSelection {
    type Err = UnknownTrace;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (selection, mut unknown) = TraceSelection::parse_lenient(s);
        match unknown.pop() {
            Some(err) => Err(err),
            None => Ok(selection),
        }
    }
}

/// Renders as the canonical comma list accepted by `NISTT_TRACE`.
impl fmt::Display for TraceSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == TraceSelection::ALL {
            return f.write_str("all");
        }
        if self.is_empty() {
            return f.write_str("none");
        }
        let names: Vec<_> = self.categories().map(TraceCategory::name).collect();
        f.write_str(&names.join(","))
    }
}

impl fmt::Debug for TraceSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TraceSelection({self})")
    }
}

impl Serialize for TraceSelection {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TraceSelection {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
