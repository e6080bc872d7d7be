//! Bit-exact on-disk layout.
//!
//! ```text
//! header (16 bytes, little-endian)
//!   0  magic           b"NSTT"
//!   4  version         u16
//!   6  reserved        u16 (zero)
//!   8  anchor_real_ns  u64   CLOCK_MONOTONIC at the real-time origin
//!
//! record (32 bytes, little-endian)
//!   0  kind            u8
//!   1  flags           u8
//!   2  reserved        u16 (zero)
//!   4  subject_id      u32
//!   8  sim_ps          u64
//!  16  real_ns         u64
//!  24  aux             u64
//! ```
//!
//! A `NAME_DEF` record is followed by `aux` bytes of UTF-8, zero padded to
//! the next multiple of 8.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::time::SimTime;

pub const MAGIC: [u8; 4] = *b"NSTT";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;
pub const RECORD_LEN: usize = 32;

/// Suspend/resume record: the process waits on an event rather than a time.
pub const FLAG_EVENT_REASON: u8 = 0x01;
/// Name record: the name belongs to an event rather than a process.
pub const FLAG_EVENT_NAME: u8 = 0x02;

/// Subject id used by records that have no subject.
pub const NO_SUBJECT: u32 = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum RecordKind {
    SimStart = 0,
    SimEnd = 1,
    NameDef = 2,
    ProcEnter = 3,
    ProcSuspend = 4,
    ProcResume = 5,
    NotifyImmediate = 6,
    NotifyDelayed = 7,
}

impl RecordKind {
    pub const ALL: [RecordKind; 8] = [
        RecordKind::SimStart,
        RecordKind::SimEnd,
        RecordKind::NameDef,
        RecordKind::ProcEnter,
        RecordKind::ProcSuspend,
        RecordKind::ProcResume,
        RecordKind::NotifyImmediate,
        RecordKind::NotifyDelayed,
    ];

    pub fn from_u8(value: u8) -> Option<RecordKind> {
        RecordKind::ALL.get(value as usize).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RecordKind::SimStart => "SIM_START",
            RecordKind::SimEnd => "SIM_END",
            RecordKind::NameDef => "NAME_DEF",
            RecordKind::ProcEnter => "PROC_ENTER",
            RecordKind::ProcSuspend => "PROC_SUSPEND",
            RecordKind::ProcResume => "PROC_RESUME",
            RecordKind::NotifyImmediate => "NOTIFY_IMMEDIATE",
            RecordKind::NotifyDelayed => "NOTIFY_DELAYED",
        }
    }

    pub fn parse(s: &str) -> Option<RecordKind> {
        RecordKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Whether `subject_id` names an event (otherwise a process).
    pub fn subject_is_event(self) -> bool {
        matches!(self, RecordKind::NotifyImmediate | RecordKind::NotifyDelayed)
    }
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Paired simulation-time / elapsed-real-time instant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeStamp {
    pub sim: SimTime,
    pub real_ns: u64,
}

impl TimeStamp {
    pub fn new(sim: SimTime, real_ns: u64) -> Self {
        TimeStamp { sim, real_ns }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraceRecord {
    pub kind: RecordKind,
    pub flags: u8,
    pub ts: TimeStamp,
    pub subject_id: u32,
    pub aux: u64,
}

impl TraceRecord {
    pub fn new(kind: RecordKind, ts: TimeStamp, subject_id: u32, aux: u64) -> Self {
        TraceRecord {
            kind,
            flags: 0,
            ts,
            subject_id,
            aux,
        }
    }

    pub fn with_flags(mut self, flags: u8) -> Self {
        self.flags = flags;
        self
    }

    pub fn is_event_reason(&self) -> bool {
        self.flags & FLAG_EVENT_REASON != 0
    }

    pub fn encode(&self) -> [u8; RECORD_LEN] {
        let mut out = [0u8; RECORD_LEN];
        out[0] = self.kind as u8;
        out[1] = self.flags;
        out[4..8].copy_from_slice(&self.subject_id.to_le_bytes());
        out[8..16].copy_from_slice(&self.ts.sim.as_ps().to_le_bytes());
        out[16..24].copy_from_slice(&self.ts.real_ns.to_le_bytes());
        out[24..32].copy_from_slice(&self.aux.to_le_bytes());
        out
    }

    /// Decodes one record; `Err` carries the unknown kind byte.
    pub fn decode(bytes: &[u8; RECORD_LEN]) -> Result<TraceRecord, u8> {
        let kind = RecordKind::from_u8(bytes[0]).ok_or(bytes[0])?;
        let u64_at = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        Ok(TraceRecord {
            kind,
            flags: bytes[1],
            subject_id: u32::from_le_bytes(bytes[4..8].try_into().unwrap()),
            ts: TimeStamp::new(SimTime::from_ps(u64_at(8)), u64_at(16)),
            aux: u64_at(24),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub version: u16,
    pub anchor_real_ns: u64,
}

impl Header {
    pub fn new(anchor_real_ns: u64) -> Self {
        Header {
            version: VERSION,
            anchor_real_ns,
        }
    }

    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(&MAGIC);
        out[4..6].copy_from_slice(&self.version.to_le_bytes());
        out[8..16].copy_from_slice(&self.anchor_real_ns.to_le_bytes());
        out
    }
}

/// Padded payload length for a name of `len` bytes.
pub fn padded_len(len: usize) -> usize {
    len.div_ceil(8) * 8
}
