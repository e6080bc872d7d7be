use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::format::{
    padded_len, Header, RecordKind, TraceRecord, FLAG_EVENT_NAME, HEADER_LEN, MAGIC, RECORD_LEN,
    VERSION,
};
use super::StoreError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameEntry {
    pub text: String,
    pub is_event: bool,
}

/// A decoded trace file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceLog {
    pub header: Header,
    /// Every record in file order, `NAME_DEF` included.
    pub records: Vec<TraceRecord>,
    pub names: BTreeMap<u32, NameEntry>,
    /// The file ended inside a record or a name payload.
    pub truncated: bool,
}

impl TraceLog {
    pub fn new(header: Header) -> Self {
        TraceLog {
            header,
            records: Vec::new(),
            names: BTreeMap::new(),
            truncated: false,
        }
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.names.get(&id).map(|n| n.text.as_str())
    }

    /// Records that are not `NAME_DEF`.
    pub fn data_records(&self) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter().filter(|r| r.kind != RecordKind::NameDef)
    }

    pub fn count(&self, kind: RecordKind) -> usize {
        self.records.iter().filter(|r| r.kind == kind).count()
    }

    /// Ids of names of the given flavour, by text.
    pub fn ids_named(&self, text: &str, is_event: bool) -> impl Iterator<Item = u32> + '_ {
        let text = text.to_owned();
        self.names
            .iter()
            .filter(move |(_, n)| n.is_event == is_event && n.text == text)
            .map(|(id, _)| *id)
    }

    pub fn process_names(&self) -> Vec<&str> {
        self.names
            .values()
            .filter(|n| !n.is_event)
            .map(|n| n.text.as_str())
            .collect()
    }

    /// Encodes the log back into the on-disk byte layout.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.records.len() * RECORD_LEN);
        out.extend_from_slice(&self.header.encode());
        for rec in &self.records {
            if rec.kind == RecordKind::NameDef {
                let text = self
                    .names
                    .get(&rec.subject_id)
                    .map(|n| n.text.as_bytes())
                    .unwrap_or_default();
                let mut def = *rec;
                def.aux = text.len() as u64;
                out.extend_from_slice(&def.encode());
                out.extend_from_slice(text);
                out.resize(out.len() + padded_len(text.len()) - text.len(), 0);
            } else {
                out.extend_from_slice(&rec.encode());
            }
        }
        out
    }
}

pub fn read_log(path: impl AsRef<Path>) -> Result<TraceLog, StoreError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_log(&bytes)
}

/// Decodes a whole trace file image. A trailing partial record or name
/// payload sets [`TraceLog::truncated`] instead of failing.
pub fn decode_log(bytes: &[u8]) -> Result<TraceLog, StoreError> {
    if bytes.len() < HEADER_LEN {
        return Err(StoreError::ShortHeader(bytes.len()));
    }
    if bytes[0..4] != MAGIC {
        return Err(StoreError::BadMagic(bytes[0..4].try_into().unwrap()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(StoreError::UnsupportedVersion(version));
    }
    let anchor_real_ns = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let mut log = TraceLog::new(Header {
        version,
        anchor_real_ns,
    });

    let mut offset = HEADER_LEN;
    while offset < bytes.len() {
        let Some(chunk) = bytes.get(offset..offset + RECORD_LEN) else {
            log.truncated = true;
            break;
        };
        let record = TraceRecord::decode(chunk.try_into().unwrap())
            .map_err(|kind| StoreError::UnknownKind { kind, offset })?;
        let mut next = offset + RECORD_LEN;
        if record.kind == RecordKind::NameDef {
            let len = usize::try_from(record.aux).map_err(|_| StoreError::BadName { offset })?;
            let Some(payload) = bytes.get(next..next.saturating_add(len)) else {
                log.truncated = true;
                break;
            };
            let text = std::str::from_utf8(payload)
                .map_err(|_| StoreError::BadName { offset })?
                .to_owned();
            next += padded_len(len);
            if next > bytes.len() {
                log.truncated = true;
                break;
            }
            if log.names.contains_key(&record.subject_id) {
                return Err(StoreError::DuplicateName {
                    id: record.subject_id,
                    offset,
                });
            }
            log.names.insert(
                record.subject_id,
                NameEntry {
                    text,
                    is_event: record.flags & FLAG_EVENT_NAME != 0,
                },
            );
        }
        log.records.push(record);
        offset = next;
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::format::TimeStamp;
    use crate::time::SimTime;

    fn sample() -> TraceLog {
        let mut log = TraceLog::new(Header::new(42));
        log.records.push(TraceRecord::new(RecordKind::SimStart, TimeStamp::default(), 0, 0));
        log.records.push(TraceRecord::new(RecordKind::NameDef, TimeStamp::default(), 1, 3));
        log.names.insert(
            1,
            NameEntry {
                text: "cpu".into(),
                is_event: false,
            },
        );
        log.records.push(TraceRecord::new(
            RecordKind::ProcSuspend,
            TimeStamp::new(SimTime::ZERO, 10),
            1,
            100,
        ));
        log.records.push(TraceRecord::new(
            RecordKind::ProcResume,
            TimeStamp::new(SimTime::from_ps(100), 20),
            1,
            0,
        ));
        log.records.push(TraceRecord::new(
            RecordKind::SimEnd,
            TimeStamp::new(SimTime::from_ps(100), 30),
            0,
            0,
        ));
        log
    }

    #[test]
    fn bytes_round_trip() {
        let log = sample();
        assert_eq!(decode_log(&log.to_bytes()).unwrap(), log);
    }

    #[test]
    fn truncation_mid_record() {
        let log = sample();
        let bytes = log.to_bytes();
        let cut = decode_log(&bytes[..bytes.len() - 5]).unwrap();
        assert!(cut.truncated);
        assert_eq!(cut.records, log.records[..4]);
    }

    #[test]
    fn truncation_inside_name_payload() {
        let bytes = sample().to_bytes();
        let cut = decode_log(&bytes[..HEADER_LEN + 2 * RECORD_LEN + 2]).unwrap();
        assert!(cut.truncated);
        assert_eq!(cut.records.len(), 1);
        assert!(cut.names.is_empty());
    }

    #[test]
    fn wrong_magic() {
        let mut bytes = sample().to_bytes();
        bytes[0] = b'X';
        assert!(matches!(decode_log(&bytes), Err(StoreError::BadMagic(_))));
    }

    #[test]
    fn wrong_version() {
        let mut bytes = sample().to_bytes();
        bytes[4] = 9;
        assert!(matches!(
            decode_log(&bytes),
            Err(StoreError::UnsupportedVersion(9))
        ));
    }

    #[test]
    fn short_header() {
        assert!(matches!(decode_log(b"NSTT"), Err(StoreError::ShortHeader(4))));
    }

    #[test]
    fn duplicate_name_rejected() {
        let mut log = sample();
        log.records.insert(2, log.records[1]);
        assert!(matches!(
            decode_log(&log.to_bytes()),
            Err(StoreError::DuplicateName { id: 1, .. })
        ));
    }
}
