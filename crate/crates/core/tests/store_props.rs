use nistt_core::store::{
    decode_log, padded_len, read_log, Header, NameEntry, StoreError, Writer, WriterOptions,
    FLAG_EVENT_NAME, HEADER_LEN, RECORD_LEN,
};
use nistt_core::{RecordKind, SimTime, TimeStamp, TraceLog, TraceRecord};
use proptest::prelude::*;

#[derive(Clone, Debug)]
enum Item {
    Data(TraceRecord),
    Name { ts: TimeStamp, id: u32, flags: u8, text: String },
}

impl Item {
    fn encoded_len(&self) -> usize {
        match self {
            Item::Data(_) => RECORD_LEN,
            Item::Name { text, .. } => RECORD_LEN + padded_len(text.len()),
        }
    }
}

fn timestamp() -> impl Strategy<Value = TimeStamp> {
    (any::<u64>(), any::<u64>()).prop_map(|(sim, real)| TimeStamp::new(SimTime::from_ps(sim), real))
}

fn data_record() -> impl Strategy<Value = TraceRecord> {
    let kinds: Vec<RecordKind> = RecordKind::ALL
        .into_iter()
        .filter(|k| *k != RecordKind::NameDef)
        .collect();
    (prop::sample::select(kinds), timestamp(), any::<u32>(), any::<u64>(), any::<u8>())
        .prop_map(|(kind, ts, subject, aux, flags)| TraceRecord::new(kind, ts, subject, aux).with_flags(flags))
}

#[derive(Clone, Debug)]
enum Raw {
    Data(TraceRecord),
    Name(TimeStamp, u8, String),
}

/// Random record/name sequences; name ids are unique and start at 1.
fn items() -> impl Strategy<Value = Vec<Item>> {
    let raw = prop_oneof![
        3 => data_record().prop_map(Raw::Data),
        1 => (timestamp(), any::<u8>(), "\\PC{0,20}").prop_map(|(ts, f, t)| Raw::Name(ts, f, t)),
    ];
    prop::collection::vec(raw, 0..48).prop_map(|raw| {
        let mut next_id = 0;
        raw.into_iter()
            .map(|r| match r {
                Raw::Data(rec) => Item::Data(rec),
                Raw::Name(ts, flags, text) => {
                    next_id += 1;
                    Item::Name { ts, id: next_id, flags, text }
                }
            })
            .collect()
    })
}

fn name_record(ts: TimeStamp, id: u32, flags: u8, text: &str) -> TraceRecord {
    TraceRecord::new(RecordKind::NameDef, ts, id, text.len() as u64).with_flags(flags)
}

/// The log a reader should produce for exactly these items.
fn log_of(header: Header, items: &[Item]) -> TraceLog {
    let mut log = TraceLog::new(header);
    for item in items {
        match item {
            Item::Data(rec) => log.records.push(*rec),
            Item::Name { ts, id, flags, text } => {
                log.records.push(name_record(*ts, *id, *flags, text));
                log.names.insert(
                    *id,
                    NameEntry {
                        text: text.clone(),
                        is_event: flags & FLAG_EVENT_NAME != 0,
                    },
                );
            }
        }
    }
    log
}

fn write_items(writer: &mut Writer, items: &[Item]) {
    for item in items {
        match item {
            Item::Data(rec) => writer.append(rec).unwrap(),
            Item::Name { ts, id, flags, text } => writer.append_name(*ts, *id, *flags, text).unwrap(),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn encode_decode_round_trip(anchor in any::<u64>(), items in items()) {
        let log = log_of(Header::new(anchor), &items);
        let bytes = log.to_bytes();
        let expected_len: usize = HEADER_LEN + items.iter().map(Item::encoded_len).sum::<usize>();
        prop_assert_eq!(bytes.len(), expected_len);
        let decoded = decode_log(&bytes).unwrap();
        prop_assert_eq!(&decoded, &log);
        prop_assert_eq!(decoded.to_bytes(), bytes);
    }

    #[test]
    fn truncation_keeps_complete_prefix(anchor in any::<u64>(), items in items(), cut in any::<prop::sample::Index>()) {
        let bytes = log_of(Header::new(anchor), &items).to_bytes();
        let cut = cut.index(bytes.len() + 1);
        let result = decode_log(&bytes[..cut]);
        if cut < HEADER_LEN {
            prop_assert!(matches!(result, Err(StoreError::ShortHeader(n)) if n == cut));
            return Ok(());
        }
        let mut boundary = HEADER_LEN;
        let mut complete = 0;
        for item in &items {
            if boundary + item.encoded_len() > cut {
                break;
            }
            boundary += item.encoded_len();
            complete += 1;
        }
        let mut expected = log_of(Header::new(anchor), &items[..complete]);
        expected.truncated = cut != boundary;
        prop_assert_eq!(result.unwrap(), expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn writer_file_round_trip(anchor in any::<u64>(), items in items(), flush_every in 1usize..20) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.bin");
        let mut writer = Writer::create(&path, WriterOptions { flush_every, anchor_real_ns: anchor }).unwrap();
        write_items(&mut writer, &items);
        prop_assert_eq!(writer.record_count(), items.len() as u64);
        writer.close().unwrap();
        prop_assert_eq!(read_log(&path).unwrap(), log_of(Header::new(anchor), &items));
    }

    #[test]
    fn abandoned_writer_leaves_flushed_batches(items in items(), flush_every in 1usize..20) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.bin");
        let mut writer = Writer::create(&path, WriterOptions { flush_every, anchor_real_ns: 7 }).unwrap();
        write_items(&mut writer, &items);
        // No drop, no close: what a killed process leaves behind.
        std::mem::forget(writer);
        let bytes = std::fs::read(&path).unwrap();
        let flushed = items.len() / flush_every * flush_every;
        if flushed == 0 {
            prop_assert!(bytes.is_empty());
        } else {
            let log = decode_log(&bytes).unwrap();
            prop_assert!(!log.truncated);
            prop_assert_eq!(log, log_of(Header::new(7), &items[..flushed]));
        }
    }
}

#[test]
fn duplicate_name_is_rejected() {
    let items = [
        Item::Name { ts: TimeStamp::default(), id: 1, flags: 0, text: "cpu".into() },
        Item::Name { ts: TimeStamp::default(), id: 1, flags: 0, text: "gpu".into() },
    ];
    let mut bytes = log_of(Header::new(0), &items[..1]).to_bytes();
    bytes.extend_from_slice(&log_of(Header::new(0), &items[1..]).to_bytes()[HEADER_LEN..]);
    let err = decode_log(&bytes).unwrap_err();
    assert!(matches!(err, StoreError::DuplicateName { id: 1, offset } if offset == HEADER_LEN + 40));
}
