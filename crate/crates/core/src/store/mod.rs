//! Append-only binary trace log: format, writer, reader and CSV exporter.

mod csv;
mod format;
mod reader;
mod writer;

use std::path::PathBuf;

use thiserror::Error;

pub use self::csv::{export_csv, import_csv, ExportSummary, CSV_HEADER};
pub use self::format::{
    padded_len, Header, RecordKind, TimeStamp, TraceRecord, FLAG_EVENT_NAME, FLAG_EVENT_REASON,
    HEADER_LEN, MAGIC, NO_SUBJECT, RECORD_LEN, VERSION,
};
pub use self::reader::{decode_log, read_log, NameEntry, TraceLog};
pub use self::writer::{Writer, WriterOptions, DEFAULT_FLUSH_EVERY};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}: trace file is already open for writing")]
    Locked(PathBuf),
    #[error("file too short for a header ({0} bytes)")]
    ShortHeader(usize),
    #[error("bad magic {0:?}, not a trace file")]
    BadMagic([u8; 4]),
    #[error("unsupported trace format version {0}")]
    UnsupportedVersion(u16),
    #[error("unknown record kind {kind} at byte offset {offset}")]
    UnknownKind { kind: u8, offset: usize },
    #[error("malformed name payload at byte offset {offset}")]
    BadName { offset: usize },
    #[error("name id {id} defined twice (second definition at byte offset {offset})")]
    DuplicateName { id: u32, offset: usize },
    #[error("NAME_DEF records must be appended with their text")]
    NameDefWithoutText,
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
}

impl StoreError {
    /// Whether the error is about the content of a file rather than access to it.
    pub fn is_format_error(&self) -> bool {
        !matches!(self, StoreError::Io { .. } | StoreError::Locked(_))
    }
}
