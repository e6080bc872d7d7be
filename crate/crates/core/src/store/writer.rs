use std::fs::{File, OpenOptions, TryLockError};
use std::io::Write;
use std::path::{Path, PathBuf};

use super::format::{padded_len, Header, RecordKind, TimeStamp, TraceRecord, RECORD_LEN};
use super::StoreError;

pub const DEFAULT_FLUSH_EVERY: usize = 4096;

#[derive(Clone, Copy, Debug)]
pub struct WriterOptions {
    /// Buffered records are written out once this many are pending.
    pub flush_every: usize,
    pub anchor_real_ns: u64,
}

impl Default for WriterOptions {
    fn default() -> Self {
        WriterOptions {
            flush_every: DEFAULT_FLUSH_EVERY,
            anchor_real_ns: 0,
        }
    }
}

/// Single-writer append-only trace file.
///
/// The file is locked exclusively for the lifetime of the writer. Nothing,
/// not even the header, reaches the file before the first flush.
#[derive(Debug)]
pub struct Writer {
    file: File,
    path: PathBuf,
    buf: Vec<u8>,
    pending: usize,
    flush_every: usize,
    written: u64,
}

impl Writer {
    pub fn create(path: impl AsRef<Path>, options: WriterOptions) -> Result<Writer, StoreError> {
        let path = path.as_ref().to_path_buf();
        let io_err = |source| StoreError::Io {
            path: path.clone(),
            source,
        };
        // Truncating before holding the lock would clobber a live writer.
        let file = OpenOptions::new()
            .write(true)
            .create(true)
            .truncate(false)
            .open(&path)
            .map_err(io_err)?;
        match file.try_lock() {
            Ok(()) => {}
            Err(TryLockError::WouldBlock) => return Err(StoreError::Locked(path)),
            Err(TryLockError::Error(e)) => return Err(io_err(e)),
        }
        file.set_len(0).map_err(io_err)?;

        let flush_every = options.flush_every.max(1);
        let mut buf = Vec::with_capacity((flush_every + 1) * RECORD_LEN);
        buf.extend_from_slice(&Header::new(options.anchor_real_ns).encode());
        Ok(Writer {
            file,
            path,
            buf,
            pending: 0,
            flush_every,
            written: 0,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Records accepted so far, flushed or not.
    pub fn record_count(&self) -> u64 {
        self.written
    }

    pub fn append(&mut self, record: &TraceRecord) -> Result<(), StoreError> {
        if record.kind == RecordKind::NameDef {
            return Err(StoreError::NameDefWithoutText);
        }
        self.buf.extend_from_slice(&record.encode());
        self.bump()
    }

    /// Appends a `NAME_DEF` record binding `id` to `text`.
    pub fn append_name(
        &mut self,
        ts: TimeStamp,
        id: u32,
        flags: u8,
        text: &str,
    ) -> Result<(), StoreError> {
        let record =
            TraceRecord::new(RecordKind::NameDef, ts, id, text.len() as u64).with_flags(flags);
        self.buf.extend_from_slice(&record.encode());
        self.buf.extend_from_slice(text.as_bytes());
        self.buf
            .resize(self.buf.len() + padded_len(text.len()) - text.len(), 0);
        self.bump()
    }

    fn bump(&mut self) -> Result<(), StoreError> {
        self.written += 1;
        self.pending += 1;
        if self.pending >= self.flush_every {
            self.flush()?;
        }
        Ok(())
    }

    pub fn flush(&mut self) -> Result<(), StoreError> {
        if !self.buf.is_empty() {
            let result = self.file.write_all(&self.buf);
            self.buf.clear();
            self.pending = 0;
            result.map_err(|source| StoreError::Io {
                path: self.path.clone(),
                source,
            })?;
        }
        Ok(())
    }

    pub fn close(mut self) -> Result<(), StoreError> {
        self.flush()?;
        self.file.sync_data().map_err(|source| StoreError::Io {
            path: self.path.clone(),
            source,
        })
    }
}

impl Drop for Writer {
    fn drop(&mut self) {
        let _ = self.flush();
    }
}
