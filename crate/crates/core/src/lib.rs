//! Shared types and the offline half of the toolkit: the trace store, the
//! record emitter used by both tracing builds, the analyzer and the
//! overhead harness.

pub mod analyzer;
pub mod category;
pub mod harness;
pub mod recorder;
pub mod store;
pub mod time;

pub use category::{TraceCategory, TraceSelection};
pub use recorder::{NameSource, Recorder, RecorderConfig};
pub use store::{RecordKind, TimeStamp, TraceLog, TraceRecord};
pub use time::SimTime;
