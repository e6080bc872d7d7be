//! Built-in trace emission for the intrusive kernel builds.
//!
//! Untraced builds never install a recorder, so every hook reduces to one
//! relaxed atomic load.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Mutex, Once};

use nistt_core::{Recorder, RecorderConfig, TraceSelection};

use crate::sched;

static ACTIVE: AtomicBool = AtomicBool::new(false);
static RECORDER: Mutex<Option<Recorder>> = Mutex::new(None);
static AT_EXIT: Once = Once::new();

#[inline]
pub(crate) fn with(f: impl FnOnce(&mut Recorder)) {
    if !ACTIVE.load(Ordering::Relaxed) {
        return;
    }
    let mut guard = RECORDER.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(recorder) = guard.as_mut() {
        f(recorder);
    }
}

/// Installs a recorder configured from `NISTT_*`; the log is finalized at
/// process exit. Does nothing if one is already installed.
pub fn install_from_env() {
    let (config, problems) = RecorderConfig::from_env();
    for problem in &problems {
        nistt_core::recorder::diagnostic(problem);
    }
    install(Recorder::open(&config));
}

pub fn install(recorder: Recorder) {
    let mut guard = RECORDER.lock().unwrap_or_else(|e| e.into_inner());
    if guard.is_some() {
        return;
    }
    let active = recorder.is_active() && recorder.traces() != TraceSelection::NONE;
    *guard = Some(recorder);
    ACTIVE.store(active, Ordering::Relaxed);
    AT_EXIT.call_once(|| unsafe {
        libc::atexit(finish_at_exit);
    });
}

/// Writes SIM_END at the current simulation time and closes the log.
pub fn finish() {
    ACTIVE.store(false, Ordering::Relaxed);
    let recorder = RECORDER.lock().unwrap_or_else(|e| e.into_inner()).take();
    if let Some(mut recorder) = recorder {
        recorder.finish(sched::now());
    }
}

extern "C" fn finish_at_exit() {
    finish();
}

/// Whether any record category is being emitted.
pub fn is_active() -> bool {
    ACTIVE.load(Ordering::Relaxed)
}
