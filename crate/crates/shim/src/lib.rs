//! Preloadable tracer for an unmodified `libltsim.so`.
//!
//! The shim defines the kernel's traced entry points, records the call and
//! forwards to the next definition in link order. Names, the current process
//! and simulation time come from the kernel's own introspection symbols.
//!
//! ```text
//! NISTT_TRACE=quantum,wait_event NISTT_DB_PATH=run.bin \
//!     LD_PRELOAD=libnistt_shim.so ./model
//! ```
//!
//! When the host process does not contain the kernel the shim stays inert
//! and creates no file.

use std::ffi::{c_char, CStr};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Mutex, OnceLock};

use nistt_core::recorder::diagnostic;
use nistt_core::{NameSource, Recorder, RecorderConfig, SimTime, TraceSelection};

type EntryFn = extern "C" fn(u64);
type NotifyFn = extern "C" fn(u64, u64);
type QueryFn = extern "C" fn() -> u64;
type NameFn = extern "C" fn(u64) -> *const c_char;

struct Kernel {
    process_entry: EntryFn,
    wait_time: EntryFn,
    wait_event: EntryFn,
    notify: NotifyFn,
    now: QueryFn,
    current_process: QueryFn,
    process_name: NameFn,
    event_name: NameFn,
}

static KERNEL: OnceLock<Option<Kernel>> = OnceLock::new();
static ACTIVE: AtomicBool = AtomicBool::new(false);
static RECORDER: Mutex<Option<Recorder>> = Mutex::new(None);

unsafe fn next<T: Copy>(name: &CStr) -> Option<T> {
    let sym = unsafe { libc::dlsym(libc::RTLD_NEXT, name.as_ptr()) };
    (!sym.is_null()).then(|| unsafe { std::mem::transmute_copy::<*mut libc::c_void, T>(&sym) })
}

fn resolve() -> Option<Kernel> {
    unsafe {
        Some(Kernel {
            process_entry: next(c"ltsim_process_entry")?,
            wait_time: next(c"ltsim_wait_time")?,
            wait_event: next(c"ltsim_wait_event")?,
            notify: next(c"ltsim_notify")?,
            now: next(c"ltsim_now")?,
            current_process: next(c"ltsim_current_process")?,
            process_name: next(c"ltsim_process_name")?,
            event_name: next(c"ltsim_event_name")?,
        })
    }
}

fn kernel() -> &'static Kernel {
    match KERNEL.get_or_init(resolve) {
        Some(k) => k,
        None => {
            diagnostic("kernel symbols not found behind the shim");
            std::process::abort();
        }
    }
}

fn name_from(ptr: *const c_char) -> String {
    if ptr.is_null() {
        return String::new();
    }
    unsafe { CStr::from_ptr(ptr) }.to_string_lossy().into_owned()
}

impl NameSource for Kernel {
    fn process_name(&self, pid: u32) -> String {
        name_from((self.process_name)(u64::from(pid)))
    }

    fn event_name(&self, event: u32) -> String {
        name_from((self.event_name)(u64::from(event)))
    }
}

#[inline]
fn record(k: &Kernel, f: impl FnOnce(&mut Recorder, SimTime, &Kernel)) {
    if !ACTIVE.load(Ordering::Relaxed) {
        return;
    }
    let now = SimTime::from_ps((k.now)());
    let mut guard = RECORDER.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(recorder) = guard.as_mut() {
        f(recorder, now, k);
    }
}

extern "C" fn load() {
    if KERNEL.get_or_init(resolve).is_none() {
        return;
    }
    let (config, problems) = RecorderConfig::from_env();
    for problem in &problems {
        diagnostic(problem);
    }
    let recorder = Recorder::open(&config);
    ACTIVE.store(
        recorder.is_active() && recorder.traces() != TraceSelection::NONE,
        Ordering::Relaxed,
    );
    *RECORDER.lock().unwrap_or_else(|e| e.into_inner()) = Some(recorder);
}

extern "C" fn unload() {
    ACTIVE.store(false, Ordering::Relaxed);
    let recorder = RECORDER.lock().unwrap_or_else(|e| e.into_inner()).take();
    if let (Some(mut recorder), Some(Some(k))) = (recorder, KERNEL.get()) {
        recorder.finish(SimTime::from_ps((k.now)()));
    }
}

#[used]
#[link_section = ".init_array"]
static LOAD: extern "C" fn() = load;

#[used]
#[link_section = ".fini_array"]
static UNLOAD: extern "C" fn() = unload;

#[no_mangle]
pub extern "C" fn ltsim_process_entry(pid: u64) {
    let k = kernel();
    record(k, |r, now, names| r.process_enter(now, pid as u32, names));
    (k.process_entry)(pid)
}

#[no_mangle]
pub extern "C" fn ltsim_wait_time(ps: u64) {
    let k = kernel();
    if !ACTIVE.load(Ordering::Relaxed) {
        return (k.wait_time)(ps);
    }
    let duration = SimTime::from_ps(ps);
    let pid = (k.current_process)() as u32;
    record(k, |r, now, names| r.suspend_time(now, pid, duration, names));
    (k.wait_time)(ps);
    record(k, |r, now, names| r.resume_time(now, pid, duration, names));
}

#[no_mangle]
pub extern "C" fn ltsim_wait_event(event: u64) {
    let k = kernel();
    if !ACTIVE.load(Ordering::Relaxed) {
        return (k.wait_event)(event);
    }
    let pid = (k.current_process)() as u32;
    record(k, |r, now, names| r.suspend_event(now, pid, event as u32, names));
    (k.wait_event)(event);
    record(k, |r, now, names| r.resume_event(now, pid, event as u32, names));
}

#[no_mangle]
pub extern "C" fn ltsim_notify(event: u64, delay_ps: u64) {
    let k = kernel();
    record(k, |r, now, names| {
        r.notify(now, event as u32, SimTime::from_ps(delay_ps), names)
    });
    (k.notify)(event, delay_ps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inert_without_kernel() {
        // The test binary contains no kernel, so loading must not activate.
        assert!(KERNEL.get_or_init(resolve).is_none());
        assert!(!ACTIVE.load(Ordering::Relaxed));
        assert!(RECORDER.lock().unwrap().is_none());
    }

    #[test]
    fn null_names_are_empty() {
        assert_eq!(name_from(std::ptr::null()), "");
        assert_eq!(name_from(c"cpu".as_ptr()), "cpu");
    }
}
