//! C ABI behind the `ltsim_*` symbols.
//!
//! The symbols themselves are emitted by [`export_abi!`] in the crate that
//! produces the final artifact (shared library or executable), so that each
//! artifact owns exactly one definition. Handles are plain integers: the
//! simulation handle is always 1, process and event handles are their ids.

use std::ffi::{c_char, c_void, CStr};

use nistt_core::SimTime;

use crate::sched::{self, Dispatch};
use crate::{tracing, EventId, KernelConfig, KernelError, ProcessId};

pub const SIM_HANDLE: i64 = 1;
pub const NO_PROCESS: u64 = u64::MAX;
pub const UNBOUNDED: u64 = u64::MAX;

pub const E_INVALID_CONFIG: i64 = -1;
pub const E_DUPLICATE: i64 = -2;
pub const E_INVALID_NAME: i64 = -3;
pub const E_SPAWN_AFTER_RUN: i64 = -4;
pub const E_NO_SIMULATION: i64 = -5;
pub const E_ALREADY_CREATED: i64 = -6;

/// Symbols a preloaded shim may interpose. Kept in sync with
/// `traced_symbols.txt` at the crate root.
pub const TRACED_SYMBOLS: [&str; 4] = [
    "ltsim_process_entry",
    "ltsim_wait_time",
    "ltsim_wait_event",
    "ltsim_notify",
];

pub type ProcessFn = extern "C" fn(*mut c_void);

pub fn error_code(err: &KernelError) -> i64 {
    match err {
        KernelError::ZeroQuantum => E_INVALID_CONFIG,
        KernelError::DuplicateProcess(_) | KernelError::DuplicateEvent(_) => E_DUPLICATE,
        KernelError::InvalidName(_) => E_INVALID_NAME,
        KernelError::SpawnAfterRun => E_SPAWN_AFTER_RUN,
        KernelError::NoSimulation => E_NO_SIMULATION,
        KernelError::AlreadyCreated => E_ALREADY_CREATED,
    }
}

fn lookup(name: &CStr) -> *mut c_void {
    unsafe { libc::dlsym(libc::RTLD_DEFAULT, name.as_ptr()) }
}

/// Resolves the kernel-internal dispatch targets through the global symbol
/// scope, so a preloaded definition wins over `fallback`.
pub fn resolve_dispatch(fallback: Dispatch) -> Dispatch {
    let entry = lookup(c"ltsim_process_entry");
    let wait = lookup(c"ltsim_wait_time");
    Dispatch {
        process_entry: if entry.is_null() {
            fallback.process_entry
        } else {
            unsafe { std::mem::transmute::<*mut c_void, extern "C" fn(u64)>(entry) }
        },
        wait_time: if wait.is_null() {
            fallback.wait_time
        } else {
            unsafe { std::mem::transmute::<*mut c_void, extern "C" fn(u64)>(wait) }
        },
    }
}

pub fn create(quantum_ps: u64, until_ps: u64, seed: u64, traced: bool, fallback: Dispatch) -> i64 {
    let config = KernelConfig {
        quantum_limit: SimTime::from_ps(quantum_ps),
        run_until: (until_ps != UNBOUNDED).then(|| SimTime::from_ps(until_ps)),
        rng_seed: seed,
        ..KernelConfig::default()
    };
    match sched::create(config, resolve_dispatch(fallback)) {
        Ok(()) => {
            if traced {
                tracing::install_from_env();
            }
            SIM_HANDLE
        }
        Err(e) => error_code(&e),
    }
}

pub fn destroy(_sim: i64) {
    sched::destroy();
}

/// # Safety
/// `name` must be a valid NUL-terminated string.
unsafe fn name_arg<'a>(name: *const c_char) -> Option<&'a str> {
    if name.is_null() {
        return None;
    }
    unsafe { CStr::from_ptr(name) }.to_str().ok()
}

/// # Safety
/// `name` must be a valid NUL-terminated string; `arg` must stay valid for
/// as long as the process body uses it.
pub unsafe fn spawn(_sim: i64, name: *const c_char, body: ProcessFn, arg: *mut c_void) -> i64 {
    let Some(name) = (unsafe { name_arg(name) }) else {
        return E_INVALID_NAME;
    };
    let arg = arg as usize;
    match sched::spawn(name, Box::new(move || body(arg as *mut c_void))) {
        Ok(pid) => i64::from(pid.0),
        Err(e) => error_code(&e),
    }
}

/// # Safety
/// `name` must be a valid NUL-terminated string.
pub unsafe fn event_create(_sim: i64, name: *const c_char) -> i64 {
    let Some(name) = (unsafe { name_arg(name) }) else {
        return E_INVALID_NAME;
    };
    match sched::create_event(name) {
        Ok(id) => i64::from(id.0),
        Err(e) => error_code(&e),
    }
}

pub fn run(_sim: i64) -> u64 {
    match sched::run() {
        Ok(t) => t.as_ps(),
        Err(_) => sched::fatal("run called without a simulation"),
    }
}

pub fn now() -> u64 {
    sched::now().as_ps()
}

pub fn process_entry(pid: u64) {
    sched::process_entry(ProcessId(pid as u32));
}

pub fn wait_time(ps: u64) {
    sched::wait_time(SimTime::from_ps(ps));
}

pub fn wait_event(event: u64) {
    sched::wait_event(EventId(event as u32));
}

pub fn notify(event: u64, delay_ps: u64) {
    sched::notify(EventId(event as u32), SimTime::from_ps(delay_ps));
}

pub fn qk_inc(ps: u64) {
    sched::qk_inc(SimTime::from_ps(ps));
}

pub fn qk_need_sync() -> i32 {
    i32::from(sched::qk_need_sync())
}

pub fn qk_sync() {
    sched::qk_sync();
}

pub fn qk_local_time() -> u64 {
    sched::qk_local_time().as_ps()
}

pub fn quantum_limit() -> u64 {
    sched::quantum_limit().map_or(0, SimTime::as_ps)
}

pub fn current_process() -> u64 {
    sched::current_process().map_or(NO_PROCESS, |p| u64::from(p.0))
}

pub fn current_process_name() -> *const c_char {
    sched::current_process()
        .and_then(sched::process_name_ptr)
        .unwrap_or(std::ptr::null())
}

pub fn process_name(pid: u64) -> *const c_char {
    sched::process_name_ptr(ProcessId(pid as u32)).unwrap_or(std::ptr::null())
}

pub fn event_name(event: u64) -> *const c_char {
    sched::event_name_ptr(EventId(event as u32)).unwrap_or(std::ptr::null())
}

pub fn activation_digest() -> u64 {
    sched::activation_digest()
}

pub fn activation_count() -> u64 {
    sched::activation_count()
}

/// Defines every `ltsim_*` symbol in the invoking crate.
///
/// `export_abi!()` gives the plain kernel; `export_abi!(traced)` adds the
/// built-in recorder, configured from the environment at `ltsim_create`.
#[macro_export]
macro_rules! export_abi {
    () => {
        $crate::export_abi!(@emit false);
    };
    (traced) => {
        $crate::export_abi!(@emit true);
    };
    (@emit $traced:literal) => {
        #[no_mangle]
        pub extern "C" fn ltsim_create(quantum_ps: u64, until_ps: u64, seed: u64) -> i64 {
            $crate::abi::create(
                quantum_ps,
                until_ps,
                seed,
                $traced,
                $crate::Dispatch {
                    process_entry: ltsim_process_entry,
                    wait_time: ltsim_wait_time,
                },
            )
        }

        #[no_mangle]
        pub extern "C" fn ltsim_destroy(sim: i64) {
            $crate::abi::destroy(sim)
        }

        /// # Safety
        /// See [`ltsim_kernel::abi::spawn`].
        #[no_mangle]
        pub unsafe extern "C" fn ltsim_spawn(
            sim: i64,
            name: *const ::std::ffi::c_char,
            body: $crate::abi::ProcessFn,
            arg: *mut ::std::ffi::c_void,
        ) -> i64 {
            unsafe { $crate::abi::spawn(sim, name, body, arg) }
        }

        /// # Safety
        /// `name` must be a valid NUL-terminated string.
        #[no_mangle]
        pub unsafe extern "C" fn ltsim_event_create(sim: i64, name: *const ::std::ffi::c_char) -> i64 {
            unsafe { $crate::abi::event_create(sim, name) }
        }

        #[no_mangle]
        pub extern "C" fn ltsim_run(sim: i64) -> u64 {
            $crate::abi::run(sim)
        }

        #[no_mangle]
        pub extern "C" fn ltsim_now() -> u64 {
            $crate::abi::now()
        }

        #[no_mangle]
        pub extern "C" fn ltsim_process_entry(pid: u64) {
            $crate::abi::process_entry(pid)
        }

        #[no_mangle]
        pub extern "C" fn ltsim_wait_time(ps: u64) {
            $crate::abi::wait_time(ps)
        }

        #[no_mangle]
        pub extern "C" fn ltsim_wait_event(event: u64) {
            $crate::abi::wait_event(event)
        }

        #[no_mangle]
        pub extern "C" fn ltsim_notify(event: u64, delay_ps: u64) {
            $crate::abi::notify(event, delay_ps)
        }

        #[no_mangle]
        pub extern "C" fn ltsim_qk_inc(ps: u64) {
            $crate::abi::qk_inc(ps)
        }

        #[no_mangle]
        pub extern "C" fn ltsim_qk_need_sync() -> i32 {
            $crate::abi::qk_need_sync()
        }

        #[no_mangle]
        pub extern "C" fn ltsim_qk_sync() {
            $crate::abi::qk_sync()
        }

        #[no_mangle]
        pub extern "C" fn ltsim_qk_local_time() -> u64 {
            $crate::abi::qk_local_time()
        }

        #[no_mangle]
        pub extern "C" fn ltsim_quantum_limit() -> u64 {
            $crate::abi::quantum_limit()
        }

        #[no_mangle]
        pub extern "C" fn ltsim_current_process() -> u64 {
            $crate::abi::current_process()
        }

        #[no_mangle]
        pub extern "C" fn ltsim_current_process_name() -> *const ::std::ffi::c_char {
            $crate::abi::current_process_name()
        }

        #[no_mangle]
        pub extern "C" fn ltsim_process_name(pid: u64) -> *const ::std::ffi::c_char {
            $crate::abi::process_name(pid)
        }

        #[no_mangle]
        pub extern "C" fn ltsim_event_name(event: u64) -> *const ::std::ffi::c_char {
            $crate::abi::event_name(event)
        }

        #[no_mangle]
        pub extern "C" fn ltsim_activation_digest() -> u64 {
            $crate::abi::activation_digest()
        }

        #[no_mangle]
        pub extern "C" fn ltsim_activation_count() -> u64 {
            $crate::abi::activation_count()
        }
    };
}
