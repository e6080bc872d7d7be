//! Bundled workloads for the simulation kernel.
//!
//! Every workload talks to the kernel only through its C ABI, so the same
//! code runs against `libltsim.so`, `libltsim_traced.so`, or a kernel linked
//! into the executable. Each run writes a deterministic digest (final
//! simulation time, activation digest, workload checksum) to stdout and to
//! `--out` when given.

use std::ffi::{c_void, CStr, CString};
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use nistt_core::SimTime;

pub mod busy;
pub mod periph;
pub mod timer_idle;

pub mod sys {
    use std::ffi::{c_char, c_void};

    extern "C" {
        pub fn ltsim_create(quantum_ps: u64, until_ps: u64, seed: u64) -> i64;
        pub fn ltsim_destroy(sim: i64);
        pub fn ltsim_spawn(
            sim: i64,
            name: *const c_char,
            body: extern "C" fn(*mut c_void),
            arg: *mut c_void,
        ) -> i64;
        pub fn ltsim_event_create(sim: i64, name: *const c_char) -> i64;
        pub fn ltsim_run(sim: i64) -> u64;
        pub fn ltsim_now() -> u64;
        pub fn ltsim_wait_time(ps: u64);
        pub fn ltsim_wait_event(event: u64);
        pub fn ltsim_notify(event: u64, delay_ps: u64);
        pub fn ltsim_qk_inc(ps: u64);
        pub fn ltsim_qk_need_sync() -> i32;
        pub fn ltsim_qk_sync();
        pub fn ltsim_activation_digest() -> u64;
        pub fn ltsim_activation_count() -> u64;
    }
}

/// Flags shared by every workload.
#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Stop the simulation at this time (e.g. `2s`); unbounded by default.
    #[arg(long)]
    pub until: Option<SimTime>,
    /// Quantum limit for temporal decoupling.
    #[arg(long, default_value = "100us")]
    pub quantum: SimTime,
    /// Also write the output digest to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub struct Sim {
    handle: i64,
}

#[derive(Clone, Copy, Debug)]
pub struct Event(u64);

impl Sim {
    pub fn create(args: &CommonArgs) -> Result<Sim, String> {
        let until = args.until.map_or(u64::MAX, SimTime::as_ps);
        let handle = unsafe { sys::ltsim_create(args.quantum.as_ps(), until, args.seed) };
        if handle < 0 {
            return Err(format!("cannot create simulation (error {handle})"));
        }
        Ok(Sim { handle })
    }

    pub fn spawn(&self, name: &str, body: extern "C" fn(*mut c_void)) -> Result<(), String> {
        let cname = CString::new(name).map_err(|e| e.to_string())?;
        let rc = unsafe { sys::ltsim_spawn(self.handle, cname.as_ptr(), body, std::ptr::null_mut()) };
        if rc < 0 {
            return Err(format!("cannot spawn `{name}` (error {rc})"));
        }
        Ok(())
    }

    pub fn event(&self, name: &CStr) -> Result<Event, String> {
        let rc = unsafe { sys::ltsim_event_create(self.handle, name.as_ptr()) };
        if rc < 0 {
            return Err(format!("cannot create event {name:?} (error {rc})"));
        }
        Ok(Event(rc as u64))
    }

    pub fn run(&self) -> SimTime {
        SimTime::from_ps(unsafe { sys::ltsim_run(self.handle) })
    }
}

impl Drop for Sim {
    fn drop(&mut self) {
        unsafe { sys::ltsim_destroy(self.handle) }
    }
}

pub fn now() -> SimTime {
    SimTime::from_ps(unsafe { sys::ltsim_now() })
}

pub fn wait_time(t: SimTime) {
    unsafe { sys::ltsim_wait_time(t.as_ps()) }
}

pub fn wait_event(event: Event) {
    unsafe { sys::ltsim_wait_event(event.0) }
}

pub fn notify(event: Event, delay: SimTime) {
    unsafe { sys::ltsim_notify(event.0, delay.as_ps()) }
}

pub fn qk_inc(t: SimTime) {
    unsafe { sys::ltsim_qk_inc(t.as_ps()) }
}

pub fn qk_need_sync() -> bool {
    unsafe { sys::ltsim_qk_need_sync() != 0 }
}

pub fn qk_sync() {
    unsafe { sys::ltsim_qk_sync() }
}

/// Deterministic stand-in for instruction-set simulation work.
#[inline(never)]
pub fn compute(state: u64, iterations: u32) -> u64 {
    let mut x = state;
    for _ in 0..iterations {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        x = std::hint::black_box(x);
    }
    x
}

/// Formats, prints and optionally stores the run digest. Returns the exit code.
pub fn finish(workload: &str, args: &CommonArgs, final_time: SimTime, checksum: u64, extra: &[(&str, u64)]) -> i32 {
    let mut digest = String::new();
    let _ = writeln!(digest, "workload={workload}");
    let _ = writeln!(digest, "final_sim_ps={}", final_time.as_ps());
    let _ = writeln!(digest, "activations={}", unsafe { sys::ltsim_activation_count() });
    let _ = writeln!(digest, "activation_digest={:016x}", unsafe { sys::ltsim_activation_digest() });
    let _ = writeln!(digest, "checksum={checksum:016x}");
    for (key, value) in extra {
        let _ = writeln!(digest, "{key}={value}");
    }
    print!("{digest}");
    if let Some(path) = &args.out {
        if let Err(e) = std::fs::write(path, &digest) {
            eprintln!("{workload}: cannot write {}: {e}", path.display());
            return 1;
        }
    }
    0
}
