//! A loosely-timed, cooperative discrete-event simulation kernel.
//!
//! Processes are stackful coroutines scheduled on one thread. Each process
//! runs ahead of global simulation time by accumulating a local offset with
//! the quantum keeper ([`qk_inc`]) and synchronizes ([`qk_sync`]) once the
//! offset reaches the configured quantum.
//!
//! The same kernel is exposed through a C ABI ([`export_abi!`]) so it can be
//! built as a shared library whose wait and notify entry points are
//! interposable at load time.

use std::marker::PhantomData;

use nistt_core::SimTime;
use thiserror::Error;

pub mod abi;
mod sched;
pub mod tracing;

pub use sched::{
    activation_count, activation_digest, activations, create_event, current_process, event_name,
    now, notify, process_entry, process_name, process_state, qk_inc, qk_local_time, qk_need_sync,
    qk_sync, quantum_limit, spawn, wait_event, wait_time, Dispatch,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProcessId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(pub u32);

impl ProcessId {
    fn index(self) -> usize {
        self.0 as usize
    }
}

impl EventId {
    fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProcessState {
    Created,
    Runnable,
    Running,
    WaitingTime,
    WaitingEvent,
    Terminated,
}

pub const DEFAULT_STACK_SIZE: usize = 256 * 1024;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelConfig {
    pub quantum_limit: SimTime,
    /// `None` runs until no work is left.
    pub run_until: Option<SimTime>,
    pub rng_seed: u64,
    pub stack_size: usize,
    /// Keep the full (process, time) activation list, not just its digest.
    pub record_activations: bool,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            quantum_limit: SimTime::from_us(100),
            run_until: None,
            rng_seed: 0,
            stack_size: DEFAULT_STACK_SIZE,
            record_activations: false,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("quantum limit must be positive")]
    ZeroQuantum,
    #[error("a process named `{0}` already exists")]
    DuplicateProcess(String),
    #[error("an event named `{0}` already exists")]
    DuplicateEvent(String),
    #[error("invalid name `{0}` (allowed: letters, digits, `_`, `.`, `[`, `]`)")]
    InvalidName(String),
    #[error("processes cannot be spawned once the simulation has started")]
    SpawnAfterRun,
    #[error("no simulation exists on this thread")]
    NoSimulation,
    #[error("a simulation already exists on this thread")]
    AlreadyCreated,
}

/// Owning handle to this thread's simulation; dropping it tears it down.
pub struct Simulation {
    _single_thread: PhantomData<*const ()>,
}

impl Simulation {
    pub fn new(config: KernelConfig) -> Result<Simulation, KernelError> {
        Simulation::with_dispatch(config, Dispatch::default())
    }

    pub fn with_dispatch(config: KernelConfig, dispatch: Dispatch) -> Result<Simulation, KernelError> {
        sched::create(config, dispatch)?;
        Ok(Simulation {
            _single_thread: PhantomData,
        })
    }

    pub fn spawn(&self, name: &str, body: impl FnOnce() + 'static) -> Result<ProcessId, KernelError> {
        sched::spawn(name, Box::new(body))
    }

    pub fn event(&self, name: &str) -> Result<EventId, KernelError> {
        sched::create_event(name)
    }

    /// Runs to completion or to the configured bound; returns the final time.
    pub fn run(&mut self) -> SimTime {
        sched::run().expect("simulation exists while its handle is alive")
    }

    pub fn now(&self) -> SimTime {
        sched::now()
    }
}

impl Drop for Simulation {
    fn drop(&mut self) {
        sched::destroy();
    }
}

/// Whether a simulation exists on the calling thread.
pub fn simulation_exists() -> bool {
    sched::exists()
}
