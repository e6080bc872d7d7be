//! Scheduler state and the operations processes call into.
//!
//! The kernel is a per-thread singleton. Every entry point borrows it only
//! for the duration of a state update; no borrow is ever held across a
//! coroutine switch or a call through the dispatch table, because both can
//! re-enter the kernel.

use std::cell::RefCell;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::ffi::{CStr, CString};
use std::hash::{DefaultHasher, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};

use corosensei::stack::DefaultStack;
use corosensei::{Coroutine, CoroutineResult, Yielder};
use nistt_core::recorder::NameSource;
use nistt_core::SimTime;

use crate::tracing;
use crate::{EventId, KernelConfig, KernelError, ProcessId, ProcessState};

type Process = Coroutine<(), (), (), DefaultStack>;
type ProcessYielder = Yielder<(), ()>;

/// Entry points the kernel itself calls that must stay interposable.
#[derive(Clone, Copy, Debug)]
pub struct Dispatch {
    pub process_entry: extern "C" fn(u64),
    pub wait_time: extern "C" fn(u64),
}

extern "C" fn direct_process_entry(pid: u64) {
    process_entry(ProcessId(pid as u32));
}

extern "C" fn direct_wait_time(ps: u64) {
    wait_time(SimTime::from_ps(ps));
}

impl Default for Dispatch {
    fn default() -> Self {
        Dispatch {
            process_entry: direct_process_entry,
            wait_time: direct_wait_time,
        }
    }
}

struct ProcessSlot {
    name: CString,
    state: ProcessState,
    local_time: SimTime,
    entry: Option<Box<dyn FnOnce()>>,
    coroutine: Option<Process>,
    yielder: *const ProcessYielder,
}

struct EventSlot {
    name: CString,
    /// Firing time and token of the pending delayed notification.
    pending: Option<(SimTime, u64)>,
    waiters: Vec<ProcessId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Wakeup {
    Process(ProcessId),
    Event { event: EventId, token: u64 },
}

struct Kernel {
    config: KernelConfig,
    dispatch: Dispatch,
    now: SimTime,
    started: bool,
    processes: Vec<ProcessSlot>,
    events: Vec<EventSlot>,
    runnable: VecDeque<ProcessId>,
    timed: BinaryHeap<Reverse<(SimTime, u64, Wakeup)>>,
    seq: u64,
    current: Option<ProcessId>,
    digest: DefaultHasher,
    activation_count: u64,
    activations: Vec<(ProcessId, SimTime)>,
}

thread_local! {
    static KERNEL: RefCell<Option<Kernel>> = const { RefCell::new(None) };
}

/// Last simulation time of this process's kernel, readable from any context
/// (including exit handlers that run after thread-locals are gone).
static NOW_PS: AtomicU64 = AtomicU64::new(0);

struct Names<'a> {
    processes: &'a [ProcessSlot],
    events: &'a [EventSlot],
}

impl NameSource for Names<'_> {
    fn process_name(&self, pid: u32) -> String {
        self.processes
            .get(pid as usize)
            .map(|p| p.name.to_string_lossy().into_owned())
            .unwrap_or_default()
    }

    fn event_name(&self, event: u32) -> String {
        self.events
            .get(event as usize)
            .map(|e| e.name.to_string_lossy().into_owned())
            .unwrap_or_default()
    }
}

impl Kernel {
    fn names(&self) -> Names<'_> {
        Names {
            processes: &self.processes,
            events: &self.events,
        }
    }

    fn current_or_abort(&self, op: &str) -> ProcessId {
        match self.current {
            Some(pid) => pid,
            None => fatal(&format!("{op} called outside of a simulation process")),
        }
    }

    fn proc_mut(&mut self, pid: ProcessId) -> &mut ProcessSlot {
        &mut self.processes[pid.index()]
    }

    fn schedule(&mut self, at: SimTime, wakeup: Wakeup) {
        self.seq += 1;
        self.timed.push(Reverse((at, self.seq, wakeup)));
    }

    fn make_runnable(&mut self, pid: ProcessId) {
        self.proc_mut(pid).state = ProcessState::Runnable;
        self.runnable.push_back(pid);
    }

    fn fire(&mut self, event: EventId) {
        let slot = &mut self.events[event.index()];
        slot.pending = None;
        let mut waiters = std::mem::take(&mut slot.waiters);
        waiters.sort_unstable();
        for pid in waiters {
            self.make_runnable(pid);
        }
    }

    fn set_now(&mut self, t: SimTime) {
        self.now = t;
        NOW_PS.store(t.as_ps(), Ordering::Relaxed);
    }

    /// Advances to the next timed instant. Returns false when nothing is
    /// left to do at or before `until`.
    fn advance(&mut self, until: Option<SimTime>) -> bool {
        let Some(Reverse((at, _, _))) = self.timed.peek().copied() else {
            return false;
        };
        if until.is_some_and(|u| at > u) {
            let u = until.unwrap();
            if u > self.now {
                self.set_now(u);
            }
            return false;
        }
        self.set_now(at);
        // Everything waking at this instant becomes runnable together,
        // ordered by process id.
        let mut woken = Vec::new();
        while let Some(Reverse((t, _, wakeup))) = self.timed.peek().copied() {
            if t != at {
                break;
            }
            self.timed.pop();
            match wakeup {
                Wakeup::Process(pid) => woken.push(pid),
                Wakeup::Event { event, token } => {
                    let slot = &mut self.events[event.index()];
                    if slot.pending.map(|(_, k)| k) == Some(token) {
                        slot.pending = None;
                        woken.append(&mut slot.waiters);
                    }
                }
            }
        }
        woken.sort_unstable();
        for pid in woken {
            self.make_runnable(pid);
        }
        true
    }

    fn record_activation(&mut self, pid: ProcessId) {
        self.digest.write_u32(pid.0);
        self.digest.write_u64(self.now.as_ps());
        self.activation_count += 1;
        if self.config.record_activations {
            self.activations.push((pid, self.now));
        }
    }
}

impl Drop for Kernel {
    fn drop(&mut self) {
        for slot in &mut self.processes {
            if let Some(mut co) = slot.coroutine.take() {
                if co.started() && !co.done() {
                    // Suspended processes only hold plain data and extern "C"
                    // frames, which cannot be unwound; abandon the stack.
                    unsafe { co.force_reset() };
                }
            }
        }
    }
}

pub(crate) fn fatal(message: &str) -> ! {
    eprintln!("ltsim: {message}");
    std::process::abort();
}

fn with_kernel<R>(f: impl FnOnce(&mut Kernel) -> R) -> Option<R> {
    KERNEL
        .try_with(|cell| cell.borrow_mut().as_mut().map(f))
        .ok()
        .flatten()
}

fn with_kernel_or_abort<R>(op: &str, f: impl FnOnce(&mut Kernel) -> R) -> R {
    with_kernel(f).unwrap_or_else(|| fatal(&format!("{op} called without a simulation")))
}

pub(crate) fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'[' | b']'))
}

pub fn create(config: KernelConfig, dispatch: Dispatch) -> Result<(), KernelError> {
    if config.quantum_limit == SimTime::ZERO {
        return Err(KernelError::ZeroQuantum);
    }
    KERNEL.with(|cell| {
        let mut slot = cell.borrow_mut();
        if slot.is_some() {
            return Err(KernelError::AlreadyCreated);
        }
        NOW_PS.store(0, Ordering::Relaxed);
        *slot = Some(Kernel {
            config,
            dispatch,
            now: SimTime::ZERO,
            started: false,
            processes: Vec::new(),
            events: Vec::new(),
            runnable: VecDeque::new(),
            timed: BinaryHeap::new(),
            seq: 0,
            current: None,
            digest: DefaultHasher::new(),
            activation_count: 0,
            activations: Vec::new(),
        });
        Ok(())
    })
}

pub fn exists() -> bool {
    KERNEL
        .try_with(|cell| cell.borrow().is_some())
        .unwrap_or(false)
}

/// Tears the simulation down; suspended processes are abandoned.
pub fn destroy() {
    let kernel = KERNEL.try_with(|cell| cell.borrow_mut().take()).ok().flatten();
    drop(kernel);
}

pub fn spawn(name: &str, entry: Box<dyn FnOnce()>) -> Result<ProcessId, KernelError> {
    if !valid_name(name) {
        return Err(KernelError::InvalidName(name.to_owned()));
    }
    with_kernel(|k| {
        if k.started {
            return Err(KernelError::SpawnAfterRun);
        }
        if k.processes.iter().any(|p| p.name.as_bytes() == name.as_bytes()) {
            return Err(KernelError::DuplicateProcess(name.to_owned()));
        }
        let pid = ProcessId(k.processes.len() as u32);
        k.processes.push(ProcessSlot {
            name: CString::new(name).expect("validated name"),
            state: ProcessState::Created,
            local_time: SimTime::ZERO,
            entry: Some(entry),
            coroutine: None,
            yielder: std::ptr::null(),
        });
        k.runnable.push_back(pid);
        Ok(pid)
    })
    .unwrap_or(Err(KernelError::NoSimulation))
}

pub fn create_event(name: &str) -> Result<EventId, KernelError> {
    if !valid_name(name) {
        return Err(KernelError::InvalidName(name.to_owned()));
    }
    with_kernel(|k| {
        if k.events.iter().any(|e| e.name.as_bytes() == name.as_bytes()) {
            return Err(KernelError::DuplicateEvent(name.to_owned()));
        }
        let id = EventId(k.events.len() as u32);
        k.events.push(EventSlot {
            name: CString::new(name).expect("validated name"),
            pending: None,
            waiters: Vec::new(),
        });
        Ok(id)
    })
    .unwrap_or(Err(KernelError::NoSimulation))
}

/// Runs until no work remains or the configured `run_until` is reached.
pub fn run() -> Result<SimTime, KernelError> {
    let until = with_kernel(|k| {
        k.started = true;
        k.config.run_until
    })
    .ok_or(KernelError::NoSimulation)?;
    loop {
        match with_kernel(|k| k.runnable.pop_front()).flatten() {
            Some(pid) => activate(pid),
            None => {
                if !with_kernel(|k| k.advance(until)).unwrap_or(false) {
                    break;
                }
            }
        }
    }
    Ok(now())
}

fn activate(pid: ProcessId) {
    let (coroutine, stack_size, dispatch) = with_kernel_or_abort("run", |k| {
        k.record_activation(pid);
        k.current = Some(pid);
        let slot = k.proc_mut(pid);
        slot.state = ProcessState::Running;
        (slot.coroutine.take(), k.config.stack_size, k.dispatch)
    });
    let mut coroutine = match coroutine {
        Some(co) => co,
        None => {
            let stack = DefaultStack::new(stack_size)
                .unwrap_or_else(|e| fatal(&format!("cannot allocate process stack: {e}")));
            Coroutine::with_stack(stack, move |yielder: &ProcessYielder, ()| {
                with_kernel_or_abort("process start", |k| {
                    k.proc_mut(pid).yielder = yielder as *const ProcessYielder;
                });
                (dispatch.process_entry)(u64::from(pid.0));
            })
        }
    };
    let finished = matches!(coroutine.resume(()), CoroutineResult::Return(()));
    with_kernel_or_abort("run", |k| {
        k.current = None;
        let slot = k.proc_mut(pid);
        if finished {
            slot.state = ProcessState::Terminated;
        } else {
            slot.coroutine = Some(coroutine);
        }
    });
}

/// Coroutine entry: runs the process body until it first suspends or returns.
pub fn process_entry(pid: ProcessId) {
    let entry = with_kernel_or_abort("process entry", |k| {
        let now = k.now;
        tracing::with(|r| r.process_enter(now, pid.0, &k.names()));
        let slot = k.proc_mut(pid);
        slot.state = ProcessState::Running;
        slot.entry.take()
    });
    if let Some(entry) = entry {
        entry();
    }
}

fn suspend(yielder: *const ProcessYielder) {
    // SAFETY: the yielder belongs to the running coroutine, which is the
    // caller's own stack; it outlives this call.
    unsafe { (*yielder).suspend(()) }
}

pub fn wait_time(duration: SimTime) {
    let (pid, yielder) = with_kernel_or_abort("wait_time", |k| {
        let pid = k.current_or_abort("wait_time");
        let now = k.now;
        tracing::with(|r| r.suspend_time(now, pid.0, duration, &k.names()));
        k.proc_mut(pid).local_time = SimTime::ZERO;
        if duration == SimTime::ZERO {
            k.make_runnable(pid);
        } else {
            k.proc_mut(pid).state = ProcessState::WaitingTime;
            let at = now
                .checked_add(duration)
                .unwrap_or_else(|| fatal("wait_time overflows simulation time"));
            k.schedule(at, Wakeup::Process(pid));
        }
        (pid, k.processes[pid.index()].yielder)
    });
    suspend(yielder);
    with_kernel_or_abort("wait_time", |k| {
        let now = k.now;
        tracing::with(|r| r.resume_time(now, pid.0, duration, &k.names()));
    });
}

pub fn wait_event(event: EventId) {
    let (pid, yielder) = with_kernel_or_abort("wait_event", |k| {
        let pid = k.current_or_abort("wait_event");
        if event.index() >= k.events.len() {
            fatal(&format!("wait_event on unknown event {}", event.0));
        }
        let now = k.now;
        tracing::with(|r| r.suspend_event(now, pid.0, event.0, &k.names()));
        k.proc_mut(pid).state = ProcessState::WaitingEvent;
        k.events[event.index()].waiters.push(pid);
        (pid, k.processes[pid.index()].yielder)
    });
    suspend(yielder);
    with_kernel_or_abort("wait_event", |k| {
        let now = k.now;
        tracing::with(|r| r.resume_event(now, pid.0, event.0, &k.names()));
    });
}

/// Zero delay fires now (waiters run after the notifier yields); otherwise
/// the event fires at `now + delay`. Of competing notifications the earliest
/// firing time wins.
pub fn notify(event: EventId, delay: SimTime) {
    with_kernel_or_abort("notify", |k| {
        if event.index() >= k.events.len() {
            fatal(&format!("notify on unknown event {}", event.0));
        }
        let now = k.now;
        tracing::with(|r| r.notify(now, event.0, delay, &k.names()));
        if delay == SimTime::ZERO {
            k.fire(event);
            return;
        }
        let at = now
            .checked_add(delay)
            .unwrap_or_else(|| fatal("notify delay overflows simulation time"));
        if k.events[event.index()]
            .pending
            .is_some_and(|(pending, _)| pending <= at)
        {
            return;
        }
        k.seq += 1;
        let token = k.seq;
        k.events[event.index()].pending = Some((at, token));
        k.schedule(at, Wakeup::Event { event, token });
    });
}

pub fn now() -> SimTime {
    SimTime::from_ps(NOW_PS.load(Ordering::Relaxed))
}

pub fn qk_inc(delta: SimTime) {
    with_kernel_or_abort("qk_inc", |k| {
        let pid = k.current_or_abort("qk_inc");
        k.proc_mut(pid).local_time += delta;
    });
}

pub fn qk_local_time() -> SimTime {
    with_kernel_or_abort("qk_local_time", |k| {
        let pid = k.current_or_abort("qk_local_time");
        k.processes[pid.index()].local_time
    })
}

pub fn qk_need_sync() -> bool {
    with_kernel_or_abort("qk_need_sync", |k| {
        let pid = k.current_or_abort("qk_need_sync");
        k.processes[pid.index()].local_time >= k.config.quantum_limit
    })
}

/// Synchronizes the caller's local time through the (interposable) timed wait.
pub fn qk_sync() {
    let (local, dispatch) = with_kernel_or_abort("qk_sync", |k| {
        let pid = k.current_or_abort("qk_sync");
        (k.processes[pid.index()].local_time, k.dispatch)
    });
    (dispatch.wait_time)(local.as_ps());
}

pub fn quantum_limit() -> Option<SimTime> {
    with_kernel(|k| k.config.quantum_limit)
}

pub fn current_process() -> Option<ProcessId> {
    with_kernel(|k| k.current).flatten()
}

pub fn process_state(pid: ProcessId) -> Option<ProcessState> {
    with_kernel(|k| k.processes.get(pid.index()).map(|p| p.state)).flatten()
}

/// Pointer to the NUL-terminated name; valid until the simulation is destroyed.
pub fn process_name_ptr(pid: ProcessId) -> Option<*const libc::c_char> {
    with_kernel(|k| k.processes.get(pid.index()).map(|p| p.name.as_ptr())).flatten()
}

pub fn event_name_ptr(event: EventId) -> Option<*const libc::c_char> {
    with_kernel(|k| k.events.get(event.index()).map(|e| e.name.as_ptr())).flatten()
}

pub fn process_name(pid: ProcessId) -> Option<String> {
    process_name_ptr(pid).map(|p| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

pub fn event_name(event: EventId) -> Option<String> {
    event_name_ptr(event).map(|p| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

/// Hash over every (process, sim time) dispatch, in order.
pub fn activation_digest() -> u64 {
    with_kernel(|k| k.digest.finish()).unwrap_or(0)
}

pub fn activation_count() -> u64 {
    with_kernel(|k| k.activation_count).unwrap_or(0)
}

pub fn activations() -> Vec<(ProcessId, SimTime)> {
    with_kernel(|k| k.activations.clone()).unwrap_or_default()
}
