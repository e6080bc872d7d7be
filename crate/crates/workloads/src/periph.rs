//! A processor hammering a memory-mapped peripheral.
//!
//! Every register access is a blocking transport call into the peripheral
//! model, which notifies its serialize event (`IN_FREE`) after handling the
//! transaction. The UART process only occasionally waits on that event, so
//! notifications vastly outnumber waits.

use std::cell::Cell;
use std::ffi::c_void;

use clap::Parser;
use nistt_core::SimTime;

use crate::{compute, finish, notify, qk_inc, qk_need_sync, qk_sync, wait_event, wait_time, CommonArgs, Event, Sim};

#[derive(Parser, Debug)]
#[command(name = "periph", about = "Processor issuing register accesses to a peripheral")]
pub struct PeriphArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 100_000)]
    pub accesses: u64,
    /// Local time consumed by one access.
    #[arg(long, default_value = "100ns")]
    pub access_time: SimTime,
    /// Interval between the UART's waits on `IN_FREE`.
    #[arg(long, default_value = "1ms")]
    pub poll: SimTime,
    #[arg(long, default_value_t = 20)]
    pub work: u32,
}

thread_local! {
    static SETUP: Cell<(u64, u64, u64, u32)> = const { Cell::new((0, 0, 0, 0)) };
    static IN_FREE: Cell<Option<Event>> = const { Cell::new(None) };
    static CPU_DONE: Cell<bool> = const { Cell::new(false) };
    static REGISTER: Cell<u64> = const { Cell::new(0) };
    static HANDLED: Cell<u64> = const { Cell::new(0) };
    static UART_WAKEUPS: Cell<u64> = const { Cell::new(0) };
}

fn in_free() -> Event {
    IN_FREE.get().expect("event created before run")
}

fn transport(value: u64) {
    REGISTER.set(REGISTER.get().rotate_left(5) ^ value);
    HANDLED.set(HANDLED.get() + 1);
    notify(in_free(), SimTime::ZERO);
}

extern "C" fn cpu(_: *mut c_void) {
    let (accesses, access_ps, _, work) = SETUP.get();
    let access = SimTime::from_ps(access_ps);
    let mut state = REGISTER.get() | 1;
    for _ in 0..accesses {
        state = compute(state, work);
        transport(state);
        qk_inc(access);
        if qk_need_sync() {
            qk_sync();
        }
    }
    CPU_DONE.set(true);
}

extern "C" fn uart(_: *mut c_void) {
    let poll = SimTime::from_ps(SETUP.get().2);
    while !CPU_DONE.get() {
        wait_time(poll);
        if CPU_DONE.get() {
            break;
        }
        wait_event(in_free());
        UART_WAKEUPS.set(UART_WAKEUPS.get() + 1);
    }
}

pub fn main() -> i32 {
    let args = PeriphArgs::parse();
    match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("periph: {e}");
            1
        }
    }
}

fn run(args: &PeriphArgs) -> Result<i32, String> {
    let sim = Sim::create(&args.common)?;
    IN_FREE.set(Some(sim.event(c"IN_FREE")?));
    SETUP.set((args.accesses, args.access_time.as_ps(), args.poll.as_ps().max(1), args.work));
    REGISTER.set(args.common.seed);
    sim.spawn("cpu", cpu)?;
    sim.spawn("uart", uart)?;
    let end = sim.run();
    Ok(finish(
        "periph",
        &args.common,
        end,
        REGISTER.get(),
        &[("accesses", HANDLED.get()), ("uart_wakeups", UART_WAKEUPS.get())],
    ))
}
