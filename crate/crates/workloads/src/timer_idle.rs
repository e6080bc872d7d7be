//! A processor that idles on an interrupt line between phases of work.
//!
//! The CPU runs until `--idle-start`, then repeatedly programs the timer
//! through a delayed notification of `arm_timer_ns` and waits for interrupt
//! (`irq`). The timer process raises `irq` when its event fires. After the
//! last delay the CPU works until `--end`.

use std::cell::{Cell, RefCell};
use std::ffi::c_void;

use clap::Parser;
use nistt_core::SimTime;

use crate::{compute, finish, notify, now, qk_inc, qk_need_sync, qk_sync, wait_event, CommonArgs, Event, Sim};

#[derive(Parser, Debug)]
#[command(name = "timer_idle", about = "Processor idling on a timer interrupt")]
pub struct TimerIdleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value = "400ms")]
    pub idle_start: SimTime,
    /// Timer delays programmed one after another.
    #[arg(long, value_delimiter = ',', default_value = "700ms,200ms,500ms")]
    pub delays: Vec<SimTime>,
    #[arg(long, default_value = "2s")]
    pub end: SimTime,
    /// Work iterations per tenth of a quantum.
    #[arg(long, default_value_t = 50)]
    pub work: u32,
}

struct Plan {
    idle_start: SimTime,
    delays: Vec<SimTime>,
    end: SimTime,
    work: u32,
    block: SimTime,
    irq: Event,
    arm: Event,
}

thread_local! {
    static PLAN: RefCell<Option<Plan>> = const { RefCell::new(None) };
    static CHECKSUM: Cell<u64> = const { Cell::new(0) };
    static INTERRUPTS: Cell<u64> = const { Cell::new(0) };
}

fn plan<R>(f: impl FnOnce(&Plan) -> R) -> R {
    PLAN.with_borrow(|p| f(p.as_ref().expect("plan set before run")))
}

fn work_until(t: SimTime, work: u32, block: SimTime) {
    let mut state = CHECKSUM.get();
    while now() < t {
        state = compute(state, work);
        qk_inc(block);
        if qk_need_sync() {
            qk_sync();
            CHECKSUM.set(state);
        }
    }
}

extern "C" fn cpu(_: *mut c_void) {
    let (idle_start, delays, end, work, block, irq, arm) =
        plan(|p| (p.idle_start, p.delays.clone(), p.end, p.work, p.block, p.irq, p.arm));
    work_until(idle_start, work, block);
    for delay in delays {
        notify(arm, delay);
        wait_event(irq);
    }
    work_until(end, work, block);
}

extern "C" fn timer(_: *mut c_void) {
    let (irq, arm) = plan(|p| (p.irq, p.arm));
    loop {
        wait_event(arm);
        INTERRUPTS.set(INTERRUPTS.get() + 1);
        notify(irq, SimTime::ZERO);
    }
}

pub fn main() -> i32 {
    let args = TimerIdleArgs::parse();
    match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("timer_idle: {e}");
            1
        }
    }
}

fn run(args: &TimerIdleArgs) -> Result<i32, String> {
    let sim = Sim::create(&args.common)?;
    let irq = sim.event(c"irq")?;
    let arm = sim.event(c"arm_timer_ns")?;
    PLAN.set(Some(Plan {
        idle_start: args.idle_start,
        delays: args.delays.clone(),
        end: args.end,
        work: args.work,
        block: SimTime::from_ps((args.common.quantum.as_ps() / 10).max(1)),
        irq,
        arm,
    }));
    CHECKSUM.set(args.common.seed ^ 0x2545_f491_4f6c_dd1d);
    sim.spawn("cpu", cpu)?;
    sim.spawn("timer", timer)?;
    let end = sim.run();
    Ok(finish(
        "timer_idle",
        &args.common,
        end,
        CHECKSUM.get(),
        &[("interrupts", INTERRUPTS.get())],
    ))
}
