//! One CPU-like process that never idles: it executes `--syncs` quanta of
//! work, each split into ten blocks, and synchronizes whenever the quantum
//! keeper asks for it.

use std::cell::Cell;
use std::ffi::c_void;

use clap::Parser;

use crate::{compute, finish, qk_inc, qk_need_sync, qk_sync, CommonArgs, Sim};

pub const BLOCKS_PER_QUANTUM: u64 = 10;

#[derive(Parser, Debug)]
#[command(name = "busy", about = "Single always-busy processor process")]
pub struct BusyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of quantum synchronizations.
    #[arg(long, default_value_t = 20_000)]
    pub syncs: u64,
    /// Work iterations per block.
    #[arg(long, default_value_t = 100)]
    pub work: u32,
}

thread_local! {
    static SETUP: Cell<(u64, u32, u64)> = const { Cell::new((0, 0, 0)) };
    static CHECKSUM: Cell<u64> = const { Cell::new(0) };
    static SYNCS_DONE: Cell<u64> = const { Cell::new(0) };
}

extern "C" fn cpu(_: *mut c_void) {
    let (syncs, work, block_ps) = SETUP.get();
    let mut state = CHECKSUM.get();
    let block = nistt_core::SimTime::from_ps(block_ps);
    let mut done = 0;
    while done < syncs {
        state = compute(state, work);
        qk_inc(block);
        if qk_need_sync() {
            qk_sync();
            done += 1;
            CHECKSUM.set(state);
            SYNCS_DONE.set(done);
        }
    }
}

pub fn main() -> i32 {
    let args = BusyArgs::parse();
    let sim = match Sim::create(&args.common) {
        Ok(sim) => sim,
        Err(e) => {
            eprintln!("busy: {e}");
            return 1;
        }
    };
    let block_ps = (args.common.quantum.as_ps() / BLOCKS_PER_QUANTUM).max(1);
    SETUP.set((args.syncs, args.work, block_ps));
    CHECKSUM.set(args.common.seed ^ 0x9e37_79b9_7f4a_7c15);
    if let Err(e) = sim.spawn("cpu", cpu) {
        eprintln!("busy: {e}");
        return 1;
    }
    let end = sim.run();
    finish("busy", &args.common, end, CHECKSUM.get(), &[("syncs", SYNCS_DONE.get())])
}
