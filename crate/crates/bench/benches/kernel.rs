use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use ltsim_kernel::{qk_inc, qk_need_sync, qk_sync, wait_time, KernelConfig, Simulation};
use nistt_core::SimTime;

const SWITCHES: u64 = 10_000;

/// Two processes alternating on timed waits: every wait is a coroutine
/// switch out and back.
fn ping_pong(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel");
    group.throughput(Throughput::Elements(2 * SWITCHES));
    group.bench_function("timed_wait_switch", |b| {
        b.iter(|| {
            let mut sim = Simulation::new(KernelConfig::default()).unwrap();
            for name in ["ping", "pong"] {
                sim.spawn(name, || {
                    for _ in 0..SWITCHES {
                        wait_time(SimTime::from_ns(10));
                    }
                })
                .unwrap();
            }
            sim.run()
        })
    });
    group.finish();
}

/// Quantum keeper bookkeeping with one sync per ten increments.
fn quantum_keeper(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel");
    group.throughput(Throughput::Elements(10 * SWITCHES));
    group.bench_function("qk_inc_sync", |b| {
        b.iter(|| {
            let mut sim = Simulation::new(KernelConfig::default()).unwrap();
            sim.spawn("cpu", || {
                for _ in 0..10 * SWITCHES {
                    qk_inc(SimTime::from_us(10));
                    if qk_need_sync() {
                        qk_sync();
                    }
                }
            })
            .unwrap();
            sim.run()
        })
    });
    group.finish();
}

criterion_group!(benches, ping_pong, quantum_keeper);
criterion_main!(benches);
