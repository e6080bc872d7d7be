use std::cell::RefCell;
use std::rc::Rc;

use ltsim_kernel::{
    activations, notify, now, process_state, qk_inc, qk_local_time, qk_need_sync, qk_sync,
    wait_event, wait_time, EventId, KernelConfig, KernelError, ProcessId, ProcessState, Simulation,
};
use nistt_core::SimTime;
use proptest::prelude::*;

type Log<T> = Rc<RefCell<Vec<T>>>;

fn log<T>() -> Log<T> {
    Rc::new(RefCell::new(Vec::new()))
}

fn ns(v: u64) -> SimTime {
    SimTime::from_ns(v)
}

fn sim() -> Simulation {
    Simulation::new(KernelConfig::default()).unwrap()
}

fn sim_with(f: impl FnOnce(&mut KernelConfig)) -> Simulation {
    let mut config = KernelConfig::default();
    f(&mut config);
    Simulation::new(config).unwrap()
}

#[test]
fn fresh_simulation_starts_at_zero() {
    let s = sim();
    assert_eq!(s.now(), SimTime::ZERO);
    assert_eq!(KernelConfig::default().quantum_limit.as_ps(), 100_000_000);
}

#[test]
fn zero_quantum_is_rejected() {
    let err = Simulation::new(KernelConfig {
        quantum_limit: SimTime::ZERO,
        ..KernelConfig::default()
    })
    .err();
    assert_eq!(err, Some(KernelError::ZeroQuantum));
}

#[test]
fn one_simulation_per_thread() {
    let _s = sim();
    assert_eq!(Simulation::new(KernelConfig::default()).err(), Some(KernelError::AlreadyCreated));
}

#[test]
fn spawn_assigns_sequential_ids() {
    let s = sim();
    let ids: Vec<_> = (0..5).map(|i| s.spawn(&format!("p{i}"), || {}).unwrap()).collect();
    assert_eq!(ids, (0..5).map(ProcessId).collect::<Vec<_>>());
    assert_eq!(process_state(ProcessId(0)), Some(ProcessState::Created));
}

#[test]
fn spawn_rejects_duplicates_and_bad_names() {
    let s = sim();
    s.spawn("cpu", || {}).unwrap();
    assert_eq!(s.spawn("cpu", || {}), Err(KernelError::DuplicateProcess("cpu".into())));
    assert!(matches!(s.spawn("a b", || {}), Err(KernelError::InvalidName(_))));
    assert!(matches!(s.spawn("", || {}), Err(KernelError::InvalidName(_))));
    s.spawn("core[0].cpu_1", || {}).unwrap();
    s.event("irq").unwrap();
    assert_eq!(s.event("irq"), Err(KernelError::DuplicateEvent("irq".into())));
}

#[test]
fn spawn_after_run_is_rejected() {
    let mut s = sim();
    s.spawn("a", || {}).unwrap();
    s.run();
    assert_eq!(s.spawn("b", || {}), Err(KernelError::SpawnAfterRun));
}

#[test]
fn returning_process_terminates_at_zero() {
    let mut s = sim();
    let pid = s.spawn("quick", || {}).unwrap();
    assert_eq!(s.run(), SimTime::ZERO);
    assert_eq!(process_state(pid), Some(ProcessState::Terminated));
}

#[test]
fn timed_waiter_is_in_waiting_time() {
    let mut s = sim();
    let seen = log();
    let waiter = s.spawn("waiter", || wait_time(ns(10))).unwrap();
    let seen2 = seen.clone();
    s.spawn("observer", move || seen2.borrow_mut().push(process_state(waiter)))
        .unwrap();
    assert_eq!(s.run(), ns(10));
    assert_eq!(*seen.borrow(), vec![Some(ProcessState::WaitingTime)]);
}

#[test]
fn entries_run_in_registration_order() {
    let mut s = sim_with(|c| c.record_activations = true);
    for name in ["a", "b", "c"] {
        s.spawn(name, || wait_time(ns(1))).unwrap();
    }
    s.run();
    let act = activations();
    let first: Vec<_> = act[..3].iter().map(|&(p, t)| (p.0, t)).collect();
    assert_eq!(first, vec![(0, SimTime::ZERO), (1, SimTime::ZERO), (2, SimTime::ZERO)]);
}

#[test]
fn wait_time_resumes_after_duration() {
    let mut s = sim();
    let at = log();
    let at2 = at.clone();
    s.spawn("p", move || {
        wait_time(SimTime::from_us(100));
        at2.borrow_mut().push(now());
    })
    .unwrap();
    s.run();
    assert_eq!(*at.borrow(), vec![SimTime::from_us(100)]);
}

#[test]
fn shorter_wait_resumes_first() {
    let mut s = sim();
    let order = log();
    for (name, d) in [("A", 30), ("B", 20)] {
        let order = order.clone();
        s.spawn(name, move || {
            wait_time(ns(d));
            order.borrow_mut().push((name, now()));
        })
        .unwrap();
    }
    s.run();
    assert_eq!(*order.borrow(), vec![("B", ns(20)), ("A", ns(30))]);
}

#[test]
fn zero_wait_yields_to_same_instant() {
    let mut s = sim();
    let order = log();
    let o1 = order.clone();
    s.spawn("yielder", move || {
        o1.borrow_mut().push("y1");
        wait_time(SimTime::ZERO);
        o1.borrow_mut().push("y2");
    })
    .unwrap();
    let o2 = order.clone();
    s.spawn("other", move || o2.borrow_mut().push("o")).unwrap();
    assert_eq!(s.run(), SimTime::ZERO);
    assert_eq!(*order.borrow(), vec!["y1", "o", "y2"]);
}

#[test]
fn simultaneous_wakeups_follow_process_id() {
    let mut s = sim();
    let order = log();
    // Scheduled in reverse id order, but all wake at 10 ns.
    for (i, d) in [(0u32, 10u64), (1, 5), (2, 0)] {
        let order = order.clone();
        s.spawn(&format!("p{i}"), move || {
            wait_time(ns(d));
            if d < 10 {
                wait_time(ns(10 - d));
            }
            order.borrow_mut().push(i);
        })
        .unwrap();
    }
    s.run();
    assert_eq!(*order.borrow(), vec![0, 1, 2]);
}

#[test]
fn delayed_notify_wakes_waiter() {
    let mut s = sim();
    let irq = s.event("irq").unwrap();
    let at = log();
    let at2 = at.clone();
    s.spawn("cpu", move || {
        wait_event(irq);
        at2.borrow_mut().push(now());
    })
    .unwrap();
    s.spawn("timer", move || {
        wait_time(ns(10));
        notify(irq, ns(50));
    })
    .unwrap();
    s.run();
    assert_eq!(*at.borrow(), vec![ns(60)]);
}

#[test]
fn one_notify_wakes_all_waiters() {
    let mut s = sim();
    let ev = s.event("ev").unwrap();
    let at = log();
    for name in ["w1", "w2"] {
        let at = at.clone();
        s.spawn(name, move || {
            wait_event(ev);
            at.borrow_mut().push((name, now()));
        })
        .unwrap();
    }
    s.spawn("n", move || {
        wait_time(ns(7));
        notify(ev, SimTime::ZERO);
    })
    .unwrap();
    s.run();
    assert_eq!(*at.borrow(), vec![("w1", ns(7)), ("w2", ns(7))]);
}

#[test]
fn starved_waiter_does_not_block_run() {
    let mut s = sim_with(|c| c.run_until = Some(SimTime::from_ms(1)));
    let ev = s.event("never").unwrap();
    let pid = s.spawn("w", move || wait_event(ev)).unwrap();
    assert_eq!(s.run(), SimTime::ZERO);
    assert_eq!(process_state(pid), Some(ProcessState::WaitingEvent));
}

#[test]
fn immediate_notify_resumes_at_same_time() {
    let mut s = sim();
    let ev = s.event("e").unwrap();
    let at = log();
    let at2 = at.clone();
    s.spawn("w", move || {
        wait_event(ev);
        at2.borrow_mut().push(now());
    })
    .unwrap();
    s.spawn("n", move || {
        wait_time(ns(5));
        notify(ev, SimTime::ZERO);
    })
    .unwrap();
    s.run();
    assert_eq!(*at.borrow(), vec![ns(5)]);
}

#[test]
fn immediate_notify_runs_waiter_after_notifier_yields() {
    let mut s = sim();
    let ev = s.event("e").unwrap();
    let order = log();
    let o1 = order.clone();
    s.spawn("w", move || {
        wait_event(ev);
        o1.borrow_mut().push("waiter");
    })
    .unwrap();
    let o2 = order.clone();
    s.spawn("n", move || {
        notify(ev, SimTime::ZERO);
        o2.borrow_mut().push("notifier");
    })
    .unwrap();
    s.run();
    assert_eq!(*order.borrow(), vec!["notifier", "waiter"]);
}

fn firings(setup: impl FnOnce(EventId) + 'static) -> Vec<SimTime> {
    let mut s = sim_with(|c| c.run_until = Some(ns(1000)));
    let ev = s.event("e").unwrap();
    let at = log();
    let at2 = at.clone();
    s.spawn("w", move || loop {
        wait_event(ev);
        at2.borrow_mut().push(now());
    })
    .unwrap();
    s.spawn("n", move || setup(ev)).unwrap();
    s.run();
    let v = at.borrow().clone();
    v
}

#[test]
fn earliest_notification_wins() {
    let fired = firings(|ev| {
        notify(ev, ns(100));
        notify(ev, ns(10));
    });
    assert_eq!(fired, vec![ns(10)]);
}

#[test]
fn later_notification_does_not_postpone() {
    let fired = firings(|ev| {
        notify(ev, ns(10));
        notify(ev, ns(100));
    });
    assert_eq!(fired, vec![ns(10)]);
}

#[test]
fn immediate_notification_cancels_pending_one() {
    let fired = firings(|ev| {
        wait_time(ns(1));
        notify(ev, ns(100));
        notify(ev, SimTime::ZERO);
    });
    assert_eq!(fired, vec![ns(1)]);
}

#[test]
fn notify_outside_process_before_run() {
    let mut s = sim();
    let ev = s.event("e").unwrap();
    let at = log();
    let at2 = at.clone();
    s.spawn("w", move || {
        wait_event(ev);
        at2.borrow_mut().push(now());
    })
    .unwrap();
    notify(ev, ns(42));
    s.run();
    assert_eq!(*at.borrow(), vec![ns(42)]);
}

#[test]
fn quantum_keeper_examples() {
    let mut s = sim();
    let seen = log();
    let seen2 = seen.clone();
    s.spawn("cpu", move || {
        let push = |v: (bool, SimTime, SimTime)| seen2.borrow_mut().push(v);
        qk_inc(SimTime::from_us(100));
        push((qk_need_sync(), qk_local_time(), now()));
        qk_sync();
        push((qk_need_sync(), qk_local_time(), now()));
        qk_inc(SimTime::from_us(40));
        qk_sync();
        push((qk_need_sync(), qk_local_time(), now()));
        qk_inc(SimTime::from_us(60));
        push((qk_need_sync(), qk_local_time(), now()));
        qk_inc(SimTime::from_us(60));
        push((qk_need_sync(), qk_local_time(), now()));
    })
    .unwrap();
    s.run();
    let us = SimTime::from_us;
    assert_eq!(
        *seen.borrow(),
        vec![
            (true, us(100), SimTime::ZERO),
            (false, SimTime::ZERO, us(100)),
            (false, SimTime::ZERO, us(140)),
            (false, us(60), us(140)),
            (true, us(120), us(140)),
        ]
    );
}

#[test]
fn twenty_quantum_syncs_reach_two_ms() {
    let mut s = sim();
    s.spawn("cpu", || {
        for _ in 0..20 {
            qk_inc(SimTime::from_us(100));
            qk_sync();
        }
    })
    .unwrap();
    assert_eq!(s.run(), SimTime::from_ms(2));
}

#[test]
fn run_until_stops_periodic_timer() {
    let mut s = sim_with(|c| c.run_until = Some(SimTime::from_ms(1)));
    let tick = s.event("tick").unwrap();
    let fired = log();
    let fired2 = fired.clone();
    s.spawn("timer", move || loop {
        notify(tick, SimTime::from_us(300));
        wait_event(tick);
        fired2.borrow_mut().push(now());
    })
    .unwrap();
    assert_eq!(s.run(), SimTime::from_ms(1));
    assert_eq!(fired.borrow().len(), 3);
}

#[test]
fn teardown_with_suspended_processes() {
    let mut s = sim_with(|c| c.run_until = Some(ns(5)));
    let held = Rc::new(());
    let h = held.clone();
    s.spawn("sleeper", move || {
        let _keep = h;
        wait_time(SimTime::from_secs(1));
    })
    .unwrap();
    s.run();
    drop(s);
    assert!(!ltsim_kernel::simulation_exists());
}

#[derive(Clone, Debug)]
enum Op {
    Wait(u64),
    Inc(u64),
    Sync,
    Notify(u32, u64),
    WaitEvent(u32),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => (0u64..50).prop_map(Op::Wait),
        3 => (1u64..80).prop_map(Op::Inc),
        2 => Just(Op::Sync),
        2 => (0u32..2, 0u64..40).prop_map(|(e, d)| Op::Notify(e, d)),
        1 => (0u32..2).prop_map(Op::WaitEvent),
    ]
}

#[derive(Debug, PartialEq, Eq, Clone)]
enum Seen {
    Step(u32, SimTime),
    Resumed { pid: u32, asked: SimTime, from: SimTime, at: SimTime },
    Synced { pid: u32, local: SimTime },
}

fn run_script(scripts: &[Vec<Op>], quantum: u64) -> (Vec<Seen>, Vec<(ProcessId, SimTime)>, SimTime) {
    let mut s = sim_with(|c| {
        c.quantum_limit = ns(quantum);
        c.run_until = Some(ns(10_000));
        c.record_activations = true;
    });
    let events = [s.event("e0").unwrap(), s.event("e1").unwrap()];
    let seen = log();
    for (i, script) in scripts.iter().enumerate() {
        let script = script.clone();
        let seen = seen.clone();
        s.spawn(&format!("p{i}"), move || {
            let pid = i as u32;
            for op in script {
                seen.borrow_mut().push(Seen::Step(pid, now()));
                match op {
                    Op::Wait(d) => {
                        let from = now();
                        wait_time(ns(d));
                        seen.borrow_mut().push(Seen::Resumed { pid, asked: ns(d), from, at: now() });
                    }
                    Op::Inc(d) => qk_inc(ns(d)),
                    Op::Sync => {
                        qk_sync();
                        seen.borrow_mut().push(Seen::Synced { pid, local: qk_local_time() });
                    }
                    Op::Notify(e, d) => notify(events[e as usize], ns(d)),
                    Op::WaitEvent(e) => wait_event(events[e as usize]),
                }
            }
        })
        .unwrap();
    }
    let end = s.run();
    let acts = activations();
    drop(s);
    let seen = seen.borrow().clone();
    (seen, acts, end)
}

proptest! {
    #[test]
    fn scheduling_is_deterministic(
        scripts in prop::collection::vec(prop::collection::vec(op(), 0..25), 1..5),
        quantum in 1u64..100,
    ) {
        let a = run_script(&scripts, quantum);
        let b = run_script(&scripts, quantum);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn time_never_goes_backwards(
        scripts in prop::collection::vec(prop::collection::vec(op(), 0..25), 1..5),
    ) {
        let (seen, acts, end) = run_script(&scripts, 50);
        let mut last = SimTime::ZERO;
        for &(_, t) in &acts {
            prop_assert!(t >= last);
            last = t;
        }
        prop_assert!(end >= last);
        let mut last = SimTime::ZERO;
        for s in &seen {
            if let Seen::Step(_, t) = s {
                prop_assert!(*t >= last);
                last = *t;
            }
        }
    }

    #[test]
    fn timed_waits_resume_exactly(
        scripts in prop::collection::vec(prop::collection::vec(op(), 0..25), 1..5),
    ) {
        let (seen, _, _) = run_script(&scripts, 50);
        for s in &seen {
            match s {
                Seen::Resumed { asked, from, at, .. } => prop_assert_eq!(*at, *from + *asked),
                Seen::Synced { local, .. } => prop_assert_eq!(*local, SimTime::ZERO),
                Seen::Step(..) => {}
            }
        }
    }

    #[test]
    fn need_sync_tracks_running_sum(
        incs in prop::collection::vec(1u64..60, 1..30),
        quantum in 1u64..200,
    ) {
        let mut s = sim_with(|c| c.quantum_limit = ns(quantum));
        let out = log();
        let out2 = out.clone();
        let incs2 = incs.clone();
        s.spawn("p", move || {
            for d in incs2 {
                qk_inc(ns(d));
                out2.borrow_mut().push((qk_local_time(), qk_need_sync()));
                if qk_need_sync() {
                    qk_sync();
                }
            }
        }).unwrap();
        s.run();
        let mut sum = 0;
        for (d, (local, need)) in incs.iter().zip(out.borrow().iter()) {
            sum += d;
            prop_assert_eq!(*local, ns(sum));
            prop_assert_eq!(*need, sum >= quantum);
            if *need {
                sum = 0;
            }
        }
    }

    #[test]
    fn delayed_notification_fires_exactly(start in 0u64..1000, delay in 1u64..1_000_000) {
        let mut s = sim();
        let ev = s.event("e").unwrap();
        let at = log();
        let at2 = at.clone();
        s.spawn("w", move || {
            wait_event(ev);
            at2.borrow_mut().push(now());
        }).unwrap();
        s.spawn("n", move || {
            wait_time(SimTime::from_ps(start));
            notify(ev, SimTime::from_ps(delay));
        }).unwrap();
        s.run();
        prop_assert_eq!(at.borrow().clone(), vec![SimTime::from_ps(start + delay)]);
    }
}
