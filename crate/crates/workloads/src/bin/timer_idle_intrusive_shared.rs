// Links libltsim_traced.so instead of libltsim.so (see build.rs).
fn main() {
    std::process::exit(ltsim_workloads::timer_idle::main());
}
