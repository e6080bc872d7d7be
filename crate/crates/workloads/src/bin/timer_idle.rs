fn main() {
    std::process::exit(ltsim_workloads::timer_idle::main());
}
