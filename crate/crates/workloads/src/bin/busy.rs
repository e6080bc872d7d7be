fn main() {
    std::process::exit(ltsim_workloads::busy::main());
}
