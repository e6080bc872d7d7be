fn main() {
    std::process::exit(ltsim_workloads::periph::main());
}
