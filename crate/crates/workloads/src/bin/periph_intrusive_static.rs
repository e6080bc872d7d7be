ltsim_kernel::export_abi!(traced);

fn main() {
    std::process::exit(ltsim_workloads::periph::main());
}
