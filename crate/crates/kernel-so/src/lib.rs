//! `libltsim.so`: the kernel without built-in tracing.

ltsim_kernel::export_abi!();
