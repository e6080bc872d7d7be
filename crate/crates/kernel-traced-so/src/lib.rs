//! `libltsim_traced.so`: the kernel with the recorder compiled in. Tracing is
//! configured from `NISTT_DB_PATH` / `NISTT_TRACE` when the simulation is
//! created.

ltsim_kernel::export_abi!(traced);
