use std::env;
use std::path::PathBuf;

const WORKLOADS: [&str; 3] = ["busy", "timer_idle", "periph"];

fn main() {
    // OUT_DIR is <target>/<profile>/build/<pkg>-<hash>/out; cdylib
    // dependencies land unhashed in <target>/<profile>/deps.
    let out = PathBuf::from(env::var("OUT_DIR").expect("OUT_DIR"));
    let deps = out
        .ancestors()
        .nth(3)
        .expect("OUT_DIR layout")
        .join("deps");
    println!("cargo:rustc-link-search=native={}", deps.display());
    for workload in WORKLOADS {
        for (bin, lib) in [
            (workload.to_string(), "ltsim"),
            (format!("{workload}-intrusive-shared"), "ltsim_traced"),
        ] {
            println!("cargo:rustc-link-arg-bin={bin}=-l{lib}");
            println!("cargo:rustc-link-arg-bin={bin}=-Wl,-rpath,{}", deps.display());
        }
    }
    println!("cargo:rerun-if-changed=build.rs");
}
