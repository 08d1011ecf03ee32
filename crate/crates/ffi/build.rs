use std::path::Path;

fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").expect("CARGO_MANIFEST_DIR is set");
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    let header = Path::new(&crate_dir).join("include/sparse_vqe.h");
    cbindgen::generate(&crate_dir)
        .expect("header generation from src/lib.rs")
        .write_to_file(header);
}
