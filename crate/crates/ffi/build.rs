use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").unwrap());

    let mut config = cbindgen::Config::default();
    config.language = cbindgen::Language::C;
    config.include_guard = Some("SSPF_H".into());
    config.cpp_compat = true;
    config.documentation = true;
    config.header = Some("/* C ABI for the sspf library. Generated; do not edit. */".into());
    config.enumeration.prefix_with_name = true;

    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("failed to generate the C header")
        .write_to_file(crate_dir.join("include/sspf.h"));

    println!("cargo:rerun-if-changed=src/lib.rs");
}
