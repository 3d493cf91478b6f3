fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    println!("cargo:rerun-if-changed=src/lib.rs");

    let mut config = cbindgen::Config::default();
    config.language = cbindgen::Language::C;
    config.cpp_compat = true;
    config.usize_is_size_t = true;
    config.documentation = true;

    match cbindgen::Builder::new()
        .with_config(config)
        .with_crate(&crate_dir)
        .with_include_guard("DIMERS_H")
        .generate()
    {
        Ok(bindings) => {
            bindings.write_to_file(format!("{crate_dir}/include/dimers.h"));
        }
        Err(cbindgen::Error::ParseSyntaxError { .. }) => {}
        Err(e) => panic!("cbindgen: {e:?}"),
    }
}
