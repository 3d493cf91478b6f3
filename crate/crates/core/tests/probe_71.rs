#[test]
fn probe_71() {
    use dimers::variational::example_71;
    let hex = example_71::hexagon().unwrap();
    println!("hex h0: {:?}", hex.h0_at_vertices());
    let dom = example_71::cut_domain().unwrap();
    println!("cut vertices values: {:?}", dom.h0_at_vertices());
}
