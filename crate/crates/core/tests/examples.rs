mod hertz_contact {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/hertz_contact.rs"));
}
mod sphere_projection {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/sphere_projection.rs"));
}
mod render_pair {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/render_pair.rs"));
}
mod optical_flow {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/optical_flow.rs"));
}
mod force_labels {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/force_labels.rs"));
}
mod fisheye_remap {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/fisheye_remap.rs"));
}
mod simulate_dataset {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/simulate_dataset.rs"));
}

#[test]
fn hertz_contact_runs() {
    hertz_contact::run_example().unwrap();
}

#[test]
fn sphere_projection_runs() {
    sphere_projection::run_example().unwrap();
}

#[test]
fn render_pair_moves_pixels() {
    let pair = render_pair::run_example().unwrap();
    assert_ne!(pair.at_rest, pair.deformed);
}

#[test]
fn optical_flow_recovers_the_drift() {
    let [u, v] = optical_flow::run_example().unwrap();
    assert!((u - 2.5).abs() < 0.3 && (v + 1.0).abs() < 0.3);
}

#[test]
fn force_labels_runs() {
    force_labels::run_example().unwrap();
}

#[test]
fn fisheye_remap_is_close() {
    assert!(fisheye_remap::run_example().unwrap() <= 5.0);
}

#[test]
fn simulate_dataset_runs() {
    assert_eq!(simulate_dataset::run_example().unwrap(), 20);
}
