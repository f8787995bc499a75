#[allow(dead_code)]
mod expression_dsl {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/expression_dsl.rs"));
}

#[test]
fn expression_dsl_runs() {
    expression_dsl::run_example().expect("expression_dsl example should run");
}

#[allow(dead_code)]
mod average_vdp {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/average_vdp.rs"));
}

#[test]
fn average_vdp_runs() {
    average_vdp::run_example().expect("average_vdp example should run");
}

#[allow(dead_code)]
mod bogolubov_check {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/bogolubov_check.rs"));
}

#[test]
fn bogolubov_check_runs() {
    bogolubov_check::run_example().expect("bogolubov_check example should run");
}

#[allow(dead_code)]
mod certify_box {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/certify_box.rs"));
}

#[test]
fn certify_box_runs() {
    certify_box::run_example().expect("certify_box example should run");
}

#[allow(dead_code)]
mod local_basin {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/local_basin.rs"));
}

#[test]
fn local_basin_runs() {
    local_basin::run_example().expect("local_basin example should run");
}

#[allow(dead_code)]
mod nonsmooth {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/nonsmooth.rs"));
}

#[test]
fn nonsmooth_runs() {
    nonsmooth::run_example().expect("nonsmooth example should run");
}

#[allow(dead_code)]
mod periodic_orbit {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/periodic_orbit.rs"));
}

#[test]
fn periodic_orbit_runs() {
    periodic_orbit::run_example().expect("periodic_orbit example should run");
}

#[allow(dead_code)]
mod basin_sampling {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/basin_sampling.rs"));
}

#[test]
fn basin_sampling_runs() {
    basin_sampling::run_example().expect("basin_sampling example should run");
}

#[allow(dead_code)]
mod original_form {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/original_form.rs"));
}

#[test]
fn original_form_runs() {
    original_form::run_example().expect("original_form example should run");
}

#[allow(dead_code)]
mod pipeline {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/pipeline.rs"));
}

#[test]
fn pipeline_runs() {
    pipeline::run_example().expect("pipeline example should run");
}
