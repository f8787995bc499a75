// Grow the largest certified ball around a stable zero.

use std::f64::consts::TAU;

use basin_cert::certify::{local_basin, ConvexSet, LocalBasinOptions};
use basin_cert::system::StandardSystem;

pub fn run_example() -> basin_cert::Result<()> {
    let sys = StandardSystem::parse("vdp_amp", TAU, &["x1*sin(t)^2 - x1^3*cos(t)^2*sin(t)^2"])?;
    let cert = local_basin(&sys, &[2.0], &LocalBasinOptions::default())?;
    if let ConvexSet::Ball { radius, .. } = &cert.set {
        println!("certified radius around a = 2: {radius:.4} (alpha {:.4}, q_cert {:.4})", cert.alpha, cert.q_cert);
    }

    match local_basin(&sys, &[0.0], &LocalBasinOptions::default()) {
        Err(e) => println!("a = 0: {e}"),
        Ok(_) => println!("a = 0 unexpectedly certified"),
    }

    // A damped rotation behind a shear. The identity norm fails; the modal
    // norm certifies since the rotation rate (2) is below the decay rate (3).
    let planar = StandardSystem::parse("planar", 1.0, &["-3*x1 + 4*x2", "-x1 - 3*x2"])?;
    let cert = local_basin(&planar, &[0.0, 0.0], &LocalBasinOptions { r_max: 2.0, ..Default::default() })?;
    println!("planar: P = {}, q_cert {:.4}", serde_json::to_string(&cert.norm)?, cert.q_cert);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
