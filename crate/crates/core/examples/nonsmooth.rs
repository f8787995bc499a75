// A van der Pol variant with `|cos t|` damping: switching in time only,
// so the average stays smooth and certifies like a smooth field. A state
// kink, by contrast, needs one-sided Jacobians.

use std::f64::consts::{FRAC_PI_4, TAU};

use basin_cert::averaging::find_zero;
use basin_cert::certify::{certify, certify_nonsmooth, weak_diff_report, CertifyOptions, ConvexSet};
use basin_cert::system::StandardSystem;

pub fn run_example() -> basin_cert::Result<()> {
    let sys = StandardSystem::parse("nonsmooth_vdp", TAU, &["x1*sin(t)^2*(1 - x1*abs(cos(t)))"])?;
    let zero = find_zero(&sys, &[2.3])?;
    println!("zero {:.9} (3 pi / 4 = {:.9})", zero[0], 3.0 * FRAC_PI_4);

    let v = ConvexSet::new_box(vec![2.0], vec![2.7])?;
    let report = weak_diff_report(&sys, &v, 0.01, 5, 0)?;
    let s = &report.samples[0];
    println!("N(v) = {}, excluded {:?}, gamma {:.3}", s.intervals_count, s.intervals, report.gamma);

    let cert = certify_nonsmooth(&sys, &v, &CertifyOptions::default())?;
    println!("[2.0, 2.7]: {:?}, q_cert {:.4}", cert.status, cert.q_cert);

    let kink = StandardSystem::parse("kink", 1.0, &["-x1 + 2*abs(x1 - 2) - 2*abs(x1 - 2.05)"])?;
    let box_ = ConvexSet::new_box(vec![1.06], vec![3.06])?;
    let opts = CertifyOptions { grid_per_dim: 11, ..Default::default() };
    println!("kink, plain grid:    {:?}", certify(&kink, &box_, &opts)?.status);
    let ns = certify_nonsmooth(&kink, &box_, &opts)?;
    println!("kink, one-sided:     {:?} at {:?}", ns.status, ns.falsifying_point);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
