// The periodic point of the full system, its Floquet multiplier and the
// measured contraction of the period map against the certified bound.

use std::f64::consts::TAU;

use basin_cert::certify::{certify, epsilon0_estimate, AlphaGrid, CertifyOptions, ConvexSet, EpsilonOptions};
use basin_cert::dynamics::{contraction_measure, find_periodic, trajectory, PeriodicOptions};
use basin_cert::odeint::IntegratorConfig;
use basin_cert::system::StandardSystem;

pub fn run_example() -> basin_cert::Result<()> {
    let sys = StandardSystem::parse("vdp_amp", TAU, &["x1*sin(t)^2 - x1^3*cos(t)^2*sin(t)^2"])?;
    let set = ConvexSet::new_box(vec![1.5], vec![2.5])?;
    let opts = CertifyOptions { alpha: AlphaGrid { min: 0.01, max: 0.08, steps: 4 }, grid_per_dim: 101, ..Default::default() };
    let mut cert = certify(&sys, &set, &opts)?;
    epsilon0_estimate(&sys, &mut cert, &EpsilonOptions::default())?;

    for eps in [0.04, 0.02, 0.01] {
        let orbit = find_periodic(&sys, eps, &cert, &PeriodicOptions::default())?;
        let measured = contraction_measure(&sys, eps, &cert, 50, 0, &IntegratorConfig::default())?;
        println!(
            "eps {eps}: v_eps {:.9}, multiplier {:.6}, measured {:.4} <= bound {:.4}",
            orbit.v_eps[0],
            orbit.floquet[0].re,
            measured,
            orbit.theoretical_kappa
        );
    }

    let orbit = find_periodic(&sys, 0.05, &cert, &PeriodicOptions::default())?;
    let traj = trajectory(&sys, &orbit.v_eps, 0.05, 1, &IntegratorConfig::default())?;
    let path = std::env::temp_dir().join("basin_cert_orbit.csv");
    traj.write_csv(&path)?;
    println!("one period ({} samples) written to {}", traj.times.len(), path.display());
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
