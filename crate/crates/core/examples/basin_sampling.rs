// Monte Carlo check of attraction: every start in the certified interval
// converges, and so do starts well outside it.

use std::f64::consts::TAU;

use basin_cert::certify::{certify, epsilon0_estimate, AlphaGrid, CertifyOptions, ConvexSet, EpsilonOptions};
use basin_cert::dynamics::{basin_from_points, basin_sample, find_periodic, BasinOptions, PeriodicOptions};
use basin_cert::system::StandardSystem;

pub fn run_example() -> basin_cert::Result<()> {
    let sys = StandardSystem::parse("vdp_amp", TAU, &["x1*sin(t)^2 - x1^3*cos(t)^2*sin(t)^2"])?;
    let set = ConvexSet::new_box(vec![1.5], vec![2.5])?;
    let opts = CertifyOptions { alpha: AlphaGrid { min: 0.01, max: 0.08, steps: 4 }, grid_per_dim: 101, ..Default::default() };
    let mut cert = certify(&sys, &set, &opts)?;
    epsilon0_estimate(&sys, &mut cert, &EpsilonOptions::default())?;
    let orbit = find_periodic(&sys, 0.05, &cert, &PeriodicOptions::default())?;

    let basin = BasinOptions { samples: 100, ..Default::default() };
    let inside = basin_sample(&sys, &orbit, &set, &basin)?;
    println!("certified [1.5, 2.5]: {:.2} converged", inside.fraction_converged);

    let outside = basin_sample(&sys, &orbit, &ConvexSet::new_box(vec![0.3], vec![0.6])?, &basin)?;
    println!("uncertified [0.3, 0.6]: {:.2} converged", outside.fraction_converged);

    let zero = basin_from_points(&sys, &orbit, &[vec![0.0]], &basin)?;
    println!("start at a = 0: converged {}", zero.samples[0].converged);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
