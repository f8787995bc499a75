// Contraction certificates on intervals around the stable van der Pol
// amplitude, and the admissible perturbation size.

use std::f64::consts::TAU;

use basin_cert::certify::{certify, contraction_factor, epsilon0_estimate, AlphaGrid, CertifyOptions, ConvexSet, EpsilonOptions};
use basin_cert::numkit::WeightedNorm;
use basin_cert::system::StandardSystem;

pub fn run_example() -> basin_cert::Result<()> {
    let sys = StandardSystem::parse("vdp_amp", TAU, &["x1*sin(t)^2 - x1^3*cos(t)^2*sin(t)^2"])?;
    let good = ConvexSet::new_box(vec![1.5], vec![2.5])?;

    let f = contraction_factor(&sys, &good, 0.08, &WeightedNorm::identity(1), 101)?;
    println!("alpha 0.08: q_grid {:.4} + margin {:.4} = {:.4} (worst at a = {})", f.q_grid, f.margin, f.q_cert, f.argmax[0]);

    let opts = CertifyOptions { alpha: AlphaGrid { min: 0.01, max: 0.08, steps: 4 }, grid_per_dim: 101, ..Default::default() };
    let mut cert = certify(&sys, &good, &opts)?;
    let eps0 = epsilon0_estimate(&sys, &mut cert, &EpsilonOptions::default())?;
    println!("[1.5, 2.5]: {:?}, alpha {}, q_cert {:.4}, eps0 {eps0}", cert.status, cert.alpha, cert.q_cert);

    let wide = ConvexSet::new_box(vec![0.5], vec![2.5])?;
    let bad = certify(&sys, &wide, &opts)?;
    println!("[0.5, 2.5]: {:?} at {:?}", bad.status, bad.falsifying_point);

    println!("{}", serde_json::to_string_pretty(&cert)?);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
