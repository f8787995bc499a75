// Hyperbolicity and stability of averaged zeros: the stable amplitude
// `a = 2` passes, the trivial zero `a = 0` is repelling.

use std::f64::consts::TAU;

use basin_cert::averaging::bogolubov_check;
use basin_cert::system::StandardSystem;

pub fn run_example() -> basin_cert::Result<()> {
    let sys = StandardSystem::parse("vdp_amp", TAU, &["x1*sin(t)^2 - x1^3*cos(t)^2*sin(t)^2"])?;
    for v0 in [2.0, 0.0] {
        let report = bogolubov_check(&sys, &[v0])?;
        println!(
            "v0 = {v0}: residual {:.1e}, det {:+.6}, max Re eig {:+.6}, passes {}",
            report.residual,
            report.det,
            report.max_real_part(),
            report.passes()
        );
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
