// The averaged amplitude equation of the van der Pol oscillator,
// `g0(a) = pi a (1 - a^2 / 4)`, and its stable zero `a = 2`.

use std::f64::consts::{PI, TAU};

use basin_cert::averaging::{average, average_jacobian, find_zero};
use basin_cert::system::StandardSystem;

pub fn run_example() -> basin_cert::Result<()> {
    let sys = StandardSystem::parse("vdp_amp", TAU, &["x1*sin(t)^2 - x1^3*cos(t)^2*sin(t)^2"])?;

    for a in [0.5, 1.0, 1.5, 2.0, 2.5] {
        let g0 = average(&sys, &[a])?[0];
        let exact = PI * a * (1.0 - a * a / 4.0);
        println!("g0({a:.1}) = {g0:+.12}   closed form {exact:+.12}");
    }

    let zero = find_zero(&sys, &[1.5])?;
    let j = average_jacobian(&sys, &zero)?;
    println!("zero from 1.5: {:.12}", zero[0]);
    println!("J at zero:     {:.8} (-2 pi = {:.8})", j[(0, 0)], -2.0 * PI);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
