// Systems given as `u' = A u + eps h(t, u, eps)`: the periodicity gate,
// the rotational symmetry of the unforced van der Pol oscillator, and a
// forced damped oscillator that certifies.

use basin_cert::averaging::{find_zero, to_standard_form, OriginalSystem};
use basin_cert::certify::{certify, CertifyOptions, ConvexSet};
use basin_cert::numkit::DMatrix;

pub fn run_example() -> basin_cert::Result<()> {
    let rot = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let tau = std::f64::consts::TAU;

    let growth = OriginalSystem::parse("growth", DMatrix::identity(2, 2), &["0", "0"], 1.0)?;
    println!("A = I, T = 1: {}", to_standard_form(&growth).unwrap_err());

    let vdp = OriginalSystem::parse("vdp", rot.clone(), &["0", "(1 - u1^2)*u2"], tau)?;
    let sys = to_standard_form(&vdp)?;
    match find_zero(&sys, &[2.0, 0.0]) {
        Err(e) => println!("van der Pol: {e}"),
        Ok(z) => println!("van der Pol: unexpected isolated zero {z:?}"),
    }

    let forced = OriginalSystem::parse("forced", rot, &["0", "-2*u2 + cos(t)"], tau)?;
    let sys = to_standard_form(&forced)?;
    let zero = find_zero(&sys, &[0.3, 0.3])?;
    println!("forced: zero {zero:.6?}");
    let ball = ConvexSet::new_ball(zero, 0.5, None)?;
    let cert = certify(&sys, &ball, &CertifyOptions { grid_per_dim: 9, ..Default::default() })?;
    println!("forced: {:?}, q_cert {:.4}", cert.status, cert.q_cert);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
