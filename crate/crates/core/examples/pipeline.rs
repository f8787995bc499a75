// Run the full pipeline on a bundled config, as `basin-cert pipeline` does.

use basin_cert::cli::{cmd_pipeline, JobConfig, Overrides};

pub fn run_example() -> basin_cert::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/vdp_amp.json");
    let mut cfg = JobConfig::load(path)?;
    cfg.samples = 40;
    let outcome = cmd_pipeline(&cfg, &Overrides::default())?;
    let s = &outcome.report.stages;
    println!("exit code {}", outcome.exit_code());
    println!("zero {:?}", s.zero);
    if let Some(cert) = &s.certificate {
        println!("certificate {:?}, q_cert {:.4}, eps0 {}", cert.status, cert.q_cert, cert.eps0);
    }
    for (orbit, basin) in s.periodic.iter().zip(&s.basin) {
        println!("eps {}: v_eps {:.6}, basin {:.2}", orbit.eps, orbit.v_eps[0], basin.fraction_converged);
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
