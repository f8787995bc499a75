use std::path::PathBuf;
use std::process::ExitCode;

use basin_cert::cli::{self, exit, Command, JobConfig, Overrides};
use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    Average,
    FindZero,
    Bogolubov,
    Certify,
    Periodic,
    Basin,
    Pipeline,
}

/// Certify domains of attraction of periodic solutions of x' = eps g(t, x, eps).
#[derive(Debug, Parser)]
#[command(name = "basin-cert", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// Job config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Where to write the JSON report; CSV plot data goes beside it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run a single eps instead of the configured value(s).
    #[arg(long)]
    eps: Option<f64>,
    /// Evaluation point for `average`, start of the zero search otherwise.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    at: Option<Vec<f64>>,
    /// Dump trajectories of the first N basin samples as CSV.
    #[arg(long, default_value_t = 0)]
    dump_samples: usize,
    /// Evaluate grids and basin samples on one thread.
    #[arg(long)]
    serial: bool,
    /// Print per-stage wall-clock seconds to stderr.
    #[arg(long)]
    timings: bool,
}

fn command(c: Cmd) -> Command {
    match c {
        Cmd::Average => Command::Average,
        Cmd::FindZero => Command::FindZero,
        Cmd::Bogolubov => Command::Bogolubov,
        Cmd::Certify => Command::Certify,
        Cmd::Periodic => Command::Periodic,
        Cmd::Basin => Command::Basin,
        Cmd::Pipeline => Command::Pipeline,
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::INPUT as u8 } else { 0 });
        }
    };
    let code = match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("basin-cert: {e}");
            cli::exit_code_for(&e)
        }
    };
    ExitCode::from(code as u8)
}

fn run(args: &Args) -> basin_cert::Result<i32> {
    let cfg = JobConfig::load(&args.config)?;
    if let Cmd::Average = args.command {
        let g0 = cli::cmd_average(&cfg, args.at.as_deref())?;
        println!("{}", serde_json::to_string(&g0)?);
        return Ok(exit::SUCCESS);
    }
    let ov = Overrides {
        seed: args.seed,
        eps: args.eps,
        at: args.at.clone(),
        out: args.out.clone(),
        dump_samples: args.dump_samples,
        serial: args.serial,
    };
    let outcome = cli::run(command(args.command), &cfg, &ov)?;
    if args.timings {
        for (stage, secs) in &outcome.timings {
            eprintln!("{stage}: {secs:.3}s");
        }
    }
    if ov.out.is_none() && cfg.output.is_none() {
        print!("{}", cli::report_json(&outcome.report)?);
    } else {
        for f in &outcome.csv_files {
            eprintln!("wrote {}", f.display());
        }
    }
    if let Some(err) = &outcome.report.error {
        eprintln!("basin-cert: {err}");
    }
    Ok(outcome.exit_code())
}
