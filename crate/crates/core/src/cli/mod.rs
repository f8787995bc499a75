//! Job configs, the staged pipeline behind the `basin-cert` binary, and its
//! JSON/CSV outputs.

mod config;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::averaging::{average, bogolubov_check, find_zero, BogolubovReport};
use crate::certify::{certify_nonsmooth, epsilon0_estimate, Certificate, CertifyOptions, EpsilonOptions, Status};
use crate::dynamics::{basin_sample, find_periodic, trajectory, BasinOptions, BasinReport, PeriodicOptions, PeriodicOrbitReport};
use crate::error::{Error, Result};
use crate::odeint::IntegratorConfig;
use crate::system::StandardSystem;

pub use config::{Epsilon, Form, JobConfig, NormConfig, Period, SystemConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit codes of the binary.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const NOT_CERTIFIED: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Average,
    FindZero,
    Bogolubov,
    Certify,
    Periodic,
    Basin,
    Pipeline,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Stage {
    Zero,
    Bogolubov,
    Certify,
    Periodic,
    Basin,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Average => "average",
            Command::FindZero => "find-zero",
            Command::Bogolubov => "bogolubov",
            Command::Certify => "certify",
            Command::Periodic => "periodic",
            Command::Basin => "basin",
            Command::Pipeline => "pipeline",
        }
    }

    fn stages(self) -> &'static [Stage] {
        use Stage::*;
        match self {
            Command::Average => &[],
            Command::FindZero => &[Zero],
            Command::Bogolubov => &[Zero, Bogolubov],
            Command::Certify => &[Certify],
            Command::Periodic => &[Certify, Periodic],
            Command::Basin => &[Certify, Periodic, Basin],
            Command::Pipeline => &[Zero, Bogolubov, Certify, Periodic, Basin],
        }
    }
}

/// Command-line overrides applied on top of the config.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub eps: Option<f64>,
    pub at: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    /// Also dump the trajectories of the first this-many basin samples.
    pub dump_samples: usize,
    /// Force serial grid and basin evaluation regardless of the config.
    pub serial: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stages {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bogolubov: Option<BogolubovReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub periodic: Vec<PeriodicOrbitReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub basin: Vec<BasinReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: JobConfig,
    pub stages: Stages,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// A finished run: the report, plot files written, and per-stage seconds
/// (kept out of the report so that reports are reproducible).
#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub csv_files: Vec<PathBuf>,
    pub timings: Vec<(&'static str, f64)>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code
    }
}

pub fn exit_code_for(err: &Error) -> i32 {
    if err.is_input_error() {
        exit::INPUT
    } else {
        exit::NUMERICAL
    }
}

/// `g0(at)`, with `at` defaulting to the center of the set.
pub fn cmd_average(cfg: &JobConfig, at: Option<&[f64]>) -> Result<Vec<f64>> {
    let sys = cfg.build_system()?;
    let point = at.map(<[f64]>::to_vec).unwrap_or_else(|| cfg.set.center());
    if point.len() != sys.dim() {
        return Err(Error::InvalidInput(format!("--at has {} entries, expected {}", point.len(), sys.dim())));
    }
    average(&sys, &point)
}

pub fn cmd_find_zero(cfg: &JobConfig, ov: &Overrides) -> Result<RunOutcome> {
    run(Command::FindZero, cfg, ov)
}

pub fn cmd_bogolubov(cfg: &JobConfig, ov: &Overrides) -> Result<RunOutcome> {
    run(Command::Bogolubov, cfg, ov)
}

pub fn cmd_certify(cfg: &JobConfig, ov: &Overrides) -> Result<RunOutcome> {
    run(Command::Certify, cfg, ov)
}

pub fn cmd_periodic(cfg: &JobConfig, ov: &Overrides) -> Result<RunOutcome> {
    run(Command::Periodic, cfg, ov)
}

pub fn cmd_basin(cfg: &JobConfig, ov: &Overrides) -> Result<RunOutcome> {
    run(Command::Basin, cfg, ov)
}

pub fn cmd_pipeline(cfg: &JobConfig, ov: &Overrides) -> Result<RunOutcome> {
    run(Command::Pipeline, cfg, ov)
}

struct Runner<'a> {
    cfg: &'a JobConfig,
    sys: StandardSystem,
    stages: Stages,
    timings: Vec<(&'static str, f64)>,
}

impl Runner<'_> {
    fn timed<T>(&mut self, name: &'static str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f(self);
        self.timings.push((name, start.elapsed().as_secs_f64()));
        out
    }

    /// Runs `stages` in order; returns the exit code for a run that did not
    /// fail numerically.
    fn execute(&mut self, stages: &[Stage], ov: &Overrides) -> Result<i32> {
        let cfg = self.cfg;
        let eps_values = match ov.eps {
            Some(e) => vec![e],
            None => cfg.epsilon.values(),
        };
        let seed = cfg.seed;
        for stage in stages {
            match stage {
                Stage::Zero => {
                    let start = ov.at.clone().or_else(|| cfg.start.clone()).unwrap_or_else(|| cfg.set.center());
                    let zero = self.timed("zero", |r| find_zero(&r.sys, &start))?;
                    self.stages.zero = Some(zero);
                }
                Stage::Bogolubov => {
                    let v0 = self.stages.zero.clone().expect("zero stage runs first");
                    let report = self.timed("bogolubov", |r| bogolubov_check(&r.sys, &v0))?;
                    let passes = report.passes();
                    self.stages.bogolubov = Some(report);
                    if !passes {
                        return Ok(exit::NOT_CERTIFIED);
                    }
                }
                Stage::Certify => {
                    let opts = CertifyOptions {
                        alpha: cfg.alpha.unwrap_or_default(),
                        norms: cfg.norm()?.into_iter().collect(),
                        grid_per_dim: cfg.grid_per_dim,
                        parallel: cfg.parallel && !ov.serial,
                        seed,
                    };
                    let cert = self.timed("certify", |r| {
                        let mut cert = certify_nonsmooth(&r.sys, &cfg.set, &opts)?;
                        if cert.is_certified() {
                            epsilon0_estimate(&r.sys, &mut cert, &EpsilonOptions::default())?;
                        }
                        Ok(cert)
                    })?;
                    let certified = cert.status == Status::Certified;
                    self.stages.certificate = Some(cert);
                    if !certified {
                        return Ok(exit::NOT_CERTIFIED);
                    }
                }
                Stage::Periodic => {
                    let cert = self.stages.certificate.clone().expect("certify stage runs first");
                    let opts = PeriodicOptions { v0: self.stages.zero.clone(), ..Default::default() };
                    let reports = self.timed("periodic", |r| {
                        eps_values.iter().map(|&e| find_periodic(&r.sys, e, &cert, &opts)).collect::<Result<Vec<_>>>()
                    })?;
                    self.stages.periodic = reports;
                }
                Stage::Basin => {
                    let opts = BasinOptions {
                        samples: cfg.samples,
                        horizon: cfg.horizon,
                        seed,
                        parallel: cfg.parallel && !ov.serial,
                        integrator: IntegratorConfig::default(),
                    };
                    let orbits = self.stages.periodic.clone();
                    let reports = self.timed("basin", |r| {
                        orbits.iter().map(|o| basin_sample(&r.sys, o, &cfg.set, &opts)).collect::<Result<Vec<_>>>()
                    })?;
                    self.stages.basin = reports;
                }
            }
        }
        Ok(exit::SUCCESS)
    }
}

/// Runs the stages of `command`. Numerical failures end the run early and
/// are recorded in the report; configuration problems are returned as
/// errors.
pub fn run(command: Command, cfg: &JobConfig, ov: &Overrides) -> Result<RunOutcome> {
    let mut cfg = cfg.clone();
    if let Some(seed) = ov.seed {
        cfg.seed = seed;
    }
    if let Some(eps) = ov.eps {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidInput(format!("--eps must be positive, got {eps}")));
        }
        cfg.epsilon = Epsilon::Single(eps);
    }
    if let Some(at) = &ov.at {
        if at.len() != cfg.system.n {
            return Err(Error::InvalidInput(format!("--at has {} entries, expected {}", at.len(), cfg.system.n)));
        }
    }
    cfg.validate()?;
    let sys = cfg.build_system()?;
    let mut runner = Runner { cfg: &cfg, sys, stages: Stages::default(), timings: Vec::new() };
    let (exit_code, error) = match runner.execute(command.stages(), ov) {
        Ok(code) => (code, None),
        Err(e) if e.is_input_error() => return Err(e),
        Err(e) => (exit::NUMERICAL, Some(e.to_string())),
    };
    let Runner { stages, timings, sys, .. } = runner;
    let report = RunReport {
        tool: "basin-cert".into(),
        version: VERSION.into(),
        command: command.name().into(),
        config: cfg.clone(),
        stages,
        exit_code,
        error,
    };
    let out = ov.out.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from));
    let mut csv_files = Vec::new();
    if let Some(path) = &out {
        write_report(&report, path)?;
        csv_files = write_plots(&sys, &report, path, ov.dump_samples)?;
    }
    Ok(RunOutcome { report, csv_files, timings })
}

/// Pretty JSON with a trailing newline.
pub fn report_json(report: &RunReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

fn write_report(report: &RunReport, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, report_json(report)?)?;
    Ok(())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

/// One period of each periodic orbit, plus optional basin sample
/// trajectories, as CSV files next to the report.
fn write_plots(sys: &StandardSystem, report: &RunReport, path: &Path, dump_samples: usize) -> Result<Vec<PathBuf>> {
    let cfg = IntegratorConfig::default();
    let mut files = Vec::new();
    for (i, orbit) in report.stages.periodic.iter().enumerate() {
        let file = sibling(path, &format!("orbit{i}"));
        trajectory(sys, &orbit.v_eps, orbit.eps, 1, &cfg)?.write_csv(&file)?;
        files.push(file);
    }
    for (i, basin) in report.stages.basin.iter().enumerate() {
        for (k, s) in basin.samples.iter().take(dump_samples).enumerate() {
            let file = sibling(path, &format!("basin{i}_sample{k}"));
            trajectory(sys, &s.v_start, basin.eps, basin.horizon, &cfg)?.write_csv(&file)?;
            files.push(file);
        }
    }
    Ok(files)
}
