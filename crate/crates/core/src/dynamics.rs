//! Stroboscopic (time-`T`) map computations: the periodic point `v_eps`,
//! measured contraction, and basin sampling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::averaging::{find_zero, ComplexValue};
use crate::certify::{Certificate, ConvexSet, Status};
use crate::error::{Error, Result};
use crate::numkit::{eig_small, fd_jacobian, newton, vec_inf_norm, DMatrix, WeightedNorm};
use crate::odeint::{flow_map, integrate, IntegratorConfig, Trajectory};
use crate::system::StandardSystem;

/// Fixed-point tolerance, relative to `1 + |v|`.
pub const PERIODIC_TOL: f64 = 1e-9;
/// Distance to `v_eps` at which a basin sample counts as converged.
pub const BASIN_TOL: f64 = 1e-4;
/// Iteration cap when the certificate gives no usable contraction rate.
const FALLBACK_CAP: usize = 10_000;

/// `v -> x(T, v, eps)`.
pub fn poincare_map(sys: &StandardSystem, v: &[f64], eps: f64, cfg: &IntegratorConfig) -> Result<Vec<f64>> {
    flow_map(sys, v, eps, cfg)
}

/// Tight tolerances for fixed points and their multipliers.
pub fn precise_integrator() -> IntegratorConfig {
    IntegratorConfig::with_tolerances(1e-12, 1e-14)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbitReport {
    pub eps: f64,
    pub v_eps: Vec<f64>,
    /// `|P(v_eps) - v_eps|` in the certificate norm.
    pub residual: f64,
    pub floquet: Vec<ComplexValue>,
    pub iterations: usize,
    pub newton_fallback: bool,
    /// Induced certificate norm of the map's Jacobian at `v_eps`.
    pub empirical_kappa: f64,
    pub theoretical_kappa: f64,
    /// `1 - eps (1 - q) alpha / 2`, the factor as printed in the original
    /// argument; kept for comparison.
    pub printed_kappa: f64,
    /// Distance to the averaged zero, when one was supplied or found.
    pub distance_to_v0: Option<f64>,
    /// `eps <= eps0`: the certificate's perturbation estimate covers this
    /// run. Otherwise the results are measurements without that backing.
    pub within_eps0: bool,
}

impl PeriodicOrbitReport {
    pub fn is_stable(&self) -> bool {
        self.floquet.iter().all(|z| z.modulus() < 1.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicOptions {
    /// Starting point; the center of the certified set by default.
    pub start: Option<Vec<f64>>,
    /// Averaged zero to report the distance to; searched from the center of
    /// the set when absent.
    pub v0: Option<Vec<f64>>,
    pub integrator: IntegratorConfig,
    /// Skip the status and `eps <= alpha` checks.
    pub force: bool,
}

impl Default for PeriodicOptions {
    fn default() -> Self {
        Self { start: None, v0: None, integrator: precise_integrator(), force: false }
    }
}

fn check_certificate(cert: &Certificate, eps: f64) -> Result<()> {
    if cert.status != Status::Certified {
        return Err(Error::PreconditionRejected(format!("certificate status is {:?}", cert.status)));
    }
    if !(eps > 0.0 && eps <= cert.alpha) {
        return Err(Error::PreconditionRejected(format!("eps = {eps} is outside (0, alpha = {}]", cert.alpha)));
    }
    Ok(())
}

fn iteration_cap(kappa: f64) -> usize {
    if kappa > 0.0 && kappa < 1.0 {
        let cap = (10.0 * PERIODIC_TOL.ln() / kappa.ln()).ceil();
        if cap.is_finite() && cap < FALLBACK_CAP as f64 {
            return (cap as usize).max(10);
        }
    }
    FALLBACK_CAP
}

/// Finds the fixed point of the time-`T` map inside the certified set by
/// direct iteration, falling back to Newton if the iteration cap is hit.
pub fn find_periodic(
    sys: &StandardSystem,
    eps: f64,
    cert: &Certificate,
    opts: &PeriodicOptions,
) -> Result<PeriodicOrbitReport> {
    if !opts.force {
        check_certificate(cert, eps)?;
    }
    let cfg = &opts.integrator;
    let w = &cert.norm;
    let tol = |v: &[f64]| PERIODIC_TOL * (1.0 + w.norm(v));
    let theoretical_kappa = cert.theoretical_kappa(eps);
    let cap = iteration_cap(theoretical_kappa);

    let mut v = opts.start.clone().unwrap_or_else(|| cert.set.center());
    let mut found = None;
    for k in 0..cap {
        let p = poincare_map(sys, &v, eps, cfg)?;
        let residual = w.distance(&p, &v);
        if residual <= tol(&v) {
            found = Some((v.clone(), residual, k + 1));
            break;
        }
        if !cert.set.contains(&p, 1e-9) {
            return Err(Error::IterateLeftSet { iteration: k + 1, point: p });
        }
        v = p;
    }

    let newton_fallback = found.is_none();
    let (v_eps, residual, iterations) = match found {
        Some(f) => f,
        None => {
            let map = |x: &[f64]| -> Result<Vec<f64>> {
                let p = poincare_map(sys, x, eps, cfg)?;
                Ok(p.iter().zip(x).map(|(a, b)| a - b).collect())
            };
            let out = newton(map, &v, tol(&v), 50)?;
            let p = poincare_map(sys, &out.point, eps, cfg)?;
            let residual = w.distance(&p, &out.point);
            if residual > tol(&out.point) {
                return Err(Error::NoConvergence { iterations: cap + out.iterations, residual });
            }
            (out.point, residual, cap + out.iterations)
        }
    };

    let jac = map_jacobian(sys, &v_eps, eps, cfg)?;
    let floquet = eig_small(&jac)?.into_iter().map(ComplexValue::from).collect();
    let empirical_kappa = w.induced(&jac);
    let v0 = match &opts.v0 {
        Some(v0) => Some(v0.clone()),
        None => find_zero(sys, &cert.set.center()).ok(),
    };
    let distance_to_v0 = v0.map(|z| w.distance(&v_eps, &z));
    Ok(PeriodicOrbitReport {
        eps,
        v_eps,
        residual,
        floquet,
        iterations,
        newton_fallback,
        empirical_kappa,
        theoretical_kappa,
        printed_kappa: cert.printed_kappa(eps),
        distance_to_v0,
        within_eps0: eps <= cert.eps0,
    })
}

/// Finite-difference Jacobian (monodromy matrix) of the time-`T` map.
pub fn map_jacobian(sys: &StandardSystem, v: &[f64], eps: f64, cfg: &IntegratorConfig) -> Result<DMatrix<f64>> {
    fd_jacobian(|x| poincare_map(sys, x, eps, cfg), v)
}

/// Largest `|P(v1) - P(v2)| / |v1 - v2|` over seeded pairs in the certified
/// set, in the certificate norm.
pub fn contraction_measure(
    sys: &StandardSystem,
    eps: f64,
    cert: &Certificate,
    pair_count: usize,
    seed: u64,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    if eps != 0.0 {
        check_certificate(cert, eps)?;
    }
    let pairs = cert.set.sample_pairs(pair_count, seed);
    let ratios = pairs
        .par_iter()
        .map(|(a, b)| pair_ratio(sys, eps, &cert.norm, a, b, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(ratios.into_iter().flatten().fold(0.0, f64::max))
}

fn pair_ratio(
    sys: &StandardSystem,
    eps: f64,
    w: &WeightedNorm,
    a: &[f64],
    b: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Option<f64>> {
    let dist = w.distance(a, b);
    if dist == 0.0 {
        return Ok(None);
    }
    let pa = poincare_map(sys, a, eps, cfg)?;
    let pb = poincare_map(sys, b, eps, cfg)?;
    Ok(Some(w.distance(&pa, &pb) / dist))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasinSample {
    pub v_start: Vec<f64>,
    pub converged: bool,
    pub periods_to_converge: Option<usize>,
    /// Max-norm distance to `v_eps` after the last period computed.
    pub final_distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasinReport {
    pub eps: f64,
    pub region: Option<ConvexSet>,
    pub seed: u64,
    pub horizon: usize,
    pub v_eps: Vec<f64>,
    pub fraction_converged: f64,
    pub samples: Vec<BasinSample>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasinOptions {
    pub samples: usize,
    /// Number of periods integrated per sample.
    pub horizon: usize,
    pub seed: u64,
    pub parallel: bool,
    pub integrator: IntegratorConfig,
}

impl Default for BasinOptions {
    fn default() -> Self {
        Self { samples: 200, horizon: 50, seed: 0, parallel: true, integrator: IntegratorConfig::default() }
    }
}

fn run_sample(sys: &StandardSystem, eps: f64, target: &[f64], start: &[f64], opts: &BasinOptions) -> BasinSample {
    let dist = |v: &[f64]| vec_inf_norm(&v.iter().zip(target).map(|(a, b)| a - b).collect::<Vec<_>>());
    let mut v = start.to_vec();
    let mut d = dist(&v);
    let mut sample = BasinSample {
        v_start: start.to_vec(),
        converged: false,
        periods_to_converge: None,
        final_distance: Some(d),
        error: None,
    };
    let mut k = 0;
    loop {
        if d < BASIN_TOL {
            sample.converged = true;
            sample.periods_to_converge = Some(k);
            break;
        }
        if k == opts.horizon {
            break;
        }
        match poincare_map(sys, &v, eps, &opts.integrator) {
            Ok(p) => v = p,
            Err(e) => {
                sample.error = Some(e.to_string());
                break;
            }
        }
        k += 1;
        d = dist(&v);
        sample.final_distance = d.is_finite().then_some(d);
    }
    sample
}

/// Integrates each start for up to `horizon` periods and records whether it
/// comes within [`BASIN_TOL`] of the periodic point, checked once per period.
pub fn basin_from_points(
    sys: &StandardSystem,
    orbit: &PeriodicOrbitReport,
    points: &[Vec<f64>],
    opts: &BasinOptions,
) -> Result<BasinReport> {
    if let Some(p) = points.iter().find(|p| p.len() != sys.dim()) {
        return Err(Error::DimensionMismatch { expected: sys.dim(), found: p.len() });
    }
    let eps = orbit.eps;
    let samples: Vec<BasinSample> = if opts.parallel {
        points.par_iter().map(|p| run_sample(sys, eps, &orbit.v_eps, p, opts)).collect()
    } else {
        points.iter().map(|p| run_sample(sys, eps, &orbit.v_eps, p, opts)).collect()
    };
    let converged = samples.iter().filter(|s| s.converged).count();
    let fraction_converged = if samples.is_empty() { 0.0 } else { converged as f64 / samples.len() as f64 };
    Ok(BasinReport {
        eps,
        region: None,
        seed: opts.seed,
        horizon: opts.horizon,
        v_eps: orbit.v_eps.clone(),
        fraction_converged,
        samples,
    })
}

/// [`basin_from_points`] on seeded uniform samples of `region`.
pub fn basin_sample(
    sys: &StandardSystem,
    orbit: &PeriodicOrbitReport,
    region: &ConvexSet,
    opts: &BasinOptions,
) -> Result<BasinReport> {
    region.validate()?;
    let points = region.samples(opts.samples, opts.seed);
    let mut report = basin_from_points(sys, orbit, &points, opts)?;
    report.region = Some(region.clone());
    Ok(report)
}

/// The trajectory from `v` over `periods` periods, for plotting.
pub fn trajectory(sys: &StandardSystem, v: &[f64], eps: f64, periods: usize, cfg: &IntegratorConfig) -> Result<Trajectory> {
    integrate(sys, v, eps, 0.0, sys.period() * periods.max(1) as f64, cfg)
}
