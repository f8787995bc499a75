use crate::averaging::{average, g_eps};
use crate::error::{Error, Result};
use crate::odeint::IntegratorConfig;
use crate::system::StandardSystem;

use super::{Certificate, ConvexSet, Status};

/// Number of halvings of alpha in the eps0 search.
const EPS_HALVINGS: i32 = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonOptions {
    pub pair_samples: usize,
    pub integrator: IntegratorConfig,
}

impl Default for EpsilonOptions {
    fn default() -> Self {
        // Difference quotients divide integration error by eps and by the
        // pair distance, so the flow is computed more tightly than usual.
        Self { pair_samples: 64, integrator: IntegratorConfig::with_tolerances(1e-12, 1e-14) }
    }
}

struct PairTable {
    pairs: Vec<(Vec<f64>, Vec<f64>)>,
    g0: Vec<(Vec<f64>, Vec<f64>)>,
}

impl PairTable {
    fn new(sys: &StandardSystem, cert: &Certificate, count: usize) -> Result<Self> {
        let pairs = cert.set.sample_pairs(count, cert.seed);
        let g0 = pairs.iter().map(|(a, b)| Ok((average(sys, a)?, average(sys, b)?))).collect::<Result<_>>()?;
        Ok(Self { pairs, g0 })
    }

    /// `D(eps)`: the largest difference quotient of `g_eps - g0` over the pairs.
    fn quotient(&self, sys: &StandardSystem, cert: &Certificate, eps: f64, cfg: &IntegratorConfig) -> Result<f64> {
        let mut worst = 0.0_f64;
        for ((a, b), (ga, gb)) in self.pairs.iter().zip(&self.g0) {
            let dist = cert.norm.distance(a, b);
            if dist == 0.0 {
                continue;
            }
            let da = g_eps(sys, a, eps, cfg)?;
            let db = g_eps(sys, b, eps, cfg)?;
            let diff: Vec<f64> = (0..a.len()).map(|i| (da[i] - ga[i]) - (db[i] - gb[i])).collect();
            worst = worst.max(cert.norm.norm(&diff) / dist);
        }
        Ok(worst)
    }
}

/// `D(eps)` for each requested `eps`, over the certificate's seeded pairs.
pub fn difference_quotients(
    sys: &StandardSystem,
    cert: &Certificate,
    eps_values: &[f64],
    opts: &EpsilonOptions,
) -> Result<Vec<(f64, f64)>> {
    let table = PairTable::new(sys, cert, opts.pair_samples)?;
    eps_values.iter().map(|&e| Ok((e, table.quotient(sys, cert, e, &opts.integrator)?))).collect()
}

/// Largest `eps` in `alpha, alpha/2, ..., alpha/1024` whose difference
/// quotient stays below `(1 - q) / (2 alpha)`. The value is stored in the
/// certificate; if no grid value qualifies, `eps0` is 0 and the certificate
/// is downgraded to inconclusive.
pub fn epsilon0_estimate(sys: &StandardSystem, cert: &mut Certificate, opts: &EpsilonOptions) -> Result<f64> {
    if cert.status != Status::Certified {
        return Err(Error::PreconditionRejected(format!("certificate status is {:?}, not Certified", cert.status)));
    }
    let bound = (1.0 - cert.q_cert) / (2.0 * cert.alpha);
    let table = PairTable::new(sys, cert, opts.pair_samples)?;
    for k in 0..=EPS_HALVINGS {
        let eps = cert.alpha * 2f64.powi(-k);
        if table.quotient(sys, cert, eps, &opts.integrator)? <= bound {
            cert.eps0 = eps;
            return Ok(eps);
        }
    }
    cert.eps0 = 0.0;
    cert.status = Status::Inconclusive;
    Ok(0.0)
}

/// Sampled `sup_V |g_eps - g0|_inf`.
pub fn averaging_defect(
    sys: &StandardSystem,
    set: &ConvexSet,
    eps: f64,
    samples: usize,
    seed: u64,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for v in set.samples(samples, seed) {
        let g0 = average(sys, &v)?;
        let ge = g_eps(sys, &v, eps, cfg)?;
        worst = ge.iter().zip(&g0).fold(worst, |m, (a, b)| m.max((a - b).abs()));
    }
    Ok(worst)
}
