//! Contraction certificates for `v -> v + alpha g0(v)` on convex sets.
//!
//! A certificate is numerical, not a proof: `q_grid` is the largest induced
//! norm of `I + alpha J(v)` over a grid, and `q_cert` adds a margin built
//! from the observed variation of `J` between neighbouring nodes.

mod epsilon;
mod norms;
mod set;
mod survey;
mod weak;

use serde::{Deserialize, Serialize};

use crate::averaging::{average, average_jacobian, bogolubov_check};
use crate::error::{Error, Result};
use crate::numkit::WeightedNorm;
use crate::system::{StandardSystem, SwitchKind};
use survey::{Probing, Survey};

pub use epsilon::{averaging_defect, difference_quotients, epsilon0_estimate, EpsilonOptions};
pub use norms::{suggest_norm, NormSuggestion};
pub use set::{stream_rng, ConvexSet, Edge, Grid};
pub use weak::{weak_diff_report, NonsmoothReport, WeakDiffSample};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Certified,
    Falsified,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub set: ConvexSet,
    #[serde(rename = "P")]
    pub norm: WeightedNorm,
    pub alpha: f64,
    pub q_grid: f64,
    pub q_cert: f64,
    pub margin: f64,
    /// Admissible perturbation size; 0 until estimated.
    pub eps0: f64,
    pub status: Status,
    pub grid_per_dim: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub falsifying_point: Option<Vec<f64>>,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.status == Status::Certified
    }

    /// Contraction factor of `v -> v + eps g0(v)` implied by the certificate
    /// for `eps <= alpha`: `1 - (eps / alpha)(1 - q)`.
    pub fn step_factor(&self, eps: f64) -> f64 {
        1.0 - eps / self.alpha * (1.0 - self.q_cert)
    }

    /// Bound on the Poincare-map contraction, `1 - eps (1 - q) / (2 alpha)`.
    pub fn theoretical_kappa(&self, eps: f64) -> f64 {
        1.0 - eps * (1.0 - self.q_cert) / (2.0 * self.alpha)
    }

    /// The same bound with the factor as printed in the source argument,
    /// `1 - eps (1 - q) alpha / 2`; reported for comparison only.
    pub fn printed_kappa(&self, eps: f64) -> f64 {
        1.0 - eps * (1.0 - self.q_cert) * self.alpha / 2.0
    }
}

/// Log-spaced step sizes `min, ..., max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaGrid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Default for AlphaGrid {
    fn default() -> Self {
        Self { min: 1e-3, max: 1.0, steps: 25 }
    }
}

impl AlphaGrid {
    pub fn single(alpha: f64) -> Self {
        Self { min: alpha, max: alpha, steps: 1 }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.min > 0.0 && self.max >= self.min && self.max.is_finite()) || self.steps == 0 {
            return Err(Error::InvalidInput(format!(
                "alpha grid needs 0 < min <= max and steps >= 1 (got {}..{} in {} steps)",
                self.min, self.max, self.steps
            )));
        }
        if self.steps == 1 || self.min == self.max {
            return Ok(vec![self.min]);
        }
        let ratio = self.max / self.min;
        let last = self.steps - 1;
        Ok((0..self.steps)
            .map(|k| if k == last { self.max } else { self.min * ratio.powf(k as f64 / last as f64) })
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifyOptions {
    pub alpha: AlphaGrid,
    /// Candidate norms; empty means the identity plus the modal norms of the
    /// Jacobian at the center of the set.
    pub norms: Vec<WeightedNorm>,
    pub grid_per_dim: usize,
    pub parallel: bool,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { alpha: AlphaGrid::default(), norms: Vec::new(), grid_per_dim: 33, parallel: true, seed: 0 }
    }
}

/// Result of [`contraction_factor`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionFactor {
    pub q_grid: f64,
    pub q_cert: f64,
    pub margin: f64,
    /// Grid point where `q_grid` is attained.
    pub argmax: Vec<f64>,
}

fn check_dims(sys: &StandardSystem, set: &ConvexSet) -> Result<()> {
    set.validate()?;
    if set.dim() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), found: set.dim() });
    }
    Ok(())
}

/// Grid estimate of `sup_V |I + alpha J(v)|_W` plus its Lipschitz margin.
pub fn contraction_factor(
    sys: &StandardSystem,
    set: &ConvexSet,
    alpha: f64,
    w: &WeightedNorm,
    grid_per_dim: usize,
) -> Result<ContractionFactor> {
    check_dims(sys, set)?;
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
    }
    if w.dim() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), found: w.dim() });
    }
    let survey = Survey::build(sys, set, grid_per_dim, true, Probing::Off)?;
    let f = survey.evaluate(alpha, w);
    Ok(ContractionFactor { q_grid: f.q_grid, q_cert: f.q_grid + f.margin, margin: f.margin, argmax: f.argmax })
}

fn candidate_norms(sys: &StandardSystem, set: &ConvexSet, opts: &CertifyOptions) -> Result<Vec<WeightedNorm>> {
    if !opts.norms.is_empty() {
        if let Some(w) = opts.norms.iter().find(|w| w.dim() != sys.dim()) {
            return Err(Error::DimensionMismatch { expected: sys.dim(), found: w.dim() });
        }
        return Ok(opts.norms.clone());
    }
    let j = average_jacobian(sys, &set.center())?;
    Ok(suggest_norm(&j)?.candidates)
}

fn search(sys: &StandardSystem, set: &ConvexSet, opts: &CertifyOptions, survey: &Survey) -> Result<Certificate> {
    let alphas = opts.alpha.values()?;
    let norms = candidate_norms(sys, set, opts)?;
    let mut best: Option<(f64, Certificate)> = None;
    for w in &norms {
        for &alpha in &alphas {
            let f = survey.evaluate(alpha, w);
            let q_cert = f.q_grid + f.margin;
            if best.as_ref().is_none_or(|(q, _)| q_cert < *q) {
                let cert = Certificate {
                    set: set.clone(),
                    norm: w.clone(),
                    alpha,
                    q_grid: f.q_grid,
                    q_cert,
                    margin: f.margin,
                    eps0: 0.0,
                    status: Status::Inconclusive,
                    grid_per_dim: opts.grid_per_dim,
                    seed: opts.seed,
                    falsifying_point: None,
                };
                best = Some((q_cert, cert));
            }
        }
    }
    let (_, mut cert) = best.ok_or_else(|| Error::InvalidInput("no candidate norms".into()))?;
    if cert.q_cert < 1.0 {
        cert.status = Status::Certified;
    } else if let Some(p) = survey.obstruction()? {
        cert.status = Status::Falsified;
        cert.falsifying_point = Some(p);
    }
    Ok(cert)
}

/// Searches the alpha grid and the candidate norms for the smallest
/// certified contraction factor on `set`.
pub fn certify(sys: &StandardSystem, set: &ConvexSet, opts: &CertifyOptions) -> Result<Certificate> {
    check_dims(sys, set)?;
    let survey = Survey::build(sys, set, opts.grid_per_dim, opts.parallel, Probing::Off)?;
    search(sys, set, opts, &survey)
}

/// [`certify`] for fields with state-dependent switching: grid nodes near a
/// switching surface also contribute one-sided Jacobians from probes on
/// either side, and the Lipschitz margin ignores node pairs that straddle a
/// surface.
pub fn certify_nonsmooth(sys: &StandardSystem, set: &ConvexSet, opts: &CertifyOptions) -> Result<Certificate> {
    let temporal_only = (0..sys.switching_count()).all(|i| sys.switching_kind(i) == SwitchKind::Temporal);
    if temporal_only {
        return certify(sys, set, opts);
    }
    check_dims(sys, set)?;
    let survey = Survey::build(sys, set, opts.grid_per_dim, opts.parallel, Probing::Switching)?;
    search(sys, set, opts, &survey)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalBasinOptions {
    pub r_max: f64,
    pub certify: CertifyOptions,
}

impl Default for LocalBasinOptions {
    fn default() -> Self {
        Self { r_max: 1.0, certify: CertifyOptions::default() }
    }
}

/// Relative width at which the radius bisection stops.
const RADIUS_REL_TOL: f64 = 0.01;
/// Smallest radius tried is `r_max * 2^-MAX_HALVINGS`.
const MAX_HALVINGS: i32 = 20;

/// Largest ball around a stable zero `v0` (to 1% relative) on which a
/// contraction certificate succeeds.
pub fn local_basin(sys: &StandardSystem, v0: &[f64], opts: &LocalBasinOptions) -> Result<Certificate> {
    if !(opts.r_max > 0.0 && opts.r_max.is_finite()) {
        return Err(Error::InvalidInput(format!("r_max must be positive, got {}", opts.r_max)));
    }
    let report = bogolubov_check(sys, v0)?;
    if !report.passes() {
        return Err(Error::PreconditionRejected(format!(
            "v0 = {v0:?} is not an asymptotically stable hyperbolic zero (residual {:e}, max Re eigenvalue {})",
            report.residual,
            report.max_real_part()
        )));
    }
    let norms = if opts.certify.norms.is_empty() {
        suggest_norm(&average_jacobian(sys, v0)?)?.candidates
    } else {
        opts.certify.norms.clone()
    };

    let attempt = |r: f64| -> Result<Option<Certificate>> {
        let mut best: Option<Certificate> = None;
        for w in &norms {
            let norm = if w.is_identity() { None } else { Some(w.clone()) };
            let set = ConvexSet::new_ball(v0.to_vec(), r, norm)?;
            let sub = CertifyOptions { norms: vec![w.clone()], ..opts.certify.clone() };
            let cert = certify(sys, &set, &sub)?;
            if cert.is_certified() && best.as_ref().is_none_or(|b| cert.q_cert < b.q_cert) {
                best = Some(cert);
            }
        }
        Ok(best)
    };

    if let Some(cert) = attempt(opts.r_max)? {
        return Ok(cert);
    }
    let mut hi = opts.r_max;
    let mut found = None;
    for k in 1..=MAX_HALVINGS {
        let r = opts.r_max * 2f64.powi(-k);
        if let Some(cert) = attempt(r)? {
            found = Some((r, cert));
            break;
        }
        hi = r;
    }
    let (mut lo, mut cert) =
        found.ok_or(Error::NoCertifiedRadius { radius: opts.r_max * 2f64.powi(-MAX_HALVINGS) })?;
    while (hi - lo) > RADIUS_REL_TOL * lo {
        let mid = 0.5 * (lo + hi);
        match attempt(mid)? {
            Some(c) => {
                lo = mid;
                cert = c;
            }
            None => hi = mid,
        }
    }
    Ok(cert)
}

/// Largest ratio `|F(v1) - F(v2)|_W / |v1 - v2|_W` over seeded pairs in the
/// set, for the step map `F(v) = v + step g0(v)`.
pub fn step_map_ratio(sys: &StandardSystem, set: &ConvexSet, w: &WeightedNorm, step: f64, pairs: usize, seed: u64) -> Result<PairCheck> {
    let mut check = PairCheck::default();
    for (a, b) in set.sample_pairs(pairs, seed) {
        let ga = average(sys, &a)?;
        let gb = average(sys, &b)?;
        let fa: Vec<f64> = a.iter().zip(&ga).map(|(v, g)| v + step * g).collect();
        let fb: Vec<f64> = b.iter().zip(&gb).map(|(v, g)| v + step * g).collect();
        let dist = w.distance(&a, &b);
        if dist == 0.0 {
            continue;
        }
        check.pairs.push((w.distance(&fa, &fb), dist));
    }
    Ok(check)
}

/// Image and preimage distances of sampled pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairCheck {
    pub pairs: Vec<(f64, f64)>,
}

impl PairCheck {
    /// Pairs violating `image <= factor * dist + slack`.
    pub fn violations(&self, factor: f64, slack: f64) -> usize {
        self.pairs.iter().filter(|(img, d)| *img > factor * d + slack).count()
    }

    pub fn max_ratio(&self) -> f64 {
        self.pairs.iter().map(|(img, d)| img / d).fold(0.0, f64::max)
    }
}
