use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::averaging::switching_roots;
use crate::error::{Error, Result};
use crate::numkit::{fd_jacobian, inf_norm};
use crate::system::StandardSystem;

use super::set::{stream_rng, ConvexSet};

/// Random `(t, h1, h2)` probes per sample for the Jacobian oscillation.
const OSCILLATION_PROBES: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakDiffSample {
    pub v: Vec<f64>,
    /// Number of excluded time intervals, `N(v)`.
    pub intervals_count: usize,
    pub intervals: Vec<[f64; 2]>,
    pub measure: f64,
    pub jacobian_oscillation: f64,
    /// A switching function vanishes on a whole time interval near `v`.
    pub fat_switching: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonsmoothReport {
    /// Largest excluded measure over the samples.
    pub gamma: f64,
    pub delta: f64,
    pub fat_switching: bool,
    pub samples: Vec<WeakDiffSample>,
}

/// Sorted union of `[r - half, r + half]` clipped to `[0, period]`.
fn merge_intervals(roots: &[f64], half: f64, period: f64) -> Vec<[f64; 2]> {
    let mut raw: Vec<[f64; 2]> = roots.iter().map(|r| [(r - half).max(0.0), (r + half).min(period)]).collect();
    raw.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut out: Vec<[f64; 2]> = Vec::new();
    for iv in raw {
        match out.last_mut() {
            Some(last) if iv[0] <= last[1] => last[1] = last[1].max(iv[1]),
            _ => out.push(iv),
        }
    }
    out
}

fn state_jacobian(sys: &StandardSystem, t: f64, v: &[f64]) -> Result<nalgebra::DMatrix<f64>> {
    fd_jacobian(|x| sys.field(t, x, 0.0), v)
}

/// Evidence for weak differentiability of `g(t, ., 0)` on the set: excluded
/// time intervals around switching roots near each sample, and the Jacobian
/// oscillation outside them. Samples are the center of the set followed by
/// seeded uniform points.
pub fn weak_diff_report(
    sys: &StandardSystem,
    set: &ConvexSet,
    delta: f64,
    sample_count: usize,
    seed: u64,
) -> Result<NonsmoothReport> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
    }
    if set.dim() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), found: set.dim() });
    }
    let period = sys.period();
    let mut points = vec![set.center()];
    points.extend(set.samples(sample_count.saturating_sub(1), seed));

    let mut samples = Vec::with_capacity(points.len());
    for (k, v) in points.into_iter().enumerate() {
        let mut probes = vec![v.clone()];
        for axis in 0..v.len() {
            for side in [1.0, -1.0] {
                let mut p = v.clone();
                p[axis] += side * delta;
                probes.push(p);
            }
        }
        let mut roots = Vec::new();
        let mut fat = false;
        for p in &probes {
            let scan = switching_roots(sys, p, 0.0)?;
            fat |= scan.fat;
            roots.extend(scan.roots);
        }
        let intervals = merge_intervals(&roots, delta, period);
        let measure = intervals.iter().map(|iv| iv[1] - iv[0]).sum();

        let mut rng = stream_rng(seed, (1 << 32) + k as u64);
        let mut oscillation = 0.0_f64;
        for _ in 0..OSCILLATION_PROBES {
            let t = loop {
                let t = rng.random_range(0.0..period);
                if !intervals.iter().any(|iv| t >= iv[0] && t <= iv[1]) {
                    break Some(t);
                }
                if measure >= period {
                    break None;
                }
            };
            let Some(t) = t else { break };
            let h1: Vec<f64> = v.iter().map(|x| x + rng.random_range(-delta..=delta)).collect();
            let h2: Vec<f64> = v.iter().map(|x| x + rng.random_range(-delta..=delta)).collect();
            let diff = state_jacobian(sys, t, &h1)? - state_jacobian(sys, t, &h2)?;
            oscillation = oscillation.max(inf_norm(&diff));
        }

        samples.push(WeakDiffSample {
            v,
            intervals_count: intervals.len(),
            intervals,
            measure,
            jacobian_oscillation: oscillation,
            fat_switching: fat,
        });
    }
    let gamma = samples.iter().map(|s| s.measure).fold(0.0, f64::max);
    let fat_switching = samples.iter().any(|s| s.fat_switching);
    Ok(NonsmoothReport { gamma, delta, fat_switching, samples })
}
