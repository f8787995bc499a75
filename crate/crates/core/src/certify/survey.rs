//! Averaged Jacobians on a grid, computed once and reused for every
//! (alpha, norm) pair of a certificate search.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::set::{ConvexSet, Edge};
use crate::averaging::average_jacobian;
use crate::error::Result;
use crate::numkit::{eig_small, fd_jacobian, WeightedNorm};
use crate::system::{StandardSystem, SwitchKind};

/// A Jacobian of `g0` and where it was taken.
#[derive(Clone, Debug)]
pub(crate) struct Member {
    pub point: Vec<f64>,
    pub jac: DMatrix<f64>,
}

pub(crate) struct Survey {
    /// `members[i][0]` is the Jacobian at grid node `i`; further entries are
    /// one-sided probes near switching surfaces.
    pub members: Vec<Vec<Member>>,
    pub edges: Vec<Edge>,
    pub spacing: f64,
}

pub(crate) struct Factor {
    pub q_grid: f64,
    pub margin: f64,
    pub argmax: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Probing {
    Off,
    Switching,
}

fn map_nodes<T, F>(nodes: &[Vec<f64>], parallel: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Vec<f64>) -> Result<T> + Sync + Send,
{
    if parallel {
        nodes.par_iter().map(f).collect()
    } else {
        nodes.iter().map(f).collect()
    }
}

impl Survey {
    pub fn build(sys: &StandardSystem, set: &ConvexSet, per_dim: usize, parallel: bool, probing: Probing) -> Result<Self> {
        let grid = set.grid(per_dim)?;
        let spacing = grid.spacing;
        let members = map_nodes(&grid.nodes, parallel, |v| {
            let mut list = vec![Member { point: v.clone(), jac: average_jacobian(sys, v)? }];
            if probing == Probing::Switching {
                for p in probe_points(sys, set, v, spacing)? {
                    list.push(Member { jac: average_jacobian(sys, &p)?, point: p });
                }
            }
            Ok(list)
        })?;
        let mut edges = grid.edges;
        if probing == Probing::Switching {
            let signs = map_nodes(&grid.nodes, parallel, |v| spatial_signs(sys, v))?;
            edges.retain(|e| signs[e.a].iter().zip(&signs[e.b]).all(|(a, b)| a == b));
        }
        Ok(Self { members, edges, spacing })
    }

    /// `q_grid` over all members and the Lipschitz margin from the node
    /// Jacobians, both in the induced norm of `w`.
    pub fn evaluate(&self, alpha: f64, w: &WeightedNorm) -> Factor {
        let n = w.dim();
        let eye = DMatrix::<f64>::identity(n, n);
        let mut q_grid = f64::NEG_INFINITY;
        let mut argmax = Vec::new();
        for m in self.members.iter().flatten() {
            let q = w.induced(&(&eye + &m.jac * alpha));
            if q > q_grid {
                q_grid = q;
                argmax.clone_from(&m.point);
            }
        }
        let slope = self
            .edges
            .iter()
            .map(|e| w.induced(&(&self.members[e.a][0].jac - &self.members[e.b][0].jac)) / e.length)
            .fold(0.0_f64, f64::max);
        let lipschitz = 2.0 * slope;
        Factor { q_grid, margin: alpha * lipschitz * self.spacing / 2.0, argmax }
    }

    /// The member with the largest real eigenvalue, if that eigenvalue is
    /// nonnegative: then `I + alpha J` has an eigenvalue `>= 1` for every
    /// alpha, so no norm can certify.
    pub fn obstruction(&self) -> Result<Option<Vec<f64>>> {
        let mut worst: Option<(f64, &Vec<f64>)> = None;
        for m in self.members.iter().flatten() {
            for z in eig_small(&m.jac)? {
                if z.im == 0.0 && z.re >= 0.0 && worst.is_none_or(|(re, _)| z.re > re) {
                    worst = Some((z.re, &m.point));
                }
            }
        }
        Ok(worst.map(|(_, p)| p.clone()))
    }
}

/// Gradient of a state-only switching function.
fn switching_gradient(sys: &StandardSystem, i: usize, v: &[f64]) -> Result<Vec<f64>> {
    let jac = fd_jacobian(|x| Ok(vec![sys.eval_switching(i, 0.0, x, 0.0)?]), v)?;
    Ok(jac.row(0).iter().copied().collect())
}

fn spatial_signs(sys: &StandardSystem, v: &[f64]) -> Result<Vec<bool>> {
    (0..sys.switching_count())
        .filter(|&i| sys.switching_kind(i) == SwitchKind::Spatial)
        .map(|i| Ok(sys.eval_switching(i, 0.0, v, 0.0)? >= 0.0))
        .collect()
}

/// Probe points for node `v`: for each spatial switching surface within
/// `2h`, two points just across either side of its (linearized) nearest
/// point; for switching whose time roots move with the state, the half-cell
/// neighbours along each axis. Probes outside the set are dropped.
fn probe_points(sys: &StandardSystem, set: &ConvexSet, v: &[f64], h: f64) -> Result<Vec<Vec<f64>>> {
    let mut probes = Vec::new();
    let mut mixed = false;
    for i in 0..sys.switching_count() {
        match sys.switching_kind(i) {
            SwitchKind::Temporal => {}
            SwitchKind::Mixed => mixed = true,
            SwitchKind::Spatial => {
                let s = sys.eval_switching(i, 0.0, v, 0.0)?;
                let grad = switching_gradient(sys, i, v)?;
                let g2: f64 = grad.iter().map(|g| g * g).sum();
                if g2 == 0.0 || s.abs() / g2.sqrt() > 2.0 * h {
                    continue;
                }
                let foot: Vec<f64> = v.iter().zip(&grad).map(|(x, g)| x - s * g / g2).collect();
                let d = 1e-4 * foot.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
                let len = g2.sqrt();
                for side in [1.0, -1.0] {
                    probes.push(foot.iter().zip(&grad).map(|(x, g)| x + side * d * g / len).collect());
                }
            }
        }
    }
    if mixed {
        for axis in 0..v.len() {
            for side in [1.0, -1.0] {
                let mut p = v.to_vec();
                p[axis] += side * 0.5 * h;
                probes.push(p);
            }
        }
    }
    probes.retain(|p| set.contains(p, 0.0));
    Ok(probes)
}
