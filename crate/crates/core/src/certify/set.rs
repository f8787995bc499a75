use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::WeightedNorm;

/// Region on which a contraction is certified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ConvexSet {
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// `{ v : |v - center|_W <= radius }`; identity weight when `P` is absent.
    Ball {
        center: Vec<f64>,
        radius: f64,
        #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
        norm: Option<WeightedNorm>,
    },
}

/// A deterministic RNG for sample `index` of a run seeded with `seed`.
/// Streams are independent, so samples can be drawn in any order.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

impl ConvexSet {
    pub fn new_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let set = ConvexSet::Box { lo, hi };
        set.validate()?;
        Ok(set)
    }

    pub fn new_ball(center: Vec<f64>, radius: f64, norm: Option<WeightedNorm>) -> Result<Self> {
        let set = ConvexSet::Ball { center, radius, norm };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexSet::Box { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return Err(Error::InvalidInput(format!(
                        "box bounds have lengths {} and {}",
                        lo.len(),
                        hi.len()
                    )));
                }
                if lo.iter().chain(hi).any(|x| !x.is_finite()) || lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
                    return Err(Error::InvalidInput("box needs finite bounds with lo < hi".into()));
                }
            }
            ConvexSet::Ball { center, radius, norm } => {
                if center.is_empty() || center.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidInput("ball center must be a finite point".into()));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidInput(format!("ball radius must be positive, got {radius}")));
                }
                if let Some(w) = norm {
                    if w.dim() != center.len() {
                        return Err(Error::DimensionMismatch { expected: center.len(), found: w.dim() });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Box { lo, .. } => lo.len(),
            ConvexSet::Ball { center, .. } => center.len(),
        }
    }

    pub fn center(&self) -> Vec<f64> {
        match self {
            ConvexSet::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect(),
            ConvexSet::Ball { center, .. } => center.clone(),
        }
    }

    /// The set as `center + M [-1, 1]^n`.
    fn shape(&self) -> DMatrix<f64> {
        match self {
            ConvexSet::Box { lo, hi } => {
                DMatrix::from_diagonal(&DVector::from_iterator(lo.len(), lo.iter().zip(hi).map(|(l, h)| 0.5 * (h - l))))
            }
            ConvexSet::Ball { center, radius, norm } => match norm {
                Some(w) => w.inverse() * *radius,
                None => DMatrix::identity(center.len(), center.len()) * *radius,
            },
        }
    }

    fn from_cube(&self, u: &[f64]) -> Vec<f64> {
        let c = self.center();
        match self {
            // Keeps box samples bit-exact at the faces.
            ConvexSet::Box { lo, hi } => {
                lo.iter().zip(hi).zip(u).map(|((l, h), s)| l + (h - l) * 0.5 * (s + 1.0)).collect()
            }
            ConvexSet::Ball { .. } => {
                let v = self.shape() * DVector::from_column_slice(u);
                c.iter().zip(v.iter()).map(|(a, b)| a + b).collect()
            }
        }
    }

    /// Axis-aligned bounding box.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            ConvexSet::Box { lo, hi } => (lo.clone(), hi.clone()),
            ConvexSet::Ball { center, .. } => {
                let m = self.shape();
                let half: Vec<f64> = m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum()).collect();
                (
                    center.iter().zip(&half).map(|(c, h)| c - h).collect(),
                    center.iter().zip(&half).map(|(c, h)| c + h).collect(),
                )
            }
        }
    }

    /// Membership with absolute slack `tol`.
    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        if v.len() != self.dim() {
            return false;
        }
        match self {
            ConvexSet::Box { lo, hi } => v.iter().zip(lo.iter().zip(hi)).all(|(x, (l, h))| *x >= l - tol && *x <= h + tol),
            ConvexSet::Ball { center, radius, .. } => self.ball_distance(v, center) <= radius + tol,
        }
    }

    fn ball_distance(&self, v: &[f64], center: &[f64]) -> f64 {
        match self {
            ConvexSet::Ball { norm: Some(w), .. } => w.distance(v, center),
            _ => v.iter().zip(center).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())),
        }
    }

    /// The images of the cube corners: the endpoints of an interval, the
    /// corners of a box, the vertices of a weighted-max ball.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| {
                let u: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
                self.from_cube(&u)
            })
            .collect()
    }

    /// Uniform sample number `index` of the stream seeded by `seed`.
    pub fn sample(&self, seed: u64, index: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, index);
        let u: Vec<f64> = (0..self.dim()).map(|_| rng.random_range(-1.0..=1.0)).collect();
        self.from_cube(&u)
    }

    pub fn samples(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        (0..count as u64).map(|i| self.sample(seed, i)).collect()
    }

    /// Pairs of points in the set. Odd-numbered pairs are near-diagonal: the
    /// second point sits 1% of the way from the first towards another sample.
    pub fn sample_pairs(&self, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
        (0..count as u64)
            .map(|i| {
                let a = self.sample(seed, 2 * i);
                let b = self.sample(seed, 2 * i + 1);
                if i % 2 == 1 {
                    let near = a.iter().zip(&b).map(|(x, y)| x + 0.01 * (y - x)).collect();
                    (a, near)
                } else {
                    (a, b)
                }
            })
            .collect()
    }

    /// Uniform tensor grid over the bounding box, restricted to the set.
    pub fn grid(&self, per_dim: usize) -> Result<Grid> {
        if per_dim < 3 {
            return Err(Error::InvalidInput(format!("grid_per_dim must be at least 3, got {per_dim}")));
        }
        let n = self.dim();
        let total = per_dim
            .checked_pow(n as u32)
            .filter(|t| *t <= 4_000_000)
            .ok_or_else(|| Error::InvalidInput(format!("grid of {per_dim}^{n} nodes is too large")))?;
        let (lo, hi) = self.bounds();
        let spacing: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| (h - l) / (per_dim - 1) as f64).collect();
        let coord = |axis: usize, k: usize| {
            if k == per_dim - 1 {
                hi[axis]
            } else {
                lo[axis] + spacing[axis] * k as f64
            }
        };
        // Ball grids keep nodes within half a cell of the ball so that every
        // point of the ball has a nearby node.
        let slack = match self {
            ConvexSet::Box { .. } => 0.0,
            ConvexSet::Ball { norm, .. } => {
                let scale = norm.as_ref().map_or(1.0, |w| crate::numkit::inf_norm(w.matrix()));
                scale * spacing.iter().fold(0.0_f64, |m, h| m.max(*h)) * 0.5
            }
        };

        let mut index = vec![usize::MAX; total];
        let mut nodes = Vec::new();
        let mut multi = vec![0usize; n];
        for (flat, slot) in index.iter_mut().enumerate() {
            let mut rest = flat;
            for axis in (0..n).rev() {
                multi[axis] = rest % per_dim;
                rest /= per_dim;
            }
            let point: Vec<f64> = (0..n).map(|a| coord(a, multi[a])).collect();
            if self.contains(&point, slack) {
                *slot = nodes.len();
                nodes.push(point);
            }
        }

        let mut pairs = Vec::new();
        let mut stride = 1;
        for axis in (0..n).rev() {
            for flat in 0..total {
                if (flat / stride) % per_dim == per_dim - 1 {
                    continue;
                }
                let (a, b) = (index[flat], index[flat + stride]);
                if a != usize::MAX && b != usize::MAX {
                    pairs.push(Edge { a, b, length: spacing[axis] });
                }
            }
            stride *= per_dim;
        }
        pairs.sort_by_key(|e| (e.a, e.b));

        let max_spacing = spacing.iter().fold(0.0_f64, |m, h| m.max(*h));
        Ok(Grid { nodes, edges: pairs, spacing: max_spacing })
    }
}

/// Two grid nodes adjacent along one axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

#[derive(Clone, Debug)]
pub struct Grid {
    pub nodes: Vec<Vec<f64>>,
    pub edges: Vec<Edge>,
    /// Largest per-axis spacing.
    pub spacing: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_grid_counts() {
        let set = ConvexSet::new_box(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        let g = set.grid(5).unwrap();
        assert_eq!(g.nodes.len(), 25);
        assert_eq!(g.edges.len(), 2 * 5 * 4);
        assert_eq!(g.spacing, 0.5);
        assert_eq!(g.nodes.last().unwrap(), &vec![1.0, 2.0]);
    }

    #[test]
    fn ball_grid_stays_near_ball() {
        let w = WeightedNorm::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let set = ConvexSet::new_ball(vec![1.0, -1.0], 0.5, Some(w.clone())).unwrap();
        let g = set.grid(21).unwrap();
        assert!(g.nodes.len() < 21 * 21);
        let (lo, hi) = set.bounds();
        let h = (hi[0] - lo[0]) / 20.0;
        for v in &g.nodes {
            assert!(w.distance(v, &[1.0, -1.0]) <= 0.5 + 2.0 * h + 1e-12);
        }
    }

    #[test]
    fn samples_are_inside_and_reproducible() {
        let w = WeightedNorm::from_rows(&[vec![2.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let set = ConvexSet::new_ball(vec![0.0, 0.0], 1.0, Some(w)).unwrap();
        for v in set.samples(200, 7) {
            assert!(set.contains(&v, 1e-12));
        }
        assert_eq!(set.sample(7, 3), set.sample(7, 3));
        assert_ne!(set.sample(7, 3), set.sample(7, 4));
        for (a, b) in set.sample_pairs(50, 1) {
            assert!(set.contains(&a, 1e-12) && set.contains(&b, 1e-12));
        }
    }

    #[test]
    fn vertices_of_interval() {
        let set = ConvexSet::new_box(vec![1.5], vec![2.5]).unwrap();
        assert_eq!(set.vertices(), vec![vec![1.5], vec![2.5]]);
    }

    #[test]
    fn rejects_degenerate_sets() {
        assert!(ConvexSet::new_box(vec![1.0], vec![1.0]).is_err());
        assert!(ConvexSet::new_ball(vec![0.0], 0.0, None).is_err());
        assert!(ConvexSet::new_box(vec![0.0], vec![1.0]).unwrap().grid(2).is_err());
    }

    #[test]
    fn serde_shape() {
        let set = ConvexSet::new_box(vec![1.5], vec![2.5]).unwrap();
        assert_eq!(serde_json::to_string(&set).unwrap(), r#"{"type":"box","lo":[1.5],"hi":[2.5]}"#);
        let ball: ConvexSet = serde_json::from_str(r#"{"type":"ball","center":[2.0],"radius":0.5}"#).unwrap();
        assert_eq!(ball, ConvexSet::new_ball(vec![2.0], 0.5, None).unwrap());
    }
}
