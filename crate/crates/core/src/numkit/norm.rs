use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest accepted `|P|_inf * |P^-1|_inf`.
pub const MAX_CONDITION: f64 = 1e12;

/// The norm `|x|_0 = max_i |(P x)_i|` for an invertible weight matrix `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedNorm {
    p: DMatrix<f64>,
    p_inv: DMatrix<f64>,
}

impl WeightedNorm {
    pub fn new(p: DMatrix<f64>) -> Result<Self> {
        if !p.is_square() {
            return Err(Error::InvalidInput(format!("norm matrix is {}x{}, not square", p.nrows(), p.ncols())));
        }
        let p_inv = p
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("norm matrix P is singular".into()))?;
        let cond = inf_norm(&p) * inf_norm(&p_inv);
        if !cond.is_finite() || cond > MAX_CONDITION {
            return Err(Error::InvalidInput(format!("norm matrix P is ill-conditioned (cond {cond:e})")));
        }
        Ok(Self { p, p_inv })
    }

    pub fn identity(n: usize) -> Self {
        Self { p: DMatrix::identity(n, n), p_inv: DMatrix::identity(n, n) }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.p_inv
    }

    pub fn is_identity(&self) -> bool {
        self.p == DMatrix::identity(self.dim(), self.dim())
    }

    pub fn condition(&self) -> f64 {
        inf_norm(&self.p) * inf_norm(&self.p_inv)
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.p[(i, j)] * x[j]).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.norm(&d)
    }

    /// Induced matrix norm `|P M P^-1|_inf`.
    pub fn induced(&self, m: &DMatrix<f64>) -> f64 {
        if self.is_identity() {
            inf_norm(m)
        } else {
            inf_norm(&(&self.p * m * &self.p_inv))
        }
    }
}

/// Induced norm of `M` under `W`: the maximum absolute row sum of `P M P^-1`.
pub fn induced_norm(m: &DMatrix<f64>, w: &WeightedNorm) -> Result<f64> {
    if m.nrows() != w.dim() || m.ncols() != w.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), found: m.nrows() });
    }
    Ok(w.induced(m))
}

/// Maximum absolute row sum.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch { expected: ncols, found: bad.len() });
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl Serialize for WeightedNorm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_rows(&self.p).serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeightedNorm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        WeightedNorm::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
