use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative central-difference step used throughout the crate.
pub const FD_STEP: f64 = 1e-6;

/// Central-difference Jacobian with step `1e-6 * max(1, |v_i|)` per column.
pub fn fd_jacobian<F>(f: F, v: &[f64]) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    fd_jacobian_step(f, v, FD_STEP)
}

pub fn fd_jacobian_step<F>(mut f: F, v: &[f64], rel_step: f64) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let n = v.len();
    let mut jac = DMatrix::zeros(0, n);
    let mut probe = v.to_vec();
    for j in 0..n {
        let h = rel_step * v[j].abs().max(1.0);
        let (hi, lo) = (v[j] + h, v[j] - h);
        probe[j] = hi;
        let fp = f(&probe)?;
        probe[j] = lo;
        let fm = f(&probe)?;
        probe[j] = v[j];
        if jac.nrows() == 0 {
            jac = DMatrix::zeros(fp.len(), n);
        }
        if fp.len() != jac.nrows() || fm.len() != jac.nrows() {
            return Err(Error::DimensionMismatch { expected: jac.nrows(), found: fp.len().min(fm.len()) });
        }
        let denom = hi - lo;
        for i in 0..fp.len() {
            let d = (fp[i] - fm[i]) / denom;
            if !d.is_finite() {
                return Err(Error::NonFinite("finite-difference Jacobian"));
            }
            jac[(i, j)] = d;
        }
    }
    Ok(jac)
}

/// Product of column 2-norms: Hadamard's bound on `|det M|`, used to make
/// determinant thresholds scale-free.
pub fn det_scale(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.norm()).product()
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonOutcome {
    pub point: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// Jacobian at the last Newton step taken.
    pub last_jacobian: Option<DMatrix<f64>>,
}

/// Damped Newton iteration for `F(v) = 0`.
///
/// Each step is halved until `|F|_inf` decreases, down to a factor of
/// `2^-20`, below which the floored step is taken anyway.
pub fn newton<F>(mut f: F, start: &[f64], tol: f64, max_iter: usize) -> Result<NewtonOutcome>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let mut v = start.to_vec();
    let mut fv = f(&v)?;
    if fv.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: v.len(), found: fv.len() });
    }
    let mut res = inf_norm(&fv);
    let mut last_jacobian = None;
    for iter in 0..=max_iter {
        if !res.is_finite() {
            return Err(Error::NonFinite("Newton residual"));
        }
        if res <= tol {
            return Ok(NewtonOutcome { point: v, residual: res, iterations: iter, last_jacobian });
        }
        if iter == max_iter {
            break;
        }
        let jac = fd_jacobian(&mut f, &v)?;
        let det = jac.determinant();
        let scale = det_scale(&jac);
        if !(det.abs() >= 1e-12 * scale) || scale == 0.0 {
            return Err(Error::SingularJacobian { det, scale });
        }
        let rhs = -DVector::from_column_slice(&fv);
        let step = jac.clone().lu().solve(&rhs).ok_or(Error::SingularJacobian { det, scale })?;
        last_jacobian = Some(jac);

        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = v.iter().zip(step.iter()).map(|(a, d)| a + lambda * d).collect();
            let floor = lambda <= 1.0 / (1u64 << 20) as f64;
            match f(&trial) {
                Ok(ft) => {
                    let rt = inf_norm(&ft);
                    if rt < res || floor {
                        v = trial;
                        fv = ft;
                        res = rt;
                        break;
                    }
                }
                Err(e) if floor => return Err(e),
                Err(_) => {}
            }
            lambda *= 0.5;
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: res })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_map_jacobian() {
        let b = [[1.5, -2.0], [0.25, 3.0]];
        let jac = fd_jacobian(|v| Ok(vec![b[0][0] * v[0] + b[0][1] * v[1], b[1][0] * v[0] + b[1][1] * v[1]]), &[0.3, -7.0])
            .unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((jac[(i, j)] - b[i][j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn square_derivative() {
        let jac = fd_jacobian(|v| Ok(vec![v[0] * v[0]]), &[3.0]).unwrap();
        assert!((jac[(0, 0)] - 6.0).abs() < 1e-6);
    }

    #[test]
    fn newton_linear_one_step() {
        let out = newton(|v| Ok(vec![v[0] - 1.0]), &[5.0], 1e-10, 20).unwrap();
        assert!((out.point[0] - 1.0).abs() < 1e-10);
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn newton_square_root() {
        let out = newton(|v| Ok(vec![v[0] * v[0] - 4.0]), &[3.0], 1e-12, 50).unwrap();
        assert!((out.point[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn newton_singular_jacobian() {
        let r = newton(|v| Ok(vec![v[0] + v[1] + 1.0, v[0] + v[1] + 1.0]), &[0.0, 0.0], 1e-10, 20);
        assert!(matches!(r, Err(Error::SingularJacobian { .. })));
    }

    #[test]
    fn newton_iteration_cap() {
        let r = newton(|v| Ok(vec![v[0].atan()]), &[10.0], 1e-14, 2);
        assert!(matches!(r, Err(Error::NoConvergence { iterations: 2, .. })));
    }
}
