use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 8;

/// Diagonal Pade(6,6) coefficients of exp.
const PADE6: [f64; 7] = [
    1.0,
    1.0 / 2.0,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15840.0,
    1.0 / 665280.0,
];

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring around a Pade(6,6) kernel.
///
/// The argument is scaled by `2^-s` until its 1-norm is at most 1/2, where
/// the truncation error of the (6,6) approximant is far below roundoff.
pub fn expm(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch { expected: n, found: m.ncols() });
    }
    if n > MAX_DIM {
        return Err(Error::DimensionCap { n, cap: MAX_DIM });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("expm argument"));
    }
    let norm = one_norm(m);
    let mut s = 0i32;
    if norm > 0.5 {
        s = (norm / 0.5).log2().ceil() as i32;
    }
    let a = m * 2f64.powi(-s);

    let id = DMatrix::<f64>::identity(n, n);
    let mut num = id.clone() * PADE6[0];
    let mut den = id.clone() * PADE6[0];
    let mut power = id;
    for (k, c) in PADE6.iter().enumerate().skip(1) {
        power = &power * &a;
        num += &power * *c;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        den += &power * (sign * c);
    }
    let mut result = den.lu().solve(&num).ok_or(Error::NonFinite("expm Pade denominator"))?;
    for _ in 0..s {
        result = &result * &result;
    }
    if result.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("expm result"));
    }
    Ok(result)
}
