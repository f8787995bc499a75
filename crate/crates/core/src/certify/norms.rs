use nalgebra::{Complex, DMatrix};

use crate::error::Result;
use crate::numkit::{eig_small, inf_norm, WeightedNorm, MAX_CONDITION};

/// Block scalings tried for complex-pair blocks.
const BLOCK_SCALES: [f64; 3] = [1.0, 2.0, 4.0];

/// Candidate norms for a Jacobian, identity first.
#[derive(Clone, Debug)]
pub struct NormSuggestion {
    pub candidates: Vec<WeightedNorm>,
    /// Why only the identity is offered, when the modal basis was unusable.
    pub warning: Option<String>,
}

/// Real modal basis of `j0`: eigenvectors for real eigenvalues, and the real
/// and imaginary parts (rotated to be orthogonal) for each complex pair.
/// Returns the basis and, for each complex pair, the column of its
/// imaginary part.
fn modal_basis(j0: &DMatrix<f64>) -> std::result::Result<(DMatrix<f64>, Vec<usize>), String> {
    let n = j0.nrows();
    let eig = eig_small(j0).map_err(|e| e.to_string())?;
    let scale = inf_norm(j0).max(1.0);
    let null_tol = 1e-6 * scale;

    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut imag_columns = Vec::new();
    let mut done = vec![false; eig.len()];
    for i in 0..eig.len() {
        if done[i] || eig[i].im < 0.0 {
            continue;
        }
        let lambda = eig[i];
        let cluster: Vec<usize> = (0..eig.len())
            .filter(|&k| !done[k] && (eig[k] - lambda).norm() <= 1e-6 * (1.0 + lambda.norm()))
            .collect();
        for &k in &cluster {
            done[k] = true;
        }
        let m = cluster.len();
        if lambda.im == 0.0 {
            let shifted = j0 - DMatrix::identity(n, n) * lambda.re;
            let vs = null_vectors(shifted.map(|x| Complex::new(x, 0.0)), m, null_tol)
                .ok_or_else(|| format!("eigenvalue {} is defective", lambda.re))?;
            for v in vs {
                let re: Vec<f64> = v.iter().map(|z| z.re).collect();
                let len = re.iter().map(|x| x * x).sum::<f64>().sqrt();
                columns.push(re.iter().map(|x| x / len).collect());
            }
        } else {
            // Conjugates were clustered separately; mark them used.
            for k in 0..eig.len() {
                if !done[k] && (eig[k] - lambda.conj()).norm() <= 1e-6 * (1.0 + lambda.norm()) {
                    done[k] = true;
                }
            }
            let shifted = j0.map(|x| Complex::new(x, 0.0)) - DMatrix::identity(n, n) * lambda;
            let vs = null_vectors(shifted, m, null_tol)
                .ok_or_else(|| format!("eigenvalue {} is defective", lambda))?;
            for z in vs {
                let (u, w) = orthogonal_parts(&z);
                let len = u.iter().map(|x| x * x).sum::<f64>().sqrt();
                columns.push(u.iter().map(|x| x / len).collect());
                columns.push(w.iter().map(|x| x / len).collect());
                imag_columns.push(columns.len() - 1);
            }
        }
    }
    if columns.len() != n {
        return Err("eigenvector basis is incomplete".into());
    }
    Ok((DMatrix::from_fn(n, n, |i, j| columns[j][i]), imag_columns))
}

/// The `m` right singular vectors of `a` with the smallest singular values,
/// or `None` if fewer than `m` singular values are below `tol`.
fn null_vectors(a: DMatrix<Complex<f64>>, m: usize, tol: f64) -> Option<Vec<Vec<Complex<f64>>>> {
    let n = a.ncols();
    let svd = a.svd(false, true);
    let v_t = svd.v_t?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
    if order.iter().take(m).any(|&k| svd.singular_values[k] > tol) {
        return None;
    }
    Some(order.iter().take(m).map(|&k| v_t.row(k).iter().map(|z| z.conj()).collect()).collect())
}

/// Rotates the phase of `z = u + i w` so that `u` and `w` are orthogonal
/// with `|u| >= |w|`.
fn orthogonal_parts(z: &[Complex<f64>]) -> (Vec<f64>, Vec<f64>) {
    let uu: f64 = z.iter().map(|c| c.re * c.re).sum();
    let ww: f64 = z.iter().map(|c| c.im * c.im).sum();
    let uw: f64 = z.iter().map(|c| c.re * c.im).sum();
    let phi = 0.5 * (-2.0 * uw).atan2(uu - ww);
    let (s, c) = phi.sin_cos();
    let u = z.iter().map(|v| v.re * c - v.im * s).collect();
    let w = z.iter().map(|v| v.re * s + v.im * c).collect();
    (u, w)
}

/// Candidate weight matrices for certifying near a point with Jacobian `j0`:
/// the identity and the inverse real modal matrix, the latter with complex
/// blocks rescaled by each of {1, 2, 4}.
pub fn suggest_norm(j0: &DMatrix<f64>) -> Result<NormSuggestion> {
    let n = j0.nrows();
    if !j0.is_square() || n == 0 {
        return Err(crate::Error::InvalidInput(format!("Jacobian is {}x{}, not square", j0.nrows(), j0.ncols())));
    }
    let identity = WeightedNorm::identity(n);
    let (basis, imag_columns) = match modal_basis(j0) {
        Ok(b) => b,
        Err(why) => return Ok(NormSuggestion { candidates: vec![identity], warning: Some(why) }),
    };
    let scales: &[f64] = if imag_columns.is_empty() { &BLOCK_SCALES[..1] } else { &BLOCK_SCALES };
    let mut candidates = vec![identity];
    for &s in scales {
        let mut m = basis.clone();
        for &c in &imag_columns {
            m.column_mut(c).scale_mut(s);
        }
        let norm = m.try_inverse().and_then(|p| WeightedNorm::new(p).ok());
        match norm {
            Some(w) if !candidates.contains(&w) => candidates.push(w),
            Some(_) => {}
            None => {
                return Ok(NormSuggestion {
                    candidates: vec![WeightedNorm::identity(n)],
                    warning: Some(format!("modal matrix condition exceeds {MAX_CONDITION:e}")),
                })
            }
        }
    }
    Ok(NormSuggestion { candidates, warning: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn best(s: &NormSuggestion, m: &DMatrix<f64>) -> f64 {
        s.candidates.iter().map(|w| w.induced(m)).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn diagonal_keeps_identity() {
        let j = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -3.0]);
        let s = suggest_norm(&j).unwrap();
        assert!(s.warning.is_none());
        assert!(s.candidates[0].is_identity());
        let i_alpha = DMatrix::identity(2, 2) + &j * 0.1;
        assert_eq!(best(&s, &i_alpha), s.candidates[0].induced(&i_alpha));
    }

    #[test]
    fn modal_norm_beats_identity_for_shear() {
        let j = DMatrix::from_row_slice(2, 2, &[-1.0, 100.0, 0.0, -2.0]);
        let s = suggest_norm(&j).unwrap();
        let m = DMatrix::identity(2, 2) + &j * 0.01;
        let plain = WeightedNorm::identity(2).induced(&m);
        assert!((plain - 1.99).abs() < 1e-12);
        assert!((best(&s, &m) - 0.99).abs() < 1e-9);
    }

    #[test]
    fn complex_pair_block() {
        // S [[-2, 1], [-1, -2]] S^-1 with a strong shear S.
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 10.0, 0.0, 1.0]);
        let block = DMatrix::from_row_slice(2, 2, &[-2.0, 1.0, -1.0, -2.0]);
        let j = &s * block * s.clone().try_inverse().unwrap();
        let sug = suggest_norm(&j).unwrap();
        assert_eq!(sug.candidates.len(), 4);
        let m = DMatrix::identity(2, 2) + &j * 0.1;
        assert!(WeightedNorm::identity(2).induced(&m) > 1.0);
        assert!(best(&sug, &m) <= 0.95);
        assert!((best(&sug, &m) - 0.9).abs() < 1e-9);
    }

    #[test]
    fn defective_falls_back_to_identity() {
        let j = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -1.0]);
        let s = suggest_norm(&j).unwrap();
        assert_eq!(s.candidates.len(), 1);
        assert!(s.warning.is_some());
    }

    #[test]
    fn repeated_semisimple_eigenvalue() {
        let j = DMatrix::from_row_slice(3, 3, &[-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -2.0]);
        let s = suggest_norm(&j).unwrap();
        assert!(s.warning.is_none());
        let m = DMatrix::identity(3, 3) + &j * 0.1;
        assert!((best(&s, &m) - 0.9).abs() < 1e-12);
    }
}
