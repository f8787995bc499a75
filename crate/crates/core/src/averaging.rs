//! The averaged field `g0(v) = int_0^T g(tau, v, 0) dtau`, its zeros and
//! their linear stability, the perturbed average recovered from the flow, and
//! the change of variables from `u' = A u + eps h` to standard form.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::numkit::{
    det_scale, eig_small, expm, fd_jacobian, inf_norm, matrix_to_rows, newton, quad_vec, vec_inf_norm, Complex,
    QuadratureSpec,
};
use crate::odeint::{flow_map, IntegratorConfig};
use crate::system::StandardSystem;

/// Subintervals used when scanning a period for switching roots.
pub const ROOT_SCAN_INTERVALS: usize = 4096;
/// More roots than this in one period is treated as a modelling error.
pub const MAX_SWITCHING_ROOTS: usize = 64;
/// `|g0(v0)|_inf` at or below this counts as a zero.
pub const ZERO_RESIDUAL_TOL: f64 = 1e-8;
/// Relative determinant threshold for hyperbolicity.
pub const HYPERBOLIC_DET_TOL: f64 = 1e-10;
/// Reciprocal condition number below which a computed zero is reported as
/// non-isolated.
pub const NON_ISOLATED_RCOND: f64 = 1e-6;
/// Largest tolerated `|exp(A T) - I|_inf` for an original-form system.
pub const PERIODICITY_TOL: f64 = 1e-8;

const SWITCH_ZERO_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex<f64>> for ComplexValue {
    fn from(c: Complex<f64>) -> Self {
        Self { re: c.re, im: c.im }
    }
}

impl ComplexValue {
    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// Roots in `t in (0, T)` of the switching functions at a fixed state.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RootScan {
    /// Sorted union of the roots of all switching functions.
    pub roots: Vec<f64>,
    /// Per switching function, its own roots.
    pub per_function: Vec<Vec<f64>>,
    /// Some switching function vanishes on a whole `t`-subinterval.
    pub fat: bool,
}

/// Scans `[0, T]` on a uniform grid of [`ROOT_SCAN_INTERVALS`] cells and
/// bisects every sign change of every switching function.
pub fn switching_roots(sys: &StandardSystem, v: &[f64], eps: f64) -> Result<RootScan> {
    let period = sys.period();
    let mut scan = RootScan::default();
    let mut total = 0usize;
    for i in 0..sys.switching_count() {
        let sigma = |t: f64| sys.eval_switching(i, t, v, eps);
        let mut roots = Vec::new();
        let mut last: Option<(f64, f64)> = None;
        let mut zero_run = 0usize;
        for k in 0..=ROOT_SCAN_INTERVALS {
            let t = if k == ROOT_SCAN_INTERVALS { period } else { period * k as f64 / ROOT_SCAN_INTERVALS as f64 };
            let s = sigma(t)?;
            if s.abs() <= SWITCH_ZERO_TOL {
                zero_run += 1;
                if zero_run >= 3 {
                    scan.fat = true;
                }
                continue;
            }
            zero_run = 0;
            if let Some((tl, sl)) = last {
                if sl.signum() != s.signum() {
                    let root = bisect(&sigma, tl, sl, t)?;
                    if root > 0.0 && root < period {
                        roots.push(root);
                    }
                }
            }
            last = Some((t, s));
        }
        total += roots.len();
        if total > MAX_SWITCHING_ROOTS {
            return Err(Error::TooManySwitchingRoots { count: total, limit: MAX_SWITCHING_ROOTS });
        }
        scan.per_function.push(roots);
    }
    let mut all: Vec<f64> = scan.per_function.iter().flatten().copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * period);
    scan.roots = all;
    Ok(scan)
}

fn bisect<F>(f: &F, mut lo: f64, f_lo: f64, mut hi: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let s_lo = f_lo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `g0(v)`, integrated componentwise with the period split at the
/// switching roots of `g(., v, 0)`.
pub fn average(sys: &StandardSystem, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), found: v.len() });
    }
    let splits = if sys.is_smooth() { Vec::new() } else { switching_roots(sys, v, 0.0)?.roots };
    let quad_opts = QuadratureSpec::with_splits(splits);
    quad_vec(|t, out: &mut [f64]| sys.eval_field(t, v, 0.0, out), sys.dim(), 0.0, sys.period(), &quad_opts)
}

/// Finite-difference Jacobian of [`average`].
pub fn average_jacobian(sys: &StandardSystem, v: &[f64]) -> Result<DMatrix<f64>> {
    fd_jacobian(|w| average(sys, w), v)
}

/// The perturbed average `g_eps(v) = (x(T, v, eps) - v) / eps`.
pub fn g_eps(sys: &StandardSystem, v: &[f64], eps: f64, cfg: &IntegratorConfig) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("g_eps needs eps > 0, got {eps}")));
    }
    let end = flow_map(sys, v, eps, cfg)?;
    Ok(end.iter().zip(v).map(|(x, v0)| (x - v0) / eps).collect())
}

/// Reciprocal 2-norm condition number `s_min / s_max`.
pub fn reciprocal_condition(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

/// Locates a zero of `g0` by damped Newton from `start`.
///
/// A zero whose Jacobian is numerically singular is rejected with
/// [`Error::NonIsolatedZero`]: the contraction argument needs an isolated
/// zero.
pub fn find_zero(sys: &StandardSystem, start: &[f64]) -> Result<Vec<f64>> {
    let f = |w: &[f64]| average(sys, w);
    let out = newton(f, start, ZERO_RESIDUAL_TOL, 100)?;
    let mut point = out.point;
    let mut residual = out.residual;
    // A few extra full steps tighten the residual well below the tolerance.
    for _ in 0..3 {
        let jac = fd_jacobian(f, &point)?;
        let rhs = -DVector::from_vec(f(&point)?);
        let Some(step) = jac.lu().solve(&rhs) else { break };
        let trial: Vec<f64> = point.iter().zip(step.iter()).map(|(p, d)| p + d).collect();
        let Ok(ft) = f(&trial) else { break };
        let r = vec_inf_norm(&ft);
        if r < residual {
            point = trial;
            residual = r;
        } else {
            break;
        }
    }
    let jac = average_jacobian(sys, &point)?;
    let rcond = reciprocal_condition(&jac);
    if rcond < NON_ISOLATED_RCOND {
        return Err(Error::NonIsolatedZero { point, rcond });
    }
    Ok(point)
}

/// Linearization of `g0` at a candidate zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BogolubovReport {
    pub v0: Vec<f64>,
    pub residual: f64,
    pub jacobian: Vec<Vec<f64>>,
    pub det: f64,
    pub eigenvalues: Vec<ComplexValue>,
    pub is_zero: bool,
    pub hyperbolic_zero: bool,
    pub asymptotically_stable: bool,
}

impl BogolubovReport {
    /// Zero, hyperbolic and attracting: the hypotheses for a unique nearby
    /// asymptotically stable periodic solution.
    pub fn passes(&self) -> bool {
        self.is_zero && self.hyperbolic_zero && self.asymptotically_stable
    }

    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Evaluates the residual, determinant and spectrum of `(g0)'` at `v0`.
/// A point that is not a zero is reported as such, not rejected.
pub fn bogolubov_check(sys: &StandardSystem, v0: &[f64]) -> Result<BogolubovReport> {
    let residual = vec_inf_norm(&average(sys, v0)?);
    let jac = average_jacobian(sys, v0)?;
    let det = jac.determinant();
    let scale = det_scale(&jac);
    let eigenvalues: Vec<ComplexValue> = eig_small(&jac)?.into_iter().map(Into::into).collect();
    Ok(BogolubovReport {
        v0: v0.to_vec(),
        residual,
        jacobian: matrix_to_rows(&jac),
        det,
        is_zero: residual <= ZERO_RESIDUAL_TOL,
        hyperbolic_zero: det.abs() > HYPERBOLIC_DET_TOL * scale && scale > 0.0,
        asymptotically_stable: eigenvalues.iter().all(|e| e.re < 0.0),
        eigenvalues,
    })
}

/// `u' = A u + eps h(t, u, eps)` with every unperturbed solution `T`-periodic.
#[derive(Clone, Debug)]
pub struct OriginalSystem {
    pub label: String,
    pub a: DMatrix<f64>,
    pub h: Vec<Expr>,
    pub period: f64,
}

impl OriginalSystem {
    pub fn parse<S: AsRef<str>>(label: impl Into<String>, a: DMatrix<f64>, h: &[S], period: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidInput("A must be square".into()));
        }
        let n = a.nrows();
        if h.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: h.len() });
        }
        let h = h.iter().map(|s| expr::parse(s.as_ref(), n)).collect::<Result<Vec<_>, _>>()?;
        Ok(Self { label: label.into(), a, h, period })
    }

    pub fn periodicity_defect(&self) -> Result<f64> {
        let n = self.a.nrows();
        Ok(inf_norm(&(expm(&(&self.a * self.period))? - DMatrix::identity(n, n))))
    }
}

/// Standard form via `u = exp(A t) x`, i.e. `g = exp(-A t) h(t, exp(A t) x, eps)`.
pub fn to_standard_form(orig: &OriginalSystem) -> Result<StandardSystem> {
    let deviation = orig.periodicity_defect()?;
    if !(deviation <= PERIODICITY_TOL) {
        return Err(Error::NotPeriodic { deviation });
    }
    StandardSystem::transformed(orig.label.clone(), orig.period, orig.a.clone(), orig.h.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const VDP_AMP: &str = "x1*sin(t)^2 - x1^3*cos(t)^2*sin(t)^2";
    const NONSMOOTH: &str = "x1*sin(t)^2*(1 - x1*abs(cos(t)))";

    fn sys(src: &str) -> StandardSystem {
        StandardSystem::parse("t", 2.0 * PI, &[src]).unwrap()
    }

    #[test]
    fn autonomous_average() {
        let g0 = average(&sys("0.5*x1"), &[3.0]).unwrap();
        assert!((g0[0] - 3.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn vdp_amp_average_closed_form() {
        let s = sys(VDP_AMP);
        for a in [0.0, 0.5, 1.0, 2.0, 2.7] {
            let want = PI * a - PI * a.powi(3) / 4.0;
            assert!((average(&s, &[a]).unwrap()[0] - want).abs() < 1e-10, "{a}");
        }
    }

    #[test]
    fn nonsmooth_average_splits_at_roots() {
        let s = sys(NONSMOOTH);
        let scan = switching_roots(&s, &[1.0], 0.0).unwrap();
        assert_eq!(scan.roots.len(), 2);
        assert!((scan.roots[0] - PI / 2.0).abs() < 1e-14);
        assert!((scan.roots[1] - 1.5 * PI).abs() < 1e-14);
        let a = 3.0 * PI / 4.0;
        assert!(average(&s, &[a]).unwrap()[0].abs() < 1e-10);
        let b = 1.3;
        assert!((average(&s, &[b]).unwrap()[0] - (PI * b - 4.0 / 3.0 * b * b)).abs() < 1e-10);
    }

    #[test]
    fn jacobian_examples() {
        assert!((average_jacobian(&sys("0.5*x1"), &[1.0]).unwrap()[(0, 0)] - PI).abs() < 1e-8);
        let s = sys(VDP_AMP);
        assert!((average_jacobian(&s, &[2.0]).unwrap()[(0, 0)] + 2.0 * PI).abs() < 1e-5);
        assert!((average_jacobian(&s, &[0.0]).unwrap()[(0, 0)] - PI).abs() < 1e-5);
    }

    #[test]
    fn constant_field_g_eps() {
        let s = sys("1.5");
        for eps in [0.3, 0.01] {
            let g = g_eps(&s, &[0.2], eps, &IntegratorConfig::default()).unwrap();
            assert!((g[0] - 1.5 * 2.0 * PI).abs() < 1e-9);
        }
        assert!(g_eps(&s, &[0.2], 0.0, &IntegratorConfig::default()).is_err());
    }

    #[test]
    fn find_zero_examples() {
        let s = sys(VDP_AMP);
        assert!((find_zero(&s, &[1.5]).unwrap()[0] - 2.0).abs() < 1e-8);
        assert!(find_zero(&s, &[0.1]).unwrap()[0].abs() < 1e-8);
        let ns = sys(NONSMOOTH);
        assert!((find_zero(&ns, &[2.0]).unwrap()[0] - 3.0 * PI / 4.0).abs() < 1e-6);
    }

    #[test]
    fn bogolubov_examples() {
        let s = sys(VDP_AMP);
        let r = bogolubov_check(&s, &[2.0]).unwrap();
        assert!(r.residual < 1e-8 && r.passes());
        assert!((r.det + 2.0 * PI).abs() < 1e-5);
        assert!((r.eigenvalues[0].re + 2.0 * PI).abs() < 1e-5);

        let r = bogolubov_check(&s, &[0.0]).unwrap();
        assert!(r.is_zero && r.hyperbolic_zero && !r.asymptotically_stable);
        assert!((r.eigenvalues[0].re - PI).abs() < 1e-5);

        let r = bogolubov_check(&s, &[1.0]).unwrap();
        assert!((r.residual - 0.75 * PI).abs() < 1e-9);
        assert!(!r.is_zero && r.hyperbolic_zero && !r.passes());
    }

    #[test]
    fn standard_form_gate() {
        let id = OriginalSystem::parse("id", DMatrix::identity(1, 1), &["0"], 1.0).unwrap();
        assert!(matches!(to_standard_form(&id), Err(Error::NotPeriodic { .. })));

        let rot = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let harm = OriginalSystem::parse("h", rot, &["0", "(1 - u1^2)*u2"], 2.0 * PI).unwrap();
        assert!(to_standard_form(&harm).is_ok());

        let zero = OriginalSystem::parse("z", DMatrix::zeros(1, 1), &["sin(t)*u1 + eps"], 3.0).unwrap();
        let s = to_standard_form(&zero).unwrap();
        let direct = sys("sin(t)*x1 + eps");
        for t in [0.0, 0.7, 2.9] {
            assert_eq!(s.field(t, &[1.3], 0.2).unwrap(), direct.field(t, &[1.3], 0.2).unwrap());
        }
    }
}
