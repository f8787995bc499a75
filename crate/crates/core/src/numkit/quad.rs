use crate::error::{Error, Result};

/// Composite Simpson quadrature with per-subinterval refinement.
///
/// `split_points` break `[a, b]` into subintervals that are integrated
/// separately, so integrands with kinks at known times keep full order.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    /// Initial panel count per subinterval (even, at least 2).
    pub panels: usize,
    pub split_points: Vec<f64>,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { panels: 32, split_points: Vec::new(), rel_tol: 1e-10, max_panels: 1 << 20 }
    }
}

impl QuadratureSpec {
    pub fn with_splits(split_points: Vec<f64>) -> Self {
        Self { split_points, ..Self::default() }
    }

    /// Subinterval endpoints for `[a, b]`: split points strictly inside are
    /// kept, sorted and deduplicated.
    fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let mut pts = vec![a];
        let mut inner: Vec<f64> = self.split_points.iter().copied().filter(|&s| s > a && s < b).collect();
        inner.sort_by(f64::total_cmp);
        inner.dedup();
        pts.extend(inner);
        pts.push(b);
        pts
    }
}

/// Integrates a scalar function over `[a, b]`.
pub fn quad<F>(mut f: F, a: f64, b: f64, opts: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let out = quad_vec(
        |t, out: &mut [f64]| {
            out[0] = f(t)?;
            Ok(())
        },
        1,
        a,
        b,
        opts,
    )?;
    Ok(out[0])
}

/// Integrates a vector-valued function componentwise; every component must
/// meet the tolerance before a subinterval is accepted.
pub fn quad_vec<F>(mut f: F, dim: usize, a: f64, b: f64, opts: &QuadratureSpec) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]) -> Result<()>,
{
    if !(a < b) {
        return Err(Error::InvalidInput(format!("quadrature interval [{a}, {b}] is empty")));
    }
    let pts = opts.breakpoints(a, b);
    let mut total = vec![0.0; dim];
    for w in pts.windows(2) {
        let part = simpson_refined(&mut f, dim, w[0], w[1], opts)?;
        for (acc, p) in total.iter_mut().zip(part) {
            *acc += p;
        }
    }
    Ok(total)
}

/// Repeated halving of the panel width. Values at even nodes are reused, so
/// each refinement costs only the new midpoints.
fn simpson_refined<F>(f: &mut F, dim: usize, a: f64, b: f64, opts: &QuadratureSpec) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]) -> Result<()>,
{
    let mut n = opts.panels.max(2);
    n += n % 2;
    let width = b - a;
    let node = |k: usize, n: usize| if k == n { b } else { a + width * (k as f64) / (n as f64) };

    let mut buf = vec![0.0; dim];
    let mut eval = |t: f64, buf: &mut [f64]| -> Result<()> {
        f(t, buf)?;
        if buf.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite("quadrature integrand"))
        }
    };

    // ends: f(a) + f(b); interior split by parity of node index.
    let mut ends = vec![0.0; dim];
    eval(a, &mut buf)?;
    add(&mut ends, &buf, 1.0);
    eval(b, &mut buf)?;
    add(&mut ends, &buf, 1.0);

    let mut even = vec![0.0; dim];
    let mut odd = vec![0.0; dim];
    for k in 1..n {
        eval(node(k, n), &mut buf)?;
        add(if k % 2 == 0 { &mut even } else { &mut odd }, &buf, 1.0);
    }
    let mut estimate = simpson(&ends, &even, &odd, width, n);

    while 2 * n <= opts.max_panels {
        // Old nodes all become even nodes of the refined rule.
        for (e, o) in even.iter_mut().zip(&odd) {
            *e += *o;
        }
        odd.iter_mut().for_each(|v| *v = 0.0);
        let n2 = 2 * n;
        for k in (1..n2).step_by(2) {
            eval(node(k, n2), &mut buf)?;
            add(&mut odd, &buf, 1.0);
        }
        let refined = simpson(&ends, &even, &odd, width, n2);
        let converged = refined
            .iter()
            .zip(&estimate)
            .all(|(r, e)| (r - e).abs() <= opts.rel_tol * (1.0 + r.abs()));
        if converged {
            return Ok(refined.iter().zip(&estimate).map(|(r, e)| r + (r - e) / 15.0).collect());
        }
        estimate = refined;
        n = n2;
    }
    Err(Error::QuadratureNoConvergence { a, b })
}

fn add(acc: &mut [f64], v: &[f64], w: f64) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a += w * x;
    }
}

fn simpson(ends: &[f64], even: &[f64], odd: &[f64], width: f64, n: usize) -> Vec<f64> {
    ends.iter()
        .zip(even)
        .zip(odd)
        .map(|((e, ev), od)| width * (e + 2.0 * ev + 4.0 * od) / (3.0 * n as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sin_squared_over_period_is_pi() {
        let v = quad(|t| Ok(t.sin().powi(2)), 0.0, 2.0 * PI, &QuadratureSpec::default()).unwrap();
        assert!((v - PI).abs() < 1e-10, "{v}");
    }

    #[test]
    fn abs_cos_weighted_integral_with_splits() {
        let opts = QuadratureSpec::with_splits(vec![PI / 2.0, 1.5 * PI]);
        let v = quad(|t| Ok(t.cos().abs() * t.sin().powi(2)), 0.0, 2.0 * PI, &opts).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn constant_is_exact() {
        let v = quad(|_| Ok(1.0), 0.0, 1.0, &QuadratureSpec::default()).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let r = quad(|t| Ok(1.0 / (t - 0.5)), 0.0, 1.0, &QuadratureSpec { panels: 2, ..Default::default() });
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn panel_cap_reports_non_convergence() {
        let opts = QuadratureSpec { panels: 2, max_panels: 16, ..Default::default() };
        let r = quad(|t| Ok((200.0 * t).sin() * t.sqrt()), 0.0, 1.0, &opts);
        assert!(matches!(r, Err(Error::QuadratureNoConvergence { .. })));
    }

    #[test]
    fn split_points_outside_interval_are_ignored() {
        let opts = QuadratureSpec::with_splits(vec![-1.0, 0.0, 0.25, 0.25, 3.0]);
        let v = quad(|t| Ok(t * t), 0.0, 1.0, &opts).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
    }
}
