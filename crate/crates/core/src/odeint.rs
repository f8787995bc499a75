//! Adaptive Dormand-Prince 5(4) integration of `x' = eps * g(t, x, eps)`
//! with localization of switching-function sign changes.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::StandardSystem;

/// Integration tolerances and step limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// `None` picks a starting step from the local field scale.
    pub initial_step: Option<f64>,
    /// `None` means `T / 16`.
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, initial_step: None, max_step: None, max_steps: 100_000 }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self { rel_tol, abs_tol, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidInput("integrator tolerances must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidInput("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Accepted steps of one integration. Times are strictly monotone in the
/// direction of integration.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Times at which a switching function changed sign; each is also a sample.
    pub events: Vec<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(f64::NAN)
    }

    /// `t,x1,...,xn` header followed by one `%.17g` row per sample.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, Vec::len);
        let mut out = String::from("t");
        for i in 1..=n {
            let _ = write!(out, ",x{i}");
        }
        out.push('\n');
        for (t, x) in self.times.iter().zip(&self.states) {
            out.push_str(&format_g17(*t));
            for v in x {
                out.push(',');
                out.push_str(&format_g17(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// C's `%.17g`: 17 significant digits, trailing zeros removed, exponent
/// form below `1e-4` or from `1e17` on.
pub fn format_g17(x: f64) -> String {
    const P: i32 = 17;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("exponent digits");
    if exp < -4 || exp >= P {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Step-size controller (PI, Hairer's DOPRI5 defaults).
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MAX_SHRINK: f64 = 5.0;
const FAC_MAX_GROW: f64 = 0.1;

/// Maximum switching events per period before the motion is judged to be
/// sliding along a surface.
pub const CHATTER_EVENTS_PER_PERIOD: usize = 100;

struct Rhs<'a> {
    sys: &'a StandardSystem,
    eps: f64,
}

impl Rhs<'_> {
    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.sys.eval_field(t, x, self.eps, out)?;
        for v in out.iter_mut() {
            *v *= self.eps;
        }
        if out.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite("vector field"))
        }
    }
}

struct Step {
    y: Vec<f64>,
    k7: Vec<f64>,
    err: f64,
}

fn rk_step(rhs: &Rhs, t: f64, y: &[f64], k1: &[f64], h: f64, cfg: &IntegratorConfig) -> Result<Step> {
    let n = y.len();
    let mut tmp = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];

    for i in 0..n {
        tmp[i] = y[i] + h * A21 * k1[i];
    }
    rhs.eval(t + C2 * h, &tmp, &mut k2)?;
    for i in 0..n {
        tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    rhs.eval(t + C3 * h, &tmp, &mut k3)?;
    for i in 0..n {
        tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    rhs.eval(t + C4 * h, &tmp, &mut k4)?;
    for i in 0..n {
        tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    rhs.eval(t + C5 * h, &tmp, &mut k5)?;
    for i in 0..n {
        tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    rhs.eval(t + h, &tmp, &mut k6)?;
    let mut y_new = vec![0.0; n];
    for i in 0..n {
        y_new[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
    }
    if y_new.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("integrator state"));
    }
    rhs.eval(t + h, &y_new, &mut k7)?;

    let mut err: f64 = 0.0;
    for i in 0..n {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
        err = err.max((e / sc).abs());
    }
    Ok(Step { y: y_new, k7, err })
}

fn scaled_norm(v: &[f64], y: &[f64], cfg: &IntegratorConfig) -> f64 {
    v.iter()
        .zip(y)
        .map(|(a, b)| (a / (cfg.abs_tol + cfg.rel_tol * b.abs())).abs())
        .fold(0.0, f64::max)
}

/// Starting step from the local scales of the solution and the field.
fn initial_step(rhs: &Rhs, t: f64, y: &[f64], f0: &[f64], dir: f64, hmax: f64, cfg: &IntegratorConfig) -> Result<f64> {
    let d0 = scaled_norm(y, y, cfg);
    let d1 = scaled_norm(f0, y, cfg);
    let mut h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(hmax);
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + dir * h0 * b).collect();
    let mut f1 = vec![0.0; y.len()];
    rhs.eval(t + dir * h0, &y1, &mut f1)?;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = scaled_norm(&diff, y, cfg) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    Ok((100.0 * h0).min(h1).min(hmax))
}

fn sign_of(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

struct SwitchTracker {
    signs: Vec<f64>,
    buf: Vec<f64>,
}

impl SwitchTracker {
    fn new(sys: &StandardSystem, t: f64, y: &[f64], eps: f64) -> Result<Self> {
        let mut buf = vec![0.0; sys.switching_count()];
        sys.eval_all_switching(t, y, eps, &mut buf)?;
        Ok(Self { signs: buf.iter().map(|v| sign_of(*v)).collect(), buf })
    }

    fn crossed(&mut self, sys: &StandardSystem, t: f64, y: &[f64], eps: f64) -> Result<bool> {
        if self.signs.is_empty() {
            return Ok(false);
        }
        sys.eval_all_switching(t, y, eps, &mut self.buf)?;
        Ok(self
            .buf
            .iter()
            .zip(&self.signs)
            .any(|(v, s)| *s != 0.0 && sign_of(*v) != 0.0 && sign_of(*v) != *s))
    }

    fn update(&mut self, sys: &StandardSystem, t: f64, y: &[f64], eps: f64) -> Result<()> {
        if self.signs.is_empty() {
            return Ok(());
        }
        sys.eval_all_switching(t, y, eps, &mut self.buf)?;
        for (s, v) in self.signs.iter_mut().zip(&self.buf) {
            let sv = sign_of(*v);
            if sv != 0.0 {
                *s = sv;
            }
        }
        Ok(())
    }
}

/// Integrates from `t0` to `t1` (either direction) starting at `v`.
///
/// Whenever a switching function changes sign across a trial step, the
/// crossing time is bracketed by bisection on the step length to within
/// `1e-12 * T`; the step is cut at the far end of the bracket, a sample and
/// an event are recorded there, and integration restarts.
pub fn integrate(sys: &StandardSystem, v: &[f64], eps: f64, t0: f64, t1: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if v.len() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), found: v.len() });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("initial state"));
    }
    if !(t0.is_finite() && t1.is_finite()) || t0 == t1 {
        return Err(Error::InvalidInput(format!("integration interval [{t0}, {t1}] is empty")));
    }
    let period = sys.period();
    let dir = if t1 > t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let hmax = cfg.max_step.unwrap_or(period / 16.0).min(span);
    let event_tol = 1e-12 * period;
    let event_cap = CHATTER_EVENTS_PER_PERIOD * ((span / period).ceil() as usize).max(1);

    let rhs = Rhs { sys, eps };
    let n = v.len();
    let mut t = t0;
    let mut y = v.to_vec();
    let mut k1 = vec![0.0; n];
    rhs.eval(t, &y, &mut k1)?;
    let mut h = match cfg.initial_step {
        Some(h) if h > 0.0 => h.min(hmax),
        _ => initial_step(&rhs, t, &y, &k1, dir, hmax, cfg)?,
    };
    let mut tracker = SwitchTracker::new(sys, t, &y, eps)?;

    let mut traj = Trajectory { times: vec![t], states: vec![y.clone()], events: Vec::new() };
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    let mut steps = 0usize;

    loop {
        let remaining = (t1 - t) * dir;
        if remaining <= 0.0 {
            break;
        }
        if steps >= cfg.max_steps {
            return Err(Error::MaxSteps { t });
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t });
        }
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        steps += 1;
        let trial = rk_step(&rhs, t, &y, &k1, dir * h, cfg)?;
        let t_trial = if last { t1 } else { t + dir * h };

        let (step, t_new, event, hit_end) = if tracker.crossed(sys, t_trial, &trial.y, eps)? {
            // Bracket the first sign change: `lo` has none, `hi` has one.
            let (mut lo, mut hi) = (0.0, h);
            while hi - lo > event_tol {
                let mid = 0.5 * (lo + hi);
                let probe = rk_step(&rhs, t, &y, &k1, dir * mid, cfg)?;
                if tracker.crossed(sys, t + dir * mid, &probe.y, eps)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            if hi == h {
                (trial, t_trial, true, last)
            } else {
                (rk_step(&rhs, t, &y, &k1, dir * hi, cfg)?, t + dir * hi, true, false)
            }
        } else {
            (trial, t_trial, false, last)
        };

        let err = step.err;
        let fac11 = err.max(1e-300).powf(EXPO1);
        if err <= 1.0 {
            let mut fac = fac11 / facold.powf(BETA);
            fac = (fac / SAFETY).min(FAC_MAX_SHRINK).max(FAC_MAX_GROW);
            let mut h_new = (h / fac).min(hmax);
            if last_rejected {
                h_new = h_new.min(h);
            }
            facold = err.max(1e-4);
            last_rejected = false;

            t = t_new;
            y = step.y;
            traj.times.push(t);
            traj.states.push(y.clone());
            if event {
                traj.events.push(t);
                if traj.events.len() > event_cap {
                    return Err(Error::Chatter { events: traj.events.len(), t });
                }
                tracker.update(sys, t, &y, eps)?;
                rhs.eval(t, &y, &mut k1)?;
            } else {
                k1 = step.k7;
            }
            if hit_end {
                break;
            }
            h = h_new;
        } else {
            h /= FAC_MAX_SHRINK.min(fac11 / SAFETY);
            last_rejected = true;
        }
    }
    Ok(traj)
}

/// The time-`T` map `v -> x(T, v, eps)`.
pub fn flow_map(sys: &StandardSystem, v: &[f64], eps: f64, cfg: &IntegratorConfig) -> Result<Vec<f64>> {
    let traj = integrate(sys, v, eps, 0.0, sys.period(), cfg)?;
    Ok(traj.final_state().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn scalar(src: &str) -> StandardSystem {
        StandardSystem::parse("test", 2.0 * PI, &[src]).unwrap()
    }

    #[test]
    fn exponential_growth() {
        let traj = integrate(&scalar("x1"), &[1.0], 0.1, 0.0, 2.0 * PI, &IntegratorConfig::default()).unwrap();
        assert!((traj.final_state()[0] - (0.2 * PI).exp()).abs() < 1e-8);
        assert_eq!(traj.final_time(), 2.0 * PI);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn zero_eps_is_identity() {
        let sys = scalar("x1^3*sin(t) + 4");
        assert_eq!(flow_map(&sys, &[0.37], 0.0, &IntegratorConfig::default()).unwrap(), vec![0.37]);
    }

    #[test]
    fn flow_map_closed_form() {
        let out = flow_map(&scalar("x1"), &[2.0], 0.05, &IntegratorConfig::default()).unwrap();
        assert!((out[0] - 2.0 * (0.1 * PI).exp()).abs() < 1e-8);
    }

    #[test]
    fn events_at_switching_times() {
        let sys = scalar("x1*abs(cos(t))");
        let traj = integrate(&sys, &[1.0], 0.3, 0.0, 2.0 * PI, &IntegratorConfig::default()).unwrap();
        assert_eq!(traj.events.len(), 2);
        assert!((traj.events[0] - PI / 2.0).abs() < 1e-10);
        assert!((traj.events[1] - 1.5 * PI).abs() < 1e-10);
        // exact solution: exp(0.3 * int_0^{2pi} |cos|) = exp(1.2)
        assert!((traj.final_state()[0] - 1.2f64.exp()).abs() < 1e-8);
    }

    #[test]
    fn chatter_is_detected() {
        // sign(x1) pushes the state back into x1 = 0 from both sides.
        let sys = scalar("-sign(x1)");
        let r = integrate(&sys, &[0.01], 1.0, 0.0, 2.0 * PI, &IntegratorConfig::default());
        assert!(matches!(r, Err(Error::Chatter { .. }) | Err(Error::StepUnderflow { .. }) | Err(Error::MaxSteps { .. })), "{r:?}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let sys = scalar("x1");
        let cfg = IntegratorConfig::default();
        assert!(integrate(&sys, &[1.0], 0.1, 1.0, 1.0, &cfg).is_err());
        assert!(integrate(&sys, &[f64::NAN], 0.1, 0.0, 1.0, &cfg).is_err());
        assert!(integrate(&sys, &[1.0, 2.0], 0.1, 0.0, 1.0, &cfg).is_err());
        let bad = IntegratorConfig { max_steps: 0, ..cfg.clone() };
        assert!(integrate(&sys, &[1.0], 0.1, 0.0, 1.0, &bad).is_err());
        let capped = IntegratorConfig { max_steps: 3, ..cfg };
        assert!(matches!(integrate(&sys, &[1.0], 0.1, 0.0, 100.0, &capped), Err(Error::MaxSteps { .. })));
    }

    #[test]
    fn g17_formatting() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.1, "0.10000000000000001"),
            (-2.5, "-2.5"),
            (1e-5, "1.0000000000000001e-05"),
            (123456789.0, "123456789"),
            (1e17, "1e+17"),
            (std::f64::consts::PI, "3.1415926535897931"),
            (0.0001, "0.0001"),
            (1.0 / 3.0, "0.33333333333333331"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g17(x), want, "{x}");
        }
    }

    #[test]
    fn csv_layout() {
        let traj = Trajectory { times: vec![0.0, 0.5], states: vec![vec![1.0, 2.0], vec![3.0, 0.25]], events: vec![] };
        assert_eq!(traj.to_csv(), "t,x1,x2\n0,1,2\n0.5,3,0.25\n");
    }
}
