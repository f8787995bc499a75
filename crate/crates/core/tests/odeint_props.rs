use std::f64::consts::{PI, TAU};

use basin_cert::averaging::{to_standard_form, OriginalSystem};
use basin_cert::numkit::DMatrix;
use basin_cert::odeint::{flow_map, integrate, IntegratorConfig};
use basin_cert::system::StandardSystem;
use proptest::prelude::*;

fn vdp() -> StandardSystem {
    StandardSystem::parse("vdp", TAU, &["x1*sin(t)^2 - x1^3*cos(t)^2*sin(t)^2"]).unwrap()
}

fn nonsmooth() -> StandardSystem {
    StandardSystem::parse("ns", TAU, &["x1*sin(t)^2*(1 - x1*abs(cos(t)))"]).unwrap()
}

fn planar() -> StandardSystem {
    StandardSystem::parse("planar", TAU, &["x2*cos(t) - 0.3*x1", "-x1*sin(t) + 0.2*x2^2*cos(2*t)"]).unwrap()
}

fn reference() -> IntegratorConfig {
    IntegratorConfig::with_tolerances(1e-13, 1e-15)
}

#[test]
fn closed_forms() {
    let growth = StandardSystem::parse("growth", TAU, &["x1"]).unwrap();
    let cfg = IntegratorConfig::default();
    let x = integrate(&growth, &[1.0], 0.1, 0.0, TAU, &cfg).unwrap();
    assert!((x.final_state()[0] - (0.2 * PI).exp()).abs() <= 1e-8);
    let y = flow_map(&growth, &[2.0], 0.05, &cfg).unwrap();
    assert!((y[0] - 2.0 * (0.1 * PI).exp()).abs() <= 1e-8);
    assert_eq!(flow_map(&vdp(), &[1.7], 0.0, &cfg).unwrap(), vec![1.7]);
}

#[test]
fn harmonic_with_zero_perturbation_is_constant() {
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let sys = to_standard_form(&OriginalSystem::parse("harmonic", a, &["0", "0"], TAU).unwrap()).unwrap();
    let traj = integrate(&sys, &[0.3, -1.2], 0.1, 0.0, TAU, &IntegratorConfig::default()).unwrap();
    for x in &traj.states {
        assert!((x[0] - 0.3).abs() < 1e-14 && (x[1] + 1.2).abs() < 1e-14);
    }
}

#[test]
fn vdp_flow_stays_near_the_averaged_zero() {
    let x = flow_map(&vdp(), &[2.0], 0.05, &IntegratorConfig::default()).unwrap()[0];
    let r = flow_map(&vdp(), &[2.0], 0.05, &reference()).unwrap()[0];
    assert!((x - 2.0).abs() < 0.05);
    assert!((x - r).abs() < 1e-9);
}

/// Global error is proportional to the tolerance for this controller, so
/// each halving buys a factor of about two (observed 1.9 to 2.0).
#[test]
fn tolerance_scaling() {
    let growth = StandardSystem::parse("growth", TAU, &["x1"]).unwrap();
    let exact = flow_map(&growth, &[1.0], 1.0, &reference()).unwrap()[0];
    let errors: Vec<f64> = (0..12)
        .map(|k| {
            let tol = 1e-4 * 0.5f64.powi(k);
            let cfg = IntegratorConfig { max_step: Some(TAU), ..IntegratorConfig::with_tolerances(tol, 1e-2 * tol) };
            (flow_map(&growth, &[1.0], 1.0, &cfg).unwrap()[0] - exact).abs()
        })
        .collect();
    for w in errors.windows(2) {
        assert!(w[1] < w[0] / 1.5, "{errors:?}");
    }
    let slope = (errors[0] / errors[11]).log2() / 11.0;
    assert!((slope - 1.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn event_residuals() {
    // Temporal switching at pi/2 and 3pi/2, and a state surface x1 = 1.6
    // crossed as the amplitude grows.
    let spatial = StandardSystem::parse("kinked", TAU, &["x1*sin(t)^2 + 0.5*abs(x1 - 1.6)"]).unwrap();
    for (sys, v) in [(nonsmooth(), 2.1), (spatial, 1.5)] {
        let traj = integrate(&sys, &[v], 0.1, 0.0, 2.0 * TAU, &IntegratorConfig::default()).unwrap();
        assert!(!traj.events.is_empty(), "{}", sys.label());
        for &te in &traj.events {
            let k = traj.times.iter().position(|&t| t == te).expect("event is a sample");
            let x = &traj.states[k];
            let scale = 1.0 + x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let sigma = (0..sys.switching_count())
                .map(|i| sys.eval_switching(i, te, x, 0.1).unwrap().abs())
                .fold(f64::INFINITY, f64::min);
            assert!(sigma <= 1e-10 * scale, "{}: sigma {sigma:e} at t = {te}", sys.label());
        }
    }
}

#[test]
fn csv_export() {
    let traj = integrate(&planar(), &[0.5, 0.25], 0.1, 0.0, 1.0, &IntegratorConfig::default()).unwrap();
    let csv = traj.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x1,x2"));
    assert_eq!(lines.next(), Some("0,0.5,0.25"));
    assert_eq!(csv.lines().count(), traj.times.len() + 1);
    assert!(!csv.contains('\r'));
    for line in csv.lines().skip(1) {
        let vals: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(vals.len(), 3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn semigroup(v in 0.5..2.8f64, eps in 0.01..0.2f64, which in 0usize..3) {
        let cfg = IntegratorConfig::default();
        let (sys, v0) = match which {
            0 => (vdp(), vec![v]),
            1 => (nonsmooth(), vec![v]),
            _ => (planar(), vec![v - 1.5, 0.3]),
        };
        let whole = integrate(&sys, &v0, eps, 0.0, TAU, &cfg).unwrap();
        let half = integrate(&sys, &v0, eps, 0.0, PI, &cfg).unwrap();
        let rest = integrate(&sys, half.final_state(), eps, PI, TAU, &cfg).unwrap();
        for (a, b) in whole.final_state().iter().zip(rest.final_state()) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn reverse_consistency(v in 0.5..2.8f64, eps in 0.01..0.2f64, planar_case in any::<bool>()) {
        let cfg = IntegratorConfig::default();
        let (sys, v0) = if planar_case { (planar(), vec![v - 1.5, 0.3]) } else { (vdp(), vec![v]) };
        let fwd = integrate(&sys, &v0, eps, 0.0, TAU, &cfg).unwrap();
        let back = integrate(&sys, fwd.final_state(), eps, TAU, 0.0, &cfg).unwrap();
        for (a, b) in back.final_state().iter().zip(&v0) {
            prop_assert!((a - b).abs() <= 1e-7);
        }
    }

    #[test]
    fn times_strictly_monotone(v in 0.5..2.8f64, eps in 0.01..0.2f64) {
        let traj = integrate(&nonsmooth(), &[v], eps, 0.0, TAU, &IntegratorConfig::default()).unwrap();
        prop_assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(traj.states.iter().flatten().all(|x| x.is_finite()));
    }
}
