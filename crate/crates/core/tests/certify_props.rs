use std::f64::consts::{PI, TAU};

use basin_cert::averaging::{to_standard_form, OriginalSystem};
use basin_cert::certify::{
    certify, certify_nonsmooth, contraction_factor, local_basin, step_map_ratio, AlphaGrid, Certificate,
    CertifyOptions, ConvexSet, LocalBasinOptions, Status,
};
use basin_cert::numkit::{DMatrix, WeightedNorm};
use basin_cert::system::StandardSystem;
use basin_cert::Error;
use proptest::prelude::*;

fn vdp() -> StandardSystem {
    StandardSystem::parse("vdp", TAU, &["x1*sin(t)^2 - x1^3*cos(t)^2*sin(t)^2"]).unwrap()
}

fn nonsmooth() -> StandardSystem {
    StandardSystem::parse("ns", TAU, &["x1*sin(t)^2*(1 - x1*abs(cos(t)))"]).unwrap()
}

fn alpha_grid() -> AlphaGrid {
    AlphaGrid { min: 0.01, max: 0.08, steps: 4 }
}

fn unit_box(lo: f64, hi: f64) -> ConvexSet {
    ConvexSet::new_box(vec![lo], vec![hi]).unwrap()
}

/// Certified results from several systems, sets and norms.
fn certified_cases() -> Vec<(StandardSystem, Certificate)> {
    let opts = CertifyOptions { alpha: alpha_grid(), grid_per_dim: 101, ..Default::default() };
    let mut out = Vec::new();
    for (lo, hi) in [(1.5, 2.5), (1.8, 2.2), (1.2, 2.9)] {
        out.push((vdp(), certify(&vdp(), &unit_box(lo, hi), &opts).unwrap()));
    }
    out.push((nonsmooth(), certify_nonsmooth(&nonsmooth(), &unit_box(2.0, 2.7), &CertifyOptions::default()).unwrap()));
    let planar = StandardSystem::parse("planar", 1.0, &["-3*x1 + 4*x2 + 0.2*x1^2", "-x1 - 3*x2"]).unwrap();
    out.push((planar.clone(), local_basin(&planar, &[0.0, 0.0], &LocalBasinOptions::default()).unwrap()));
    let rot = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let forced = to_standard_form(&OriginalSystem::parse("forced", rot, &["0", "-2*u2 + cos(t)"], TAU).unwrap()).unwrap();
    let ball = ConvexSet::new_ball(vec![0.0, 0.5], 0.5, None).unwrap();
    out.push((forced.clone(), certify(&forced, &ball, &CertifyOptions { grid_per_dim: 9, ..Default::default() }).unwrap()));
    for (_, c) in &out {
        assert!(c.is_certified(), "{c:?}");
    }
    out
}

#[test]
fn positive_and_negative_cases() {
    let opts = CertifyOptions { alpha: alpha_grid(), grid_per_dim: 101, ..Default::default() };
    let good = certify(&vdp(), &unit_box(1.5, 2.5), &opts).unwrap();
    assert_eq!(good.status, Status::Certified);
    assert!(good.norm.is_identity());
    assert!((0.82..=0.85).contains(&good.q_cert), "{}", good.q_cert);
    // Worst node is the left end, where J(1.5) = pi - 27 pi / 16.
    let endpoint = (1.0 + 0.08 * (PI - 27.0 * PI / 16.0)).abs();
    assert!((good.q_grid - endpoint).abs() < 1e-6);

    let bad = certify(&vdp(), &unit_box(0.5, 2.5), &opts).unwrap();
    assert_eq!(bad.status, Status::Falsified);
    assert!((bad.falsifying_point.unwrap()[0] - 0.5).abs() <= 0.05);
}

#[test]
fn soundness_sampling() {
    for (i, (sys, cert)) in certified_cases().into_iter().enumerate() {
        let check = step_map_ratio(&sys, &cert.set, &cert.norm, cert.alpha, 1000, i as u64).unwrap();
        assert_eq!(check.violations(cert.q_cert, 1e-7), 0, "{} max ratio {}", sys.label(), check.max_ratio());
    }
}

#[test]
fn convex_combination_factors() {
    for (i, (sys, cert)) in certified_cases().into_iter().enumerate() {
        for eps in [cert.alpha / 2.0, cert.alpha / 4.0] {
            let check = step_map_ratio(&sys, &cert.set, &cert.norm, eps, 500, 100 + i as u64).unwrap();
            assert_eq!(check.violations(cert.step_factor(eps), 1e-7), 0, "{} eps {eps}", sys.label());
        }
    }
}

#[test]
fn grid_refinement_is_covered_by_the_margin() {
    let w = WeightedNorm::identity(1);
    for (sys, set) in [(vdp(), unit_box(1.5, 2.5)), (vdp(), unit_box(1.1, 2.9)), (nonsmooth(), unit_box(2.0, 2.7))] {
        let mut per_dim = 9;
        while per_dim <= 288 {
            let coarse = contraction_factor(&sys, &set, 0.05, &w, per_dim).unwrap();
            let fine = contraction_factor(&sys, &set, 0.05, &w, 2 * per_dim).unwrap();
            assert!(coarse.q_grid - fine.q_grid <= coarse.margin, "{per_dim}");
            assert!(fine.q_grid <= coarse.q_cert + 1e-12, "{per_dim}: {} > {}", fine.q_grid, coarse.q_cert);
            per_dim *= 2;
        }
    }
}

#[test]
fn determinism() {
    let set = unit_box(1.5, 2.5);
    let opts = CertifyOptions { alpha: alpha_grid(), grid_per_dim: 101, ..Default::default() };
    let a = certify(&vdp(), &set, &opts).unwrap();
    let b = certify(&vdp(), &set, &opts).unwrap();
    let c = certify(&vdp(), &set, &CertifyOptions { parallel: false, ..opts }).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a, c);
}

#[test]
fn local_ball_against_a_dense_scan() {
    let cert = local_basin(&vdp(), &[2.0], &LocalBasinOptions::default()).unwrap();
    assert!(cert.norm.is_identity());
    let ConvexSet::Ball { center, radius, .. } = &cert.set else { panic!("expected a ball") };
    assert_eq!(center, &vec![2.0]);
    assert!(*radius >= 0.4, "radius {radius}");
    // J(a) = pi - 3 pi a^2 / 4 must stay negative over the whole ball.
    let n = 100_000;
    for k in 0..=n {
        let a = 2.0 - radius + 2.0 * radius * k as f64 / n as f64;
        assert!(PI - 0.75 * PI * a * a < 0.0, "J({a}) >= 0");
    }
    let err = local_basin(&vdp(), &[0.0], &LocalBasinOptions::default()).unwrap_err();
    assert!(matches!(err, Error::PreconditionRejected(_)));
}

fn box_strategy() -> impl Strategy<Value = (f64, usize, usize, usize)> {
    // A box [lo, lo + (n - 1) h] inside the stable region, and an aligned
    // sub-box given by node indices i..=j.
    (1.2..1.9f64, 11usize..60).prop_flat_map(|(lo, n)| (Just(lo), Just(n), 0..n - 2)).prop_flat_map(|(lo, n, i)| {
        (Just(lo), Just(n), Just(i), (i + 2)..n)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn nested_boxes_are_monotone((lo, n, i, j) in box_strategy(), alpha in 0.01..0.2f64) {
        let h = 0.02;
        let outer = unit_box(lo, lo + (n - 1) as f64 * h);
        let inner = unit_box(lo + i as f64 * h, lo + j as f64 * h);
        let w = WeightedNorm::identity(1);
        let qo = contraction_factor(&vdp(), &outer, alpha, &w, n).unwrap().q_grid;
        let qi = contraction_factor(&vdp(), &inner, alpha, &w, j - i + 1).unwrap().q_grid;
        // Aligned nodes agree up to rounding of lo + k h.
        prop_assert!(qi <= qo + 1e-12, "inner {qi} outer {qo}");
    }

    #[test]
    fn random_certified_boxes_are_sound(lo in 1.3..2.0f64, width in 0.05..1.0f64, seed in any::<u64>()) {
        let set = unit_box(lo, lo + width);
        let cert = certify(&vdp(), &set, &CertifyOptions { grid_per_dim: 41, ..Default::default() }).unwrap();
        // J < 0 on every such box, so each one certifies.
        prop_assert!(cert.is_certified(), "{:?}", cert);
        let check = step_map_ratio(&vdp(), &set, &cert.norm, cert.alpha, 200, seed).unwrap();
        prop_assert_eq!(check.violations(cert.q_cert, 1e-7), 0);
    }
}
