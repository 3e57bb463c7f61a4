use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_relative_eq;
use cone_minkowski::geometry::{PointChart, ScaledChart, SphereChart};
use cone_minkowski::identities::{divergence_theorem_check, TangentField};
use cone_minkowski::taylor::Taylor;
use cone_minkowski::*;
use proptest::prelude::*;

fn cap_cone(alpha: f64) -> Arc<ConeGeometry> {
    Arc::new(ConeGeometry::new(SphericalDomain::cap(alpha).unwrap()).unwrap())
}

/// Closed-form embedding of the bump graph, evaluated in plain floats.
fn bump_point(u: &[f64], alpha: f64, eps: f64, k: i32) -> Vec<f64> {
    let s = u[0].hypot(u[1]);
    let phi = u[1].atan2(u[0]);
    let kf = k as f64;
    let c = kf / ((kf + 2.0) * alpha * alpha);
    let shape = s.powi(k) * (1.0 - c * s * s) * (kf * phi).cos() / (alpha.powi(k) * 2.0 / (kf + 2.0));
    let rho = 1.0 + eps * shape;
    vec![rho * s.sin() * phi.cos(), rho * s.sin() * phi.sin(), rho * s.cos()]
}

fn axisym_point(u: &[f64], alpha: f64, eps: f64) -> Vec<f64> {
    let s = u[0].hypot(u[1]);
    let rho = 1.0 + eps * (PI * s / alpha).cos();
    let (sn, cs) = if s > 0.0 { (s.sin() * u[0] / s, s.sin() * u[1] / s) } else { (0.0, 0.0) };
    vec![rho * sn, rho * cs, rho * s.cos()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn taylor_curvature_matches_finite_differences(r in 0.05f64..1.0, phi in 0.0f64..(2.0 * PI)) {
        let alpha = 1.2;
        let graph = build_polar_graph(cap_cone(alpha), RadialProfile::bump(1.0, 0.1, 3)).unwrap();
        let reference = PointChart::new(3, move |u: &[f64]| bump_point(u, alpha, 0.1, 3)).with_step(1e-3);
        let u = [r * alpha * phi.cos(), r * alpha * phi.sin()];
        let a = curvature(&graph, &u).unwrap();
        let b = curvature(&reference, &u).unwrap();
        prop_assert!((&a.x - &b.x).norm() < 1e-14);
        prop_assert!((&a.nu - &b.nu).norm() < 1e-8);
        prop_assert!((a.h - b.h).abs() < 1e-6, "H {} vs {}", a.h, b.h);
        prop_assert!((a.sigma2().unwrap() - b.sigma2().unwrap()).abs() < 1e-6);
    }

    #[test]
    fn axisym_graph_matches_closed_form(r in 0.0f64..1.0, phi in 0.0f64..(2.0 * PI)) {
        let alpha = 2.0;
        let graph = build_polar_graph(cap_cone(alpha), RadialProfile::axisym(1.0, 0.1)).unwrap();
        let u = [r * alpha * phi.cos(), r * alpha * phi.sin()];
        let x = graph.expand(&u, 0).unwrap();
        let expect = axisym_point(&u, alpha, 0.1);
        for k in 0..3 {
            prop_assert!((x[k].value() - expect[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn curvature_scales_covariantly(scale in 0.2f64..5.0, r in 0.0f64..0.99, phi in 0.0f64..(2.0 * PI)) {
        let graph = build_polar_graph(cap_cone(1.2), RadialProfile::bump(1.0, 0.08, 2)).unwrap();
        let scaled = ScaledChart { inner: graph.clone(), factor: scale };
        let u = [r * 1.2 * phi.cos(), r * 1.2 * phi.sin()];
        let a = curvature(&graph, &u).unwrap();
        let b = curvature(&scaled, &u).unwrap();
        prop_assert!((b.h * scale - a.h).abs() < 1e-12 * a.h.abs().max(1.0));
        prop_assert!((b.sigma2().unwrap() * scale * scale - a.sigma2().unwrap()).abs() < 1e-11);
        prop_assert!((b.support - a.support * scale).abs() < 1e-12 * scale);
        prop_assert!((b.area_weight - a.area_weight * scale * scale).abs() < 1e-12 * scale * scale);
    }

    #[test]
    fn divergence_check_is_linear_in_the_field(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let graph = build_polar_graph(cap_cone(1.2), RadialProfile::linear_violation(1.0, 0.1)).unwrap();
        let rule = QuadratureRule::new(graph.domain(), Resolution::new(24, 8, 48)).unwrap();
        let combo = TangentField::Custom(Arc::new(move |e| {
            let f1 = e.radial_tangent_field();
            let f2 = e.minkowski_field();
            f1.iter().zip(&f2).map(|(p, q)| *p * a + *q * b).collect::<Vec<Taylor>>()
        }));
        let c = divergence_theorem_check(&graph, &rule, &combo).unwrap();
        let r1 = divergence_theorem_check(&graph, &rule, &TangentField::Radial).unwrap();
        let r2 = divergence_theorem_check(&graph, &rule, &TangentField::Minkowski).unwrap();
        prop_assert!((c.lhs - (a * r1.lhs + b * r2.lhs)).abs() < 1e-12);
        prop_assert!((c.rhs - (a * r1.rhs + b * r2.rhs)).abs() < 1e-12);
    }
}

#[test]
fn sphere_radius_two_has_known_curvature() {
    let s = SphereChart::new(3, 2.0).unwrap();
    for u in [[0.0, 0.0], [0.7, -0.4], [1.5, 1.5]] {
        let p = curvature(&s, &u).unwrap();
        assert_relative_eq!(p.h, 0.5, epsilon = 1e-13);
        assert_relative_eq!(p.sigma2().unwrap(), 0.25, epsilon = 1e-13);
        assert!(p.umbilicity_defect(0.5) < 1e-12);
        assert_relative_eq!(p.support, 2.0, epsilon = 1e-14);
    }
}

#[test]
fn circular_cone_form_vanishes_along_rays() {
    let cone = cap_cone(0.9);
    for phi in [0.0, 1.0, 4.0] {
        for t in [0.3, 1.0, 3.0] {
            let p = LateralPoint { t, phi };
            let (jet, _) = cone.lateral_jet(p).unwrap();
            let x = jet.x.clone();
            let tangent = jet.dx.column(1).into_owned();
            assert!(cone.ii_at_param(p, &x, &x).unwrap().value.abs() < 1e-12);
            assert!(cone.ii_at_param(p, &x, &tangent).unwrap().value.abs() < 1e-12);
            let unit = &tangent / tangent.norm();
            let k = cone.ii_at_param(p, &unit, &unit).unwrap().value;
            assert_relative_eq!(k, 0.9f64.cos() / 0.9f64.sin() / t, epsilon = 1e-12);
        }
    }
}
