use std::sync::Arc;

use cone_minkowski::identities::sample_nodes;
use cone_minkowski::spectral::spectral_study;
use cone_minkowski::stability::*;
use cone_minkowski::*;
use proptest::prelude::*;

fn cap(alpha: f64) -> Arc<ConeGeometry> {
    Arc::new(ConeGeometry::new(SphericalDomain::cap(alpha).unwrap()).unwrap())
}

fn rule(s: &dyn Surface) -> QuadratureRule {
    QuadratureRule::new(s.domain(), Resolution::new(96, 24, 192)).unwrap()
}

#[test]
fn sectors_are_neutral_in_every_cap() {
    for alpha in [0.8, 1.2, 2.0, 2.6] {
        let s = spherical_sector(cap(alpha), 1.0).unwrap();
        let lambda = spectral_study(&s, &[6, 12, 24]).unwrap();
        let r = stability_report(&s, &rule(&s), EigenvalueBound::from(&lambda)).unwrap();
        assert_eq!(r.label, ReportLabel::TheoremApplicable);
        assert!(r.rel_lhs.abs() < 1e-9 && r.rel_rhs.abs() < 1e-9, "{r:?}");
        assert!(r.q_form.abs() < 1e-9 && r.margin.abs() < 1e-9);
        assert!((r.h_bar - 1.0).abs() < 1e-12);
        assert!(r.margin_interval.iter().all(|m| m.abs() < 1e-9));
    }
}

#[test]
fn perturbed_graph_gives_a_diagnostic_report() {
    let g = build_polar_graph(cap(1.2), RadialProfile::bump(1.0, 0.1, 2)).unwrap();
    let q = rule(&g);
    let r = stability_report(&g, &q, EigenvalueBound { lambda1: 2.9, delta: 0.01 }).unwrap();
    assert_eq!(r.label, ReportLabel::Diagnostic);
    assert!(r.margin.is_finite() && r.rel_rhs > 0.0);
    assert!(r.margin_interval[0] <= r.margin && r.margin <= r.margin_interval[1]);
    assert!(r.chain_residual.abs() < 1e-12);
    assert!(r.rel_lhs.abs() > 1e-3 && r.flatness_correction.abs() < 1e-9 * r.rel_lhs.abs());
    assert!(r.f_mean_defect < 1e-12);
    assert!(r.volume_defect.abs() < 1e-8);
}

#[test]
fn frame_energy_on_sector() {
    let s = spherical_sector(cap(1.1), 2.0).unwrap();
    let (nodes, _) = sample_nodes(&rule(&s), 40, 3);
    let at_h = frame_energy_check(&s, 0.5, &nodes).unwrap();
    assert!(at_h.max_error < 1e-10 && at_h.cmc_form_error.unwrap() < 1e-10);
    let zero = frame_energy_check(&s, 0.0, &nodes).unwrap();
    assert!(zero.max_error < 1e-9);
    assert!(zero.cmc_form_error.is_none());
}

#[test]
fn frame_energy_on_perturbed_graph() {
    let g = build_polar_graph(cap(1.2), RadialProfile::bump(1.0, 0.1, 3)).unwrap();
    let (nodes, _) = sample_nodes(&rule(&g), 200, 11);
    for c in [0.0, 1.0, 0.97] {
        assert!(frame_energy_check(&g, c, &nodes).unwrap().max_error < 1e-7);
    }
}

#[test]
fn planar_cones_are_rejected() {
    let wedge = Arc::new(ConeGeometry::new(SphericalDomain::wedge(1.0).unwrap()).unwrap());
    let s = spherical_sector(wedge, 1.0).unwrap();
    let err = stability_report(&s, &rule(&s), EigenvalueBound::exact(1.0)).unwrap_err();
    assert!(matches!(err, Error::UnsupportedDimension { .. }));
}

proptest! {
    #[test]
    fn reilly_average_matches_closed_form(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0) {
        prop_assert!(reilly_average_check(&[a, b, c], 6).unwrap() < 1e-12);
        prop_assert!(reilly_average_check(&[a, b], 4).unwrap() < 1e-12);
    }
}
