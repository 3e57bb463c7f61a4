use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use cone_minkowski::geometry::{PlaneChart, ScaledChart};
use cone_minkowski::spectral::*;
use cone_minkowski::*;

/// `f'(alpha)` for the regular solution of the associated Legendre equation
/// of order `m` on `(0, alpha)`.
fn legendre_slope(lambda: f64, m: u32, alpha: f64) -> f64 {
    let mf = m as f64;
    let t0 = 1e-4;
    let (mut f, mut df) =
        if m == 0 { (1.0, -0.5 * lambda * t0) } else { (t0.powi(m as i32), mf * t0.powi(m as i32 - 1)) };
    let rhs = |t: f64, f: f64, df: f64| -df / t.tan() - (lambda - mf * mf / (t.sin() * t.sin())) * f;
    let steps = 4000;
    let h = (alpha - t0) / steps as f64;
    let mut t = t0;
    for _ in 0..steps {
        let (k1f, k1d) = (df, rhs(t, f, df));
        let (k2f, k2d) = (df + 0.5 * h * k1d, rhs(t + 0.5 * h, f + 0.5 * h * k1f, df + 0.5 * h * k1d));
        let (k3f, k3d) = (df + 0.5 * h * k2d, rhs(t + 0.5 * h, f + 0.5 * h * k2f, df + 0.5 * h * k2d));
        let (k4f, k4d) = (df + h * k3d, rhs(t + h, f + h * k3f, df + h * k3d));
        f += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
        df += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        t += h;
    }
    df
}

/// First positive Neumann eigenvalue of the geodesic cap of radius `alpha`.
fn cap_eigenvalue(alpha: f64) -> f64 {
    let mut best = f64::INFINITY;
    for m in 0..3 {
        let mut lo = 0.05;
        let mut flo = legendre_slope(lo, m, alpha);
        let mut hi = lo;
        loop {
            hi += 0.05;
            let fhi = legendre_slope(hi, m, alpha);
            if flo * fhi <= 0.0 {
                break;
            }
            lo = hi;
            flo = fhi;
            if hi > 60.0 {
                break;
            }
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if legendre_slope(mid, m, alpha) * flo > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        best = best.min(0.5 * (lo + hi));
    }
    best
}

fn sector(alpha: f64, radius: f64) -> PolarGraph {
    let cone = Arc::new(ConeGeometry::new(SphericalDomain::cap(alpha).unwrap()).unwrap());
    spherical_sector(cone, radius).unwrap()
}

#[test]
fn oracle_reproduces_hemisphere() {
    assert!((cap_eigenvalue(FRAC_PI_2) - 2.0).abs() < 1e-8);
}

#[test]
fn flat_square_matches_separation_of_variables() {
    let mesh = rectangle_mesh(1.0, 1.0, 64).unwrap();
    let r = lambda1_neumann(&PlaneChart, &mesh).unwrap();
    assert!((r.lambda1 - PI * PI).abs() < 0.01 * PI * PI);
}

#[test]
fn hemisphere_converges_at_second_order() {
    let study = spectral_study(&sector(FRAC_PI_2, 1.0), &[8, 16, 32]).unwrap();
    assert!((study.finest().lambda1 - 2.0).abs() < 0.02);
    let p = study.observed_order.unwrap();
    assert!((p - 2.0).abs() < 0.25, "order {p}");
    assert!(study.is_cauchy());
    assert!((study.extrapolated - 2.0).abs() < 1e-3);
}

#[test]
fn convex_caps_match_legendre_oracle() {
    for alpha in [0.6, 1.0, 1.3, FRAC_PI_2] {
        let study = spectral_study(&sector(alpha, 1.0), &[8, 16, 32]).unwrap();
        let exact = cap_eigenvalue(alpha);
        assert!(((study.extrapolated - exact) / exact).abs() < 2e-3, "{alpha}: {} vs {exact}", study.extrapolated);
        assert!(study.finest().lambda1 >= 2.0 - 0.02);
    }
}

#[test]
fn eigenvalue_scales_with_inverse_square() {
    let mesh = polar_fan_mesh(&SphericalDomain::cap(1.2).unwrap(), 12).unwrap();
    let a = lambda1_neumann(&sector(1.2, 1.0), &mesh).unwrap().lambda1;
    let b = lambda1_neumann(&sector(1.2, 2.0), &mesh).unwrap().lambda1;
    let c = lambda1_neumann(&ScaledChart { inner: sector(1.2, 1.0), factor: 0.5 }, &mesh).unwrap().lambda1;
    assert!((b - a / 4.0).abs() < 1e-8 * a);
    assert!((c - 4.0 * a).abs() < 1e-8 * a);
}

#[test]
fn operators_and_eigenvector_structure() {
    let s = sector(1.0, 1.0);
    let mesh = polar_fan_mesh(s.domain(), 10).unwrap();
    let ops = assemble_operators(&s, &mesh).unwrap();
    let ones = vec![1.0; mesh.vertex_count()];
    assert!(ops.stiffness.mul_vec(&ones).iter().all(|v| v.abs() < 1e-12));
    let r = lambda1_from_operators(&ops, &mesh).unwrap();
    let m1 = ops.mass.mul_vec(&ones);
    let overlap: f64 = r.eigenvector.iter().zip(&m1).map(|(a, b)| a * b).sum();
    assert!(overlap.abs() < 1e-10);
    assert!(r.eigenvector.iter().any(|v| *v > 0.0) && r.eigenvector.iter().any(|v| *v < 0.0));
    assert!(r.residual < 1e-4 && r.lambda1 > 0.0);
}

#[test]
fn meshes_conform_to_the_domain() {
    let d = SphericalDomain::perturbed_cap(1.0, 0.1, 3).unwrap();
    let coarse = polar_fan_mesh(&d, rings_for_spacing(&d, 1.0 / 16.0)).unwrap();
    let fine = polar_fan_mesh(&d, 2 * rings_for_spacing(&d, 1.0 / 16.0)).unwrap();
    for m in [&coarse, &fine] {
        assert!(m.min_area() > 0.0);
        for &v in &m.boundary {
            let [x, y] = m.vertices[v];
            assert!((x.hypot(y) - d.radius(y.atan2(x))).abs() < 1e-10);
        }
    }
    let ratio = fine.vertex_count() as f64 / coarse.vertex_count() as f64;
    assert!((3.5..4.5).contains(&ratio));
    assert!(fine.h < 0.6 * coarse.h);
    assert!(matches!(
        polar_fan_mesh(&SphericalDomain::wedge(1.0).unwrap(), 4),
        Err(Error::UnsupportedDimension { .. })
    ));
}

#[test]
fn domain_eigenvalue_equals_unit_sector() {
    let d = SphericalDomain::cap(1.2).unwrap();
    let omega = domain_eigenvalue(&d, &[6, 12]).unwrap();
    let unit = spectral_study(&sector(1.2, 1.0), &[6, 12]).unwrap();
    assert!((omega.finest().lambda1 - unit.finest().lambda1).abs() < 1e-10);
}
