//! Cones over spherical domains: the lateral boundary, its exterior normal
//! and its second fundamental form.
//!
//! For `N = 3` the domain is star-shaped in geodesic polar coordinates around
//! the pole `e_3`, with boundary radius `b(phi)`. For `N = 2` it is an arc of
//! the unit circle centred on the pole `(0, 1)`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, chart_jet, curvature_at, Chart, ChartJet, Orientation};
use crate::taylor::Taylor;

/// A domain on the unit sphere `S^{N-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SphericalDomain {
    /// Geodesic disc of radius `alpha` around the pole (N = 3).
    Cap { alpha: f64 },
    /// `b(phi) = alpha + delta cos(k phi)` (N = 3).
    PerturbedCap { alpha: f64, delta: f64, k: u32 },
    /// Arc of total opening `2 half_width` centred on the pole (N = 2).
    Arc { half_width: f64 },
}

impl SphericalDomain {
    pub fn cap(alpha: f64) -> Result<Self> {
        let d = SphericalDomain::Cap { alpha };
        d.validate()?;
        Ok(d)
    }

    pub fn perturbed_cap(alpha: f64, delta: f64, k: u32) -> Result<Self> {
        let d = SphericalDomain::PerturbedCap { alpha, delta, k };
        d.validate()?;
        Ok(d)
    }

    /// Planar wedge of opening `angle` (N = 2).
    pub fn wedge(angle: f64) -> Result<Self> {
        let d = SphericalDomain::Arc { half_width: angle / 2.0 };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SphericalDomain::Cap { alpha } => {
                if !(alpha > 0.0 && alpha < PI) {
                    return Err(Error::InvalidInput(format!("cap angle {alpha} not in (0, pi)")));
                }
            }
            SphericalDomain::PerturbedCap { alpha, delta, k } => {
                if !(alpha - delta.abs() > 0.0 && alpha + delta.abs() < PI) {
                    return Err(Error::InvalidInput(format!(
                        "perturbed cap radius alpha = {alpha}, delta = {delta} leaves (0, pi)"
                    )));
                }
                if k == 0 {
                    return Err(Error::InvalidInput("perturbation frequency k must be >= 1".into()));
                }
            }
            SphericalDomain::Arc { half_width } => {
                if !(half_width > 0.0 && half_width < FRAC_PI_2) {
                    return Err(Error::InvalidInput(format!("wedge angle {} must lie in (0, pi)", 2.0 * half_width)));
                }
            }
        }
        Ok(())
    }

    /// Ambient dimension `N` of the cone.
    pub fn dim(&self) -> usize {
        match self {
            SphericalDomain::Arc { .. } => 2,
            _ => 3,
        }
    }

    /// Boundary radius `b(phi)` (N = 3) or the half width (N = 2).
    pub fn radius(&self, phi: f64) -> f64 {
        match *self {
            SphericalDomain::Cap { alpha } => alpha,
            SphericalDomain::PerturbedCap { alpha, delta, k } => alpha + delta * (k as f64 * phi).cos(),
            SphericalDomain::Arc { half_width } => half_width,
        }
    }

    pub fn radius_derivative(&self, phi: f64) -> f64 {
        match *self {
            SphericalDomain::PerturbedCap { delta, k, .. } => -delta * k as f64 * (k as f64 * phi).sin(),
            _ => 0.0,
        }
    }

    pub fn radius_taylor(&self, phi: Taylor) -> Taylor {
        match *self {
            SphericalDomain::PerturbedCap { alpha, delta, k } => (phi * k as f64).cos() * delta + alpha,
            _ => Taylor::constant(self.radius(phi.value()), phi.order()),
        }
    }

    /// The angle used to shape radial profiles: `alpha` for caps, the half
    /// width for arcs.
    pub fn reference_radius(&self) -> f64 {
        match *self {
            SphericalDomain::Cap { alpha } | SphericalDomain::PerturbedCap { alpha, .. } => alpha,
            SphericalDomain::Arc { half_width } => half_width,
        }
    }

    pub fn max_radius(&self) -> f64 {
        match *self {
            SphericalDomain::PerturbedCap { alpha, delta, .. } => alpha + delta.abs(),
            _ => self.reference_radius(),
        }
    }

    /// Whether the domain is strictly inside an open hemisphere around the
    /// pole (maximal geodesic radius below `pi/2`).
    pub fn in_half_space(&self) -> bool {
        self.max_radius() < FRAC_PI_2
    }

    /// Membership of a parameter point in the closed domain (exponential
    /// coordinates at the pole).
    pub fn contains_param(&self, u: &[f64]) -> bool {
        const SLACK: f64 = 1e-12;
        match self {
            SphericalDomain::Arc { half_width } => u.len() == 1 && u[0].abs() <= half_width * (1.0 + SLACK),
            _ => {
                if u.len() != 2 {
                    return false;
                }
                let s = u[0].hypot(u[1]);
                let phi = u[1].atan2(u[0]);
                s <= self.radius(phi) * (1.0 + SLACK)
            }
        }
    }

    /// Boundary curve point `gamma(phi)` on the unit sphere. For arcs `phi` is
    /// the polar angle of the ray.
    pub fn boundary_point(&self, phi: f64) -> DVector<f64> {
        let t = Taylor::constant(phi, 0);
        DVector::from_iterator(self.dim(), self.boundary_curve(t).iter().map(Taylor::value))
    }

    fn boundary_curve(&self, phi: Taylor) -> Vec<Taylor> {
        match self {
            SphericalDomain::Arc { .. } => vec![phi.cos(), phi.sin()],
            _ => {
                let b = self.radius_taylor(phi);
                let (c, s) = (phi.cos(), phi.sin());
                let (cb, sb) = (b.cos(), b.sin());
                vec![sb * c, sb * s, cb]
            }
        }
    }

    /// Polar angles of the two bounding rays (N = 2).
    pub fn arc_angles(&self) -> Option<(f64, f64)> {
        match *self {
            SphericalDomain::Arc { half_width } => Some((FRAC_PI_2 - half_width, FRAC_PI_2 + half_width)),
            _ => None,
        }
    }

    /// Direction leaving the domain across the boundary at `phi`, tangent to
    /// the sphere.
    fn outward_direction(&self, phi: f64) -> DVector<f64> {
        match self {
            SphericalDomain::Arc { .. } => {
                let sign = if phi > FRAC_PI_2 { 1.0 } else { -1.0 };
                DVector::from_vec(vec![-phi.sin() * sign, phi.cos() * sign])
            }
            _ => {
                let b = self.radius(phi);
                DVector::from_vec(vec![b.cos() * phi.cos(), b.cos() * phi.sin(), -b.sin()])
            }
        }
    }
}

/// Lateral boundary chart: `(t, phi) -> t gamma(phi)` for N = 3, or
/// `t -> t (cos phi, sin phi)` along one ray for N = 2.
#[derive(Clone, Debug)]
pub struct LateralChart {
    domain: SphericalDomain,
    /// Fixed ray angle for N = 2.
    ray: Option<f64>,
}

impl Chart for LateralChart {
    fn ambient_dim(&self) -> usize {
        self.domain.dim()
    }

    fn contains(&self, u: &[f64]) -> bool {
        u[0] > 0.0
    }

    fn expand(&self, u: &[f64], order: usize) -> Result<Vec<Taylor>> {
        let vars = Taylor::variables(u, order);
        let t = vars[0];
        let gamma = match self.ray {
            Some(phi) => self.domain.boundary_curve(Taylor::constant(phi, order)),
            None => self.domain.boundary_curve(vars[1]),
        };
        Ok(gamma.into_iter().map(|g| g * t).collect())
    }

    fn orientation_at(&self, u: &[f64]) -> Orientation {
        let phi = self.ray.unwrap_or_else(|| u[1]);
        Orientation::Toward(self.domain.outward_direction(phi).as_slice().to_vec())
    }
}

/// A point of the lateral boundary in cone coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LateralPoint {
    /// Distance from the vertex.
    pub t: f64,
    /// Boundary parameter (polar angle of the ray for N = 2).
    pub phi: f64,
}

/// Value of the cone's second fundamental form together with how far the
/// inputs were from the cone's tangent plane before projection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeForm {
    pub value: f64,
    pub projection_defect: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvexityProbe {
    pub min_eigenvalue: f64,
    pub convex: bool,
    pub half_space: bool,
}

/// The cone `{ t x : x in omega, t > 0 }`.
#[derive(Clone, Debug)]
pub struct ConeGeometry {
    pub domain: SphericalDomain,
}

/// Tolerance for locating points on the lateral boundary.
pub const LATERAL_TOLERANCE: f64 = 1e-8;

impl ConeGeometry {
    pub fn new(domain: SphericalDomain) -> Result<Self> {
        domain.validate()?;
        Ok(ConeGeometry { domain })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn lateral_chart(&self, phi: f64) -> (LateralChart, Vec<f64>) {
        match self.domain {
            SphericalDomain::Arc { .. } => (LateralChart { domain: self.domain.clone(), ray: Some(phi) }, vec![]),
            _ => (LateralChart { domain: self.domain.clone(), ray: None }, vec![phi]),
        }
    }

    pub fn lateral_jet(&self, p: LateralPoint) -> Result<(ChartJet, Orientation)> {
        let (chart, rest) = self.lateral_chart(p.phi);
        let mut u = vec![p.t];
        u.extend(rest);
        let jet = chart_jet(&chart, &u)?;
        let orientation = chart.orientation_at(&u);
        Ok((jet, orientation))
    }

    /// Finds the cone coordinates of a point on the lateral boundary.
    pub fn locate(&self, x: &DVector<f64>) -> Result<LateralPoint> {
        if x.len() != self.dim() {
            return Err(Error::InvalidInput(format!("point has dimension {}, cone has {}", x.len(), self.dim())));
        }
        let t = x.norm();
        if t < 1e-14 {
            return Err(Error::AtVertex);
        }
        let theta = x / t;
        match self.domain {
            SphericalDomain::Arc { .. } => {
                let (a, b) = self.domain.arc_angles().expect("arc");
                let psi = theta[1].atan2(theta[0]);
                let (da, db) = (angle_gap(psi, a), angle_gap(psi, b));
                let (phi, defect) = if da <= db { (a, da) } else { (b, db) };
                if defect > LATERAL_TOLERANCE {
                    return Err(Error::NotOnLateralBoundary { x: x.as_slice().to_vec(), defect });
                }
                Ok(LateralPoint { t, phi })
            }
            _ => {
                let s = theta[2].clamp(-1.0, 1.0).acos();
                let phi = theta[1].atan2(theta[0]);
                let defect = (s - self.domain.radius(phi)).abs();
                if defect > LATERAL_TOLERANCE {
                    return Err(Error::NotOnLateralBoundary { x: x.as_slice().to_vec(), defect });
                }
                Ok(LateralPoint { t, phi })
            }
        }
    }

    /// Exterior unit normal `n` at a lateral point given in cone coordinates.
    pub fn normal_at_param(&self, p: LateralPoint) -> Result<DVector<f64>> {
        let (jet, orientation) = self.lateral_jet(p)?;
        Ok(curvature_at(&jet, &orientation)?.nu)
    }

    /// Exterior unit normal to the cone at a lateral boundary point.
    pub fn cone_normal_at(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.normal_at_param(self.locate(x)?)
    }

    /// `II^Sigma(v, w)` at a lateral point given in cone coordinates. Inputs
    /// are projected onto the cone's tangent plane first.
    pub fn ii_at_param(&self, p: LateralPoint, v: &DVector<f64>, w: &DVector<f64>) -> Result<ConeForm> {
        let (jet, orientation) = self.lateral_jet(p)?;
        let cp = curvature_at(&jet, &orientation)?;
        let n = &cp.nu;
        let (vn, wn) = (v.dot(n), w.dot(n));
        let vp = v - n * vn;
        let wp = w - n * wn;
        let dxt = jet.dx.transpose();
        let g_inv = cp.g.clone().try_inverse().ok_or(Error::SingularMetric { det: cp.g.determinant() })?;
        let a = &g_inv * (&dxt * vp);
        let b = &g_inv * (&dxt * wp);
        let value = (a.transpose() * &cp.ii * b)[(0, 0)];
        Ok(ConeForm { value, projection_defect: vn.abs().max(wn.abs()) })
    }

    pub fn cone_ii_at(&self, x: &DVector<f64>, v: &DVector<f64>, w: &DVector<f64>) -> Result<ConeForm> {
        self.ii_at_param(self.locate(x)?, v, w)
    }

    /// Eigenvalues of `II^Sigma` on the tangent plane, in an orthonormal frame.
    pub fn principal_curvatures(&self, p: LateralPoint) -> Result<Vec<f64>> {
        let (jet, orientation) = self.lateral_jet(p)?;
        let cp = curvature_at(&jet, &orientation)?;
        let frame = geometry::orthonormal_frame(&jet)?;
        let e = &frame.coeffs;
        let form: DMatrix<f64> = e * &cp.ii * e.transpose();
        let sym = (&form + form.transpose()) * 0.5;
        Ok(SymmetricEigen::new(sym).eigenvalues.iter().copied().collect())
    }

    /// Samples `II^Sigma` over `density` boundary angles and three radii.
    pub fn convexity_probe(&self, density: usize) -> Result<ConvexityProbe> {
        let phis: Vec<f64> = match self.domain.arc_angles() {
            Some((a, b)) => vec![a, b],
            None => (0..density.max(1)).map(|j| 2.0 * PI * j as f64 / density.max(1) as f64).collect(),
        };
        let mut min_eigenvalue = f64::INFINITY;
        for &phi in &phis {
            for t in [0.5, 1.0, 2.0] {
                for k in self.principal_curvatures(LateralPoint { t, phi })? {
                    min_eigenvalue = min_eigenvalue.min(k);
                }
            }
        }
        Ok(ConvexityProbe { min_eigenvalue, convex: min_eigenvalue >= -1e-10, half_space: self.domain.in_half_space() })
    }
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}
