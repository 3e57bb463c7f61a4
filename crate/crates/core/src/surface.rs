//! Hypersurfaces inside a cone: polar graphs over the spherical domain,
//! spherical sectors, normal offsets and boundary data.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::cone::{ConeGeometry, LateralPoint, SphericalDomain};
use crate::error::{Error, Result};
use crate::geometry::{
    chart_jet, curvature, curvature_at, exp_pole, unit_normal_expansion, Chart, CurvaturePoint, Orientation,
};
use crate::quadrature::{BoundaryNode, QuadratureRule, Resolution};
use crate::taylor::Taylor;

/// Default tolerance for classifying a surface as meeting the cone
/// orthogonally.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-8;

/// Shape of the radial function over the parameter domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileFamily {
    Constant,
    /// `1 + eps cos(pi s / alpha)`.
    Axisym {
        eps: f64,
    },
    /// `1 + eps P_k(s) cos(k phi)` where `P_k` is a polynomial vanishing to
    /// order `k` at the pole with `P_k(alpha) = 1` and `P_k'(alpha) = 0`.
    /// For N = 2, `1 + eps sin(k pi u / (2 a))` with odd `k`.
    Bump {
        eps: f64,
        k: u32,
    },
    /// `1 + eps s^2 / (2 alpha)`; the radial derivative equals `eps` on the
    /// boundary.
    LinearViolation {
        eps: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub radius: f64,
    pub family: ProfileFamily,
}

impl RadialProfile {
    pub fn constant(radius: f64) -> Self {
        RadialProfile { radius, family: ProfileFamily::Constant }
    }

    pub fn axisym(radius: f64, eps: f64) -> Self {
        RadialProfile { radius, family: ProfileFamily::Axisym { eps } }
    }

    pub fn bump(radius: f64, eps: f64, k: u32) -> Self {
        RadialProfile { radius, family: ProfileFamily::Bump { eps, k } }
    }

    pub fn linear_violation(radius: f64, eps: f64) -> Self {
        RadialProfile { radius, family: ProfileFamily::LinearViolation { eps } }
    }

    pub fn tag(&self) -> &'static str {
        match self.family {
            ProfileFamily::Constant => "constant",
            ProfileFamily::Axisym { .. } => "axisym",
            ProfileFamily::Bump { .. } => "bump",
            ProfileFamily::LinearViolation { .. } => "linear_violation",
        }
    }

    pub fn amplitude(&self) -> f64 {
        match self.family {
            ProfileFamily::Constant => 0.0,
            ProfileFamily::Axisym { eps }
            | ProfileFamily::Bump { eps, .. }
            | ProfileFamily::LinearViolation { eps } => eps,
        }
    }

    pub fn with_amplitude(&self, eps: f64) -> Self {
        let family = match self.family {
            ProfileFamily::Constant => ProfileFamily::Constant,
            ProfileFamily::Axisym { .. } => ProfileFamily::Axisym { eps },
            ProfileFamily::Bump { k, .. } => ProfileFamily::Bump { eps, k },
            ProfileFamily::LinearViolation { .. } => ProfileFamily::LinearViolation { eps },
        };
        RadialProfile { radius: self.radius, family }
    }

    fn validate(&self, domain: &SphericalDomain) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::InvalidInput(format!("profile radius must be positive, got {}", self.radius)));
        }
        if let ProfileFamily::Bump { k, .. } = self.family {
            if domain.dim() == 2 && k % 2 == 0 {
                return Err(Error::InvalidInput("planar bump profiles need an odd k".into()));
            }
            if k == 0 {
                return Err(Error::InvalidInput("bump frequency k must be >= 1".into()));
            }
        }
        Ok(())
    }

    /// Value of `rho` as a Taylor expansion in the parameter variables.
    pub fn eval(&self, u: &[Taylor], domain: &SphericalDomain) -> Result<Taylor> {
        let order = u[0].order();
        let r = self.radius;
        let alpha = domain.reference_radius();
        let one = Taylor::constant(1.0, order);
        let shape = if u.len() == 1 {
            let x = u[0];
            match self.family {
                ProfileFamily::Constant => one,
                ProfileFamily::Axisym { eps } => (x * (PI / alpha)).cos() * eps + 1.0,
                ProfileFamily::Bump { eps, k } => (x * (k as f64 * PI / (2.0 * alpha))).sin() * eps + 1.0,
                ProfileFamily::LinearViolation { eps } => x * x * (eps / (2.0 * alpha)) + 1.0,
            }
        } else {
            let q = u[0] * u[0] + u[1] * u[1];
            match self.family {
                ProfileFamily::Constant => one,
                ProfileFamily::Axisym { eps } => (q * (PI * PI / (alpha * alpha))).cos_sqrt() * eps + 1.0,
                ProfileFamily::Bump { eps, k } => bump_shape(u, q, alpha, k) * eps + 1.0,
                ProfileFamily::LinearViolation { eps } => q * (eps / (2.0 * alpha)) + 1.0,
            }
        };
        Ok(shape * r)
    }
}

/// `s^k (1 - c s^2) cos(k phi)`, normalised to one at `s = alpha`, with `c`
/// chosen so the radial derivative vanishes there. A polynomial in `u`.
fn bump_shape(u: &[Taylor], q: Taylor, alpha: f64, k: u32) -> Taylor {
    let order = q.order();
    let kf = k as f64;
    let c = kf / ((kf + 2.0) * alpha * alpha);
    let norm = alpha.powi(k as i32) * 2.0 / (kf + 2.0);
    let (mut re, mut im) = (Taylor::constant(1.0, order), Taylor::constant(0.0, order));
    for _ in 0..k {
        let nre = re * u[0] - im * u[1];
        im = re * u[1] + im * u[0];
        re = nre;
    }
    re * (1.0 - q * c) / norm
}

/// A hypersurface whose parameter domain is the spherical domain of a cone.
pub trait Surface: Chart {
    fn cone(&self) -> &ConeGeometry;

    fn domain(&self) -> &SphericalDomain {
        &self.cone().domain
    }
}

/// Orthogonality and starshapedness measured on a fixed sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurfaceDiagnostics {
    /// `max |<nu, n>|` over boundary samples.
    pub orthogonality_residual: f64,
    /// `max |<x, n>|` over boundary samples.
    pub boundary_radial_defect: f64,
    /// `min <x, nu>` over interior and boundary samples.
    pub min_support: f64,
    pub tolerance: f64,
    pub orthogonal: bool,
    pub starshaped: bool,
}

/// `u -> rho(u) theta(u)` with `theta` the exponential map at the pole.
#[derive(Clone, Debug)]
pub struct PolarGraph {
    cone: Arc<ConeGeometry>,
    profile: RadialProfile,
    diagnostics: SurfaceDiagnostics,
}

impl PolarGraph {
    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn diagnostics(&self) -> &SurfaceDiagnostics {
        &self.diagnostics
    }

    pub fn cone_arc(&self) -> Arc<ConeGeometry> {
        self.cone.clone()
    }

    pub fn is_orthogonal(&self) -> bool {
        self.diagnostics.orthogonal
    }
}

impl Chart for PolarGraph {
    fn ambient_dim(&self) -> usize {
        self.cone.dim()
    }

    fn contains(&self, u: &[f64]) -> bool {
        self.cone.domain.contains_param(u)
    }

    fn expand(&self, u: &[f64], order: usize) -> Result<Vec<Taylor>> {
        let vars = Taylor::variables(u, order);
        let rho = self.profile.eval(&vars, &self.cone.domain)?;
        if !(rho.value() > 0.0) {
            return Err(Error::NonPositiveProfile { u: u.to_vec(), rho: rho.value() });
        }
        Ok(exp_pole(&vars).into_iter().map(|t| t * rho).collect())
    }
}

impl Surface for PolarGraph {
    fn cone(&self) -> &ConeGeometry {
        &self.cone
    }
}

/// Builds the polar graph of `profile` over the cone's domain and records
/// its orthogonality residual and starshapedness. Non-orthogonal graphs are
/// constructed but flagged.
pub fn build_polar_graph(cone: Arc<ConeGeometry>, profile: RadialProfile) -> Result<PolarGraph> {
    build_polar_graph_with_tolerance(cone, profile, ORTHOGONALITY_TOLERANCE)
}

pub fn build_polar_graph_with_tolerance(
    cone: Arc<ConeGeometry>,
    profile: RadialProfile,
    tolerance: f64,
) -> Result<PolarGraph> {
    profile.validate(&cone.domain)?;
    let placeholder = SurfaceDiagnostics {
        orthogonality_residual: f64::NAN,
        boundary_radial_defect: f64::NAN,
        min_support: f64::NAN,
        tolerance,
        orthogonal: false,
        starshaped: false,
    };
    let mut graph = PolarGraph { cone, profile, diagnostics: placeholder };
    graph.diagnostics = measure_diagnostics(&graph, tolerance)?;
    Ok(graph)
}

fn measure_diagnostics(surface: &dyn Surface, tolerance: f64) -> Result<SurfaceDiagnostics> {
    let rule = QuadratureRule::new(surface.domain(), Resolution::new(48, 12, 256))?;
    let mut ortho = 0.0f64;
    let mut radial = 0.0f64;
    let mut min_support = f64::INFINITY;
    for node in &rule.boundary {
        let bd = boundary_data_at(surface, node)?;
        ortho = ortho.max(bd.nu_dot_n.abs());
        radial = radial.max(bd.x_dot_n.abs());
        min_support = min_support.min(bd.support);
    }
    for node in &rule.interior {
        min_support = min_support.min(curvature(surface, &node.u)?.support);
    }
    Ok(SurfaceDiagnostics {
        orthogonality_residual: ortho,
        boundary_radial_defect: radial,
        min_support,
        tolerance,
        orthogonal: ortho < tolerance,
        starshaped: min_support > 0.0,
    })
}

/// `Gamma_{omega,R}`: the part of the sphere of radius `radius` inside the cone.
pub fn spherical_sector(cone: Arc<ConeGeometry>, radius: f64) -> Result<PolarGraph> {
    build_polar_graph(cone, RadialProfile::constant(radius))
}

/// The parallel surface `x + t nu(x)`.
#[derive(Clone)]
pub struct OffsetSurface {
    base: Arc<dyn Surface>,
    t: f64,
}

impl std::fmt::Debug for OffsetSurface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OffsetSurface").field("t", &self.t).finish_non_exhaustive()
    }
}

impl OffsetSurface {
    pub fn distance(&self) -> f64 {
        self.t
    }
}

impl Chart for OffsetSurface {
    fn ambient_dim(&self) -> usize {
        self.base.ambient_dim()
    }

    fn contains(&self, u: &[f64]) -> bool {
        self.base.contains(u)
    }

    fn expand(&self, u: &[f64], order: usize) -> Result<Vec<Taylor>> {
        let x = self.base.expand(u, order + 1)?;
        let nu = unit_normal_expansion(&x, &self.base.orientation_at(u));
        Ok(x.iter().zip(&nu).map(|(x, n)| x.truncate(order) + *n * self.t).collect())
    }

    fn orientation_at(&self, u: &[f64]) -> Orientation {
        self.base.orientation_at(u)
    }
}

impl Surface for OffsetSurface {
    fn cone(&self) -> &ConeGeometry {
        self.base.cone()
    }
}

/// Moves `surface` a distance `t` along its unit normal. Fails when some
/// sampled node reaches a focal point (`det(I + t S) <= 0`).
pub fn normal_offset(surface: Arc<dyn Surface>, t: f64) -> Result<OffsetSurface> {
    let rule = QuadratureRule::new(surface.domain(), Resolution::new(32, 12, 64))?;
    let nodes = rule.interior.iter().map(|n| n.u.clone()).chain(rule.boundary.iter().map(|n| n.u.clone()));
    for u in nodes {
        let p = curvature(&*surface, &u)?;
        let stretch = principal_curvatures(&p)?.iter().map(|k| 1.0 + t * k).fold(f64::INFINITY, f64::min);
        if !(stretch > 0.0) {
            return Err(Error::FocalViolation { t, area_weight: p.area_weight * stretch });
        }
    }
    Ok(OffsetSurface { base: surface, t })
}

/// Eigenvalues of the shape operator at a point, ascending.
pub fn principal_curvatures(p: &CurvaturePoint) -> Result<Vec<f64>> {
    let chol = p.g.clone().cholesky().ok_or(Error::SingularMetric { det: p.g.determinant() })?;
    let l_inv = chol.l().try_inverse().ok_or(Error::SingularMetric { det: p.g.determinant() })?;
    let form = &l_inv * &p.ii * l_inv.transpose();
    let sym = (&form + form.transpose()) * 0.5;
    let mut k: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    k.sort_by(f64::total_cmp);
    Ok(k)
}

/// Geometry of the surface and the cone at one boundary node.
#[derive(Clone, Debug)]
pub struct BoundaryData {
    pub x: DVector<f64>,
    pub nu: DVector<f64>,
    /// Unit vector tangent to the surface, normal to its boundary, outward.
    pub conormal: DVector<f64>,
    /// Exterior unit normal of the cone along the ray through the node.
    pub cone_normal: DVector<f64>,
    pub nu_dot_n: f64,
    pub x_dot_n: f64,
    /// `nu - <x, nu> x / |x|^2`.
    pub nu_t: DVector<f64>,
    pub support: f64,
    /// Arc-length element of the boundary per unit `phi` (1 for N = 2).
    pub length_weight: f64,
    pub lateral: LateralPoint,
    pub curvature: CurvaturePoint,
}

pub fn boundary_data_at(surface: &dyn Surface, node: &BoundaryNode) -> Result<BoundaryData> {
    let jet = chart_jet(surface, &node.u)?;
    let cp = curvature_at(&jet, &surface.orientation_at(&node.u))?;
    let nu = cp.nu.clone();
    let x = cp.x.clone();
    let outward = &jet.dx * DVector::from_column_slice(&node.outward);
    let mut conormal = &outward - &nu * outward.dot(&nu);
    let length_weight = if node.du_dphi.is_empty() {
        1.0
    } else {
        let tangent = &jet.dx * DVector::from_column_slice(&node.du_dphi);
        let len = tangent.norm();
        if !(len > 0.0) {
            return Err(Error::ChartDegenerate { u: node.u.clone(), gram: 0.0 });
        }
        let unit = tangent / len;
        conormal -= &unit * conormal.dot(&unit);
        len
    };
    let cn = conormal.norm();
    if !(cn > 0.0) {
        return Err(Error::ChartDegenerate { u: node.u.clone(), gram: 0.0 });
    }
    conormal /= cn;
    let cone = surface.cone();
    let cone_normal = cone.normal_at_param(LateralPoint { t: 1.0, phi: node.phi })?;
    let support = cp.support;
    let r2 = x.norm_squared();
    let nu_t = &nu - &x * (support / r2);
    Ok(BoundaryData {
        nu_dot_n: nu.dot(&cone_normal),
        x_dot_n: x.dot(&cone_normal),
        lateral: LateralPoint { t: r2.sqrt(), phi: node.phi },
        x,
        nu,
        conormal,
        cone_normal,
        nu_t,
        support,
        length_weight,
        curvature: cp,
    })
}
