//! Minkowski-type integral identities for surfaces in cones, their pointwise
//! ingredients, the offset expansion and the rigidity chain.

use std::sync::Arc;

use nalgebra::DVector;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{curvature_at, tangential_divergence, FieldJet, SurfaceExpansion};
use crate::quadrature::{
    compensated_sum, integrate_boundary, integrate_surface, BoundaryNode, ConvergenceTable, InteriorNode,
    QuadratureRule, Resolution,
};
use crate::surface::{boundary_data_at, normal_offset, BoundaryData, Surface};
use crate::taylor::Taylor;

/// Relative tolerance for `|<F, nu>|` before a field counts as non-tangent.
pub const TANGENCY_TOLERANCE: f64 = 1e-10;

/// User-supplied tangent field, evaluated on a surface expansion.
pub type FieldFn = Arc<dyn Fn(&SurfaceExpansion) -> Vec<Taylor> + Send + Sync>;

/// Tangent vector field over a surface, built from its Taylor geometry.
#[derive(Clone)]
pub enum TangentField {
    Zero,
    /// `x - <x, nu> nu`.
    Radial,
    /// `(N-1) H F1 - II(F1, .)`.
    Minkowski,
    Custom(FieldFn),
}

impl std::fmt::Debug for TangentField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl TangentField {
    pub fn name(&self) -> &'static str {
        match self {
            TangentField::Zero => "zero",
            TangentField::Radial => "F1",
            TangentField::Minkowski => "F2",
            TangentField::Custom(_) => "custom",
        }
    }

    pub fn evaluate(&self, e: &SurfaceExpansion) -> Vec<Taylor> {
        match self {
            TangentField::Zero => {
                let order = e.mean_curvature.order();
                vec![Taylor::constant(0.0, order); e.ambient_dim()]
            }
            TangentField::Radial => e.radial_tangent_field(),
            TangentField::Minkowski => e.minkowski_field(),
            TangentField::Custom(f) => f(e),
        }
    }
}

/// Lowest chart order that gives first derivatives of both fields.
const FIELD_ORDER: usize = 3;

fn field_at(surface: &dyn Surface, u: &[f64], field: &TangentField) -> Result<(SurfaceExpansion, FieldJet)> {
    let e = SurfaceExpansion::new(surface, u, FIELD_ORDER)?;
    let f = field.evaluate(&e);
    let jet = FieldJet::from_taylor(&f, e.dx.len());
    let nu = DVector::from_iterator(e.ambient_dim(), e.nu.iter().map(Taylor::value));
    let normal_component = jet.value.dot(&nu);
    if normal_component.abs() > TANGENCY_TOLERANCE * jet.value.norm().max(1.0) {
        return Err(Error::NonTangentField { normal_component });
    }
    Ok((e, jet))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`.
    pub residual: f64,
    pub level: u32,
    pub resolution: Resolution,
    pub convergence: Option<ConvergenceTable>,
}

impl IdentityReport {
    fn new(name: &str, lhs: f64, rhs: f64, rule: &QuadratureRule) -> Self {
        IdentityReport {
            name: name.to_string(),
            lhs,
            rhs,
            residual: lhs - rhs,
            level: rule.level,
            resolution: rule.resolution,
            convergence: None,
        }
    }
}

/// Evaluates `report` on every rule and attaches the residual table to the
/// finest report.
pub fn refinement_study<F>(rules: &[QuadratureRule], report: F) -> Result<Vec<IdentityReport>>
where
    F: Fn(&QuadratureRule) -> Result<IdentityReport>,
{
    let mut out = rules.iter().map(report).collect::<Result<Vec<_>>>()?;
    let residuals: Vec<f64> = out.iter().map(|r| r.residual).collect();
    if let Some(last) = out.last_mut() {
        last.convergence = Some(ConvergenceTable::from_values(&residuals, Some(0.0)));
    }
    Ok(out)
}

/// `int_Gamma (1 - H <x, nu>) = 0`.
pub fn mink1_report(surface: &dyn Surface, rule: &QuadratureRule) -> Result<IdentityReport> {
    let lhs = integrate_surface(surface, rule, |p| Ok(1.0 - p.h * p.support))?;
    Ok(IdentityReport::new("mink1", lhs, 0.0, rule))
}

/// `(1/(N-1)) int_{dGamma} <F1, conormal>`, what the first formula misses
/// when the surface is not orthogonal to the cone.
pub fn mink1_boundary_term(surface: &dyn Surface, rule: &QuadratureRule) -> Result<f64> {
    let m = (surface.ambient_dim() - 1) as f64;
    let flux = integrate_boundary(surface, rule, |b| Ok(radial_tangent(b).dot(&b.conormal)))?;
    Ok(flux / m)
}

fn radial_tangent(b: &BoundaryData) -> DVector<f64> {
    &b.x - &b.nu * b.support
}

/// The two forms of the boundary term of the second identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Mink2BoundaryTerm {
    /// `int_{dGamma} II^Sigma(nu_T, nu_T) <x, nu>`.
    pub with_nu_t: f64,
    /// `int_{dGamma} II^Sigma(nu, nu) <x, nu>`.
    pub with_nu: f64,
}

impl Mink2BoundaryTerm {
    pub fn relative_gap(&self) -> f64 {
        let scale = self.with_nu_t.abs().max(self.with_nu.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.with_nu_t - self.with_nu).abs() / scale
        }
    }
}

/// Boundary integrals of the cone's second fundamental form; valid for any N
/// (identically zero for planar wedges).
pub fn mink2_boundary_term(surface: &dyn Surface, rule: &QuadratureRule) -> Result<Mink2BoundaryTerm> {
    let cone = surface.cone();
    let pairs: Vec<(f64, f64)> = rule
        .boundary
        .iter()
        .map(|n| {
            let b = boundary_data_at(surface, n)?;
            let t = cone.ii_at_param(b.lateral, &b.nu_t, &b.nu_t)?.value;
            let v = cone.ii_at_param(b.lateral, &b.nu, &b.nu)?.value;
            let w = n.weight * b.length_weight * b.support;
            Ok((w * t, w * v))
        })
        .collect::<Result<_>>()?;
    Ok(Mink2BoundaryTerm {
        with_nu_t: compensated_sum(pairs.iter().map(|p| p.0)),
        with_nu: compensated_sum(pairs.iter().map(|p| p.1)),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mink2Report {
    #[serde(flatten)]
    pub identity: IdentityReport,
    /// Right-hand side computed with `II^Sigma(nu, nu)`.
    pub rhs_with_nu: f64,
    pub boundary: Mink2BoundaryTerm,
}

/// `int_Gamma (H - sigma_2 <x, nu>) = -1/((N-1)(N-2)) int_{dGamma}
/// II^Sigma(nu_T, nu_T) <x, nu>`.
pub fn mink2_report(surface: &dyn Surface, rule: &QuadratureRule) -> Result<Mink2Report> {
    let n = surface.ambient_dim();
    if n < 3 {
        return Err(Error::UnsupportedDimension { required: "N >= 3", got: n });
    }
    let c = ((n - 1) * (n - 2)) as f64;
    let lhs = integrate_surface(surface, rule, |p| Ok(p.h - p.sigma2()? * p.support))?;
    let boundary = mink2_boundary_term(surface, rule)?;
    Ok(Mink2Report {
        identity: IdentityReport::new("mink2", lhs, -boundary.with_nu_t / c, rule),
        rhs_with_nu: -boundary.with_nu / c,
        boundary,
    })
}

/// `int_Gamma div F = int_{dGamma} <F, conormal>` with the intrinsic conormal.
pub fn divergence_theorem_check(
    surface: &dyn Surface,
    rule: &QuadratureRule,
    field: &TangentField,
) -> Result<IdentityReport> {
    let lhs = rule.sum_interior(|node| {
        let (e, f) = field_at(surface, &node.u, field)?;
        let jet = e.jet(&node.u)?;
        let area = jet.metric().determinant().sqrt();
        Ok(tangential_divergence(&f, &jet)? * area)
    })?;
    let rhs = rule.sum_boundary(|node| {
        let (_, f) = field_at(surface, &node.u, field)?;
        let b = boundary_data_at(surface, node)?;
        Ok(f.value.dot(&b.conormal) * b.length_weight)
    })?;
    Ok(IdentityReport::new(&format!("divergence_{}", field.name()), lhs, rhs, rule))
}

/// Maximum pointwise errors of the divergence and flux identities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointwiseErrors {
    /// `|div F1 - (N-1)(1 - H <x, nu>)|`.
    pub div_f1: f64,
    /// `|div F2 - (N-1)(N-2)(H - sigma_2 <x, nu>)|`.
    pub div_f2: f64,
    /// `|<F2, n> + <x, nu> II^Sigma(nu, nu)|` on boundary nodes.
    pub boundary_flux: f64,
    pub interior_nodes: usize,
    pub boundary_nodes: usize,
}

/// Picks `count` interior and `count` boundary nodes of `rule` at random,
/// reproducibly for a given seed.
pub fn sample_nodes(rule: &QuadratureRule, count: usize, seed: u64) -> (Vec<InteriorNode>, Vec<BoundaryNode>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = |len: usize| {
        let mut idx = sample(&mut rng, len, count.min(len)).into_vec();
        idx.sort_unstable();
        idx
    };
    let interior = pick(rule.interior.len()).into_iter().map(|i| rule.interior[i].clone()).collect();
    let boundary = pick(rule.boundary.len()).into_iter().map(|i| rule.boundary[i].clone()).collect();
    (interior, boundary)
}

pub fn pointwise_identity_suite(
    surface: &dyn Surface,
    interior: &[InteriorNode],
    boundary: &[BoundaryNode],
) -> Result<PointwiseErrors> {
    let n = surface.ambient_dim();
    let m = (n - 1) as f64;
    let mut div_f1 = 0.0f64;
    let mut div_f2 = 0.0f64;
    for node in interior {
        let (e, f1) = field_at(surface, &node.u, &TangentField::Radial)?;
        let f2 = FieldJet::from_taylor(&e.minkowski_field(), e.dx.len());
        let jet = e.jet(&node.u)?;
        let p = curvature_at(&jet, &surface.orientation_at(&node.u))?;
        let expect_f1 = m * (1.0 - p.h * p.support);
        let expect_f2 = if n >= 3 { m * (m - 1.0) * (p.h - p.sigma2()? * p.support) } else { 0.0 };
        div_f1 = div_f1.max((tangential_divergence(&f1, &jet)? - expect_f1).abs());
        div_f2 = div_f2.max((tangential_divergence(&f2, &jet)? - expect_f2).abs());
    }
    let cone = surface.cone();
    let mut boundary_flux = 0.0f64;
    for node in boundary {
        let (_, f2) = field_at(surface, &node.u, &TangentField::Minkowski)?;
        let b = boundary_data_at(surface, node)?;
        let ii = cone.ii_at_param(b.lateral, &b.nu, &b.nu)?.value;
        boundary_flux = boundary_flux.max((f2.value.dot(&b.cone_normal) + b.support * ii).abs());
    }
    Ok(PointwiseErrors {
        div_f1,
        div_f2,
        boundary_flux,
        interior_nodes: interior.len(),
        boundary_nodes: boundary.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowReport {
    pub t_step: f64,
    /// `d/dt (N-1) int_{Gamma_t} (1 - H_t <x_t, nu_t>)` at `t = 0`.
    pub slope_lhs: f64,
    /// `(N-1)(N-2) int_Gamma (H - sigma_2 <x, nu>)`.
    pub slope_rhs: f64,
    /// `max |<x, d/dt conormal_t> + <x, nu> II^Sigma(nu, nu)|` on the boundary.
    pub claim_error: f64,
    /// `max |<x, nu> II^Sigma(nu, nu)|`, the size of the claimed quantity.
    pub claim_scale: f64,
}

impl FlowReport {
    pub fn slope_relative_error(&self) -> f64 {
        relative(self.slope_lhs - self.slope_rhs, self.slope_rhs)
    }

    pub fn claim_relative_error(&self) -> f64 {
        relative(self.claim_error, self.claim_scale)
    }
}

fn relative(diff: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        diff.abs()
    } else {
        diff.abs() / scale.abs()
    }
}

/// Compares the derivative of the first Minkowski integral along the normal
/// flow with the second identity's integrand, and checks the velocity of the
/// conormal. Derivatives are centered differences at `t_step` and
/// `t_step / 2`, combined by Richardson extrapolation.
pub fn flow_expansion_check(surface: Arc<dyn Surface>, rule: &QuadratureRule, t_step: f64) -> Result<FlowReport> {
    if !(t_step > 0.0) {
        return Err(Error::InvalidInput(format!("t_step must be positive, got {t_step}")));
    }
    let n = surface.ambient_dim();
    let m = (n - 1) as f64;
    let offsets = [-t_step, -t_step / 2.0, t_step / 2.0, t_step]
        .into_iter()
        .map(|t| normal_offset(surface.clone(), t))
        .collect::<Result<Vec<_>>>()?;

    let mink1 = |s: &dyn Surface| integrate_surface(s, rule, |p| Ok(m * (1.0 - p.h * p.support)));
    let f: Vec<f64> = offsets.iter().map(|o| mink1(o)).collect::<Result<_>>()?;
    let slope_lhs = richardson(f[3] - f[0], f[2] - f[1], t_step);
    let slope_rhs = if n >= 3 {
        m * (m - 1.0) * integrate_surface(&*surface, rule, |p| Ok(p.h - p.sigma2()? * p.support))?
    } else {
        0.0
    };

    let cone = surface.cone();
    let mut claim_error = 0.0f64;
    let mut claim_scale = 0.0f64;
    for node in &rule.boundary {
        let b = boundary_data_at(&*surface, node)?;
        let c: Vec<DVector<f64>> =
            offsets.iter().map(|o| boundary_data_at(o, node).map(|d| d.conormal)).collect::<Result<_>>()?;
        let far = b.x.dot(&(&c[3] - &c[0]));
        let near = b.x.dot(&(&c[2] - &c[1]));
        let velocity = richardson(far, near, t_step);
        let target = b.support * cone.ii_at_param(b.lateral, &b.nu, &b.nu)?.value;
        claim_error = claim_error.max((velocity + target).abs());
        claim_scale = claim_scale.max(target.abs());
    }
    Ok(FlowReport { t_step, slope_lhs, slope_rhs, claim_error, claim_scale })
}

/// Extrapolates centered differences `far = f(h) - f(-h)` and
/// `near = f(h/2) - f(-h/2)`.
fn richardson(far: f64, near: f64, h: f64) -> f64 {
    let d_far = far / (2.0 * h);
    let d_near = near / h;
    (4.0 * d_near - d_far) / 3.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RigidityReport {
    pub area: f64,
    pub support_integral: f64,
    /// `|Gamma| / int <x, nu>`.
    pub h_bar: f64,
    /// `max |H - h_bar|` over interior nodes.
    pub cmc_deviation: f64,
    /// `int_{dGamma} II^Sigma(nu_T, nu_T) <x, nu>`.
    pub sign_condition: f64,
    /// `int (h_bar^2 - sigma_2) <x, nu>`.
    pub umbilicity_defect_integral: f64,
    /// `max |S - h_bar Id|`.
    pub umbilicity_defect_pointwise: f64,
    pub min_support: f64,
    pub starshaped: bool,
    /// `int (h_bar - sigma_2 <x, nu>) - h_bar int (1 - h_bar <x, nu>)`.
    pub chain_rhs: f64,
    pub chain_residual: f64,
}

pub fn rigidity_report(surface: &dyn Surface, rule: &QuadratureRule) -> Result<RigidityReport> {
    let n = surface.ambient_dim();
    if n < 3 {
        return Err(Error::UnsupportedDimension { required: "N >= 3", got: n });
    }
    let points = rule
        .interior
        .iter()
        .map(|node| {
            let p = crate::geometry::curvature(surface, &node.u)?;
            let w = node.weight * p.area_weight;
            Ok((p.h, p.sigma2()?, p.support, w, p.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let area = compensated_sum(points.iter().map(|q| q.3));
    let support_integral = compensated_sum(points.iter().map(|q| q.3 * q.2));
    let sigma_support = compensated_sum(points.iter().map(|q| q.3 * q.1 * q.2));
    let h_bar = area / support_integral;
    let defect = compensated_sum(points.iter().map(|q| q.3 * (h_bar * h_bar - q.1) * q.2));
    let mut cmc_deviation = 0.0f64;
    let mut pointwise = 0.0f64;
    let mut min_support = f64::INFINITY;
    for q in &points {
        cmc_deviation = cmc_deviation.max((q.0 - h_bar).abs());
        pointwise = pointwise.max(q.4.umbilicity_defect(h_bar));
        min_support = min_support.min(q.2);
    }
    let boundary = mink2_boundary_term(surface, rule)?;
    for node in &rule.boundary {
        min_support = min_support.min(boundary_data_at(surface, node)?.support);
    }
    let chain_rhs = (h_bar * area - sigma_support) - h_bar * (area - h_bar * support_integral);
    Ok(RigidityReport {
        area,
        support_integral,
        h_bar,
        cmc_deviation,
        sign_condition: boundary.with_nu_t,
        umbilicity_defect_integral: defect,
        umbilicity_defect_pointwise: pointwise,
        min_support,
        starshaped: min_support > 0.0,
        chain_rhs,
        chain_residual: defect - chain_rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{ConeGeometry, SphericalDomain};
    use crate::surface::{build_polar_graph, spherical_sector, RadialProfile};

    fn cap(alpha: f64) -> Arc<ConeGeometry> {
        Arc::new(ConeGeometry::new(SphericalDomain::cap(alpha).unwrap()).unwrap())
    }

    fn coarse(s: &dyn Surface) -> QuadratureRule {
        QuadratureRule::new(s.domain(), Resolution::new(64, 16, 128)).unwrap()
    }

    #[test]
    fn sector_identities_vanish() {
        let s = spherical_sector(cap(1.2), 1.5).unwrap();
        let rule = coarse(&s);
        assert!(mink1_report(&s, &rule).unwrap().residual.abs() < 1e-13);
        let r = mink2_report(&s, &rule).unwrap();
        assert!(r.identity.lhs.abs() < 1e-12 && r.identity.rhs.abs() < 1e-12);
    }

    #[test]
    fn zero_field_balances() {
        let s = spherical_sector(cap(1.0), 1.0).unwrap();
        let r = divergence_theorem_check(&s, &coarse(&s), &TangentField::Zero).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
    }

    #[test]
    fn normal_field_is_rejected() {
        let s = spherical_sector(cap(1.0), 1.0).unwrap();
        let normal = TangentField::Custom(Arc::new(|e: &SurfaceExpansion| e.nu.clone()));
        let err = divergence_theorem_check(&s, &coarse(&s), &normal).unwrap_err();
        assert!(matches!(err, Error::NonTangentField { .. }));
    }

    #[test]
    fn chain_identity_is_algebraic() {
        let g = build_polar_graph(cap(1.2), RadialProfile::bump(1.0, 0.1, 2)).unwrap();
        let r = rigidity_report(&g, &coarse(&g)).unwrap();
        assert!(r.chain_residual.abs() < 1e-12, "{r:?}");
        assert!(r.cmc_deviation > 1e-3);
    }
}
