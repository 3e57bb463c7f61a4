//! Second variation along `u = 1 - H <x, nu>`, the eigenvalue inequality
//! for stable surfaces, and the averaging and frame-energy identities.

use std::f64::consts::PI;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{curvature_at, orthonormal_frame, FieldJet, SurfaceExpansion};
use crate::quadrature::{compensated_sum, gauss_legendre, InteriorNode, QuadratureRule};
use crate::spectral::SpectralStudy;
use crate::surface::{boundary_data_at, Surface};
use crate::taylor::Taylor;

/// `max |H - h_bar|` below which a report counts as theorem-applicable.
pub const CMC_TOLERANCE: f64 = 1e-8;

/// Eigenvalue estimate with a relative uncertainty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EigenvalueBound {
    pub lambda1: f64,
    pub delta: f64,
}

impl EigenvalueBound {
    pub fn exact(lambda1: f64) -> Self {
        EigenvalueBound { lambda1, delta: 0.0 }
    }
}

impl From<&SpectralStudy> for EigenvalueBound {
    fn from(s: &SpectralStudy) -> Self {
        EigenvalueBound { lambda1: s.extrapolated, delta: s.delta }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportLabel {
    TheoremApplicable,
    Diagnostic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub label: ReportLabel,
    pub area: f64,
    pub h_bar: f64,
    pub cmc_deviation: f64,
    /// `int (1 - h_bar <x, nu>)`.
    pub volume_defect: f64,
    /// `-(N-1)(N-2) int (h_bar^2 - sigma_2) - int_{dGamma} II^Sigma(nu, nu)`.
    pub q_form: f64,
    /// `(N-1)(N-2) int (h_bar^2 - sigma_2)`.
    pub energy: f64,
    /// `int_{dGamma} II^Sigma(nu, nu) - II^Sigma(nu_T, nu_T)`.
    pub flatness_correction: f64,
    /// `-int_{dGamma} II^Sigma(nu_T, nu_T)`.
    pub rel_lhs: f64,
    /// `lambda_1 int |F - F0|^2` with `F = h_bar x - nu`.
    pub rel_rhs: f64,
    pub f_mean: Vec<f64>,
    /// `|int (F - F0)|`.
    pub f_mean_defect: f64,
    pub eigenvalue: EigenvalueBound,
    pub margin: f64,
    /// Margins at `lambda_1 (1 + delta)` and `lambda_1 (1 - delta)`.
    pub margin_interval: [f64; 2],
    /// `margin - (q_form + energy + flatness_correction - rel_rhs)`.
    pub chain_residual: f64,
}

struct NodeData {
    w: f64,
    h: f64,
    sigma2: f64,
    support: f64,
    /// Holds `x` until `h_bar` is known, then `h_bar x - nu`.
    f: DVector<f64>,
    nu: DVector<f64>,
}

pub fn stability_report(
    surface: &dyn Surface,
    rule: &QuadratureRule,
    eigenvalue: EigenvalueBound,
) -> Result<StabilityReport> {
    let n = surface.ambient_dim();
    if n < 3 {
        return Err(Error::UnsupportedDimension { required: "N >= 3", got: n });
    }
    let m = (n - 1) as f64;
    let mut nodes = rule
        .interior
        .iter()
        .map(|node| {
            let p = crate::geometry::curvature(surface, &node.u)?;
            Ok(NodeData {
                w: node.weight * p.area_weight,
                h: p.h,
                sigma2: p.sigma2()?,
                support: p.support,
                f: p.x,
                nu: p.nu,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let area = compensated_sum(nodes.iter().map(|d| d.w));
    let h_bar = area / compensated_sum(nodes.iter().map(|d| d.w * d.support));
    for d in &mut nodes {
        d.f = &d.f * h_bar - &d.nu;
    }
    let cmc_deviation = nodes.iter().map(|d| (d.h - h_bar).abs()).fold(0.0, f64::max);
    let volume_defect = compensated_sum(nodes.iter().map(|d| d.w * (1.0 - h_bar * d.support)));
    let energy = m * (m - 1.0) * compensated_sum(nodes.iter().map(|d| d.w * (h_bar * h_bar - d.sigma2)));
    let f_mean: Vec<f64> = (0..n).map(|k| compensated_sum(nodes.iter().map(|d| d.w * d.f[k])) / area).collect();
    let f0 = DVector::from_column_slice(&f_mean);
    let f_mean_defect = (0..n)
        .map(|k| compensated_sum(nodes.iter().map(|d| d.w * (d.f[k] - f0[k]))))
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    let spread = compensated_sum(nodes.iter().map(|d| d.w * (&d.f - &f0).norm_squared()));

    let cone = surface.cone();
    let pairs = rule
        .boundary
        .iter()
        .map(|node| {
            let b = boundary_data_at(surface, node)?;
            let w = node.weight * b.length_weight;
            let full = cone.ii_at_param(b.lateral, &b.nu, &b.nu)?.value;
            let tangential = cone.ii_at_param(b.lateral, &b.nu_t, &b.nu_t)?.value;
            Ok((w * full, w * tangential))
        })
        .collect::<Result<Vec<_>>>()?;
    let ii_full = compensated_sum(pairs.iter().map(|p| p.0));
    let ii_tangential = compensated_sum(pairs.iter().map(|p| p.1));

    let q_form = -energy - ii_full;
    let flatness_correction = ii_full - ii_tangential;
    let rel_lhs = -ii_tangential;
    let rel_rhs = eigenvalue.lambda1 * spread;
    let margin = rel_lhs - rel_rhs;
    let margin_at = |s: f64| rel_lhs - eigenvalue.lambda1 * (1.0 + s) * spread;
    let chain_residual = margin - (q_form + energy + flatness_correction - rel_rhs);
    Ok(StabilityReport {
        label: if cmc_deviation < CMC_TOLERANCE { ReportLabel::TheoremApplicable } else { ReportLabel::Diagnostic },
        area,
        h_bar,
        cmc_deviation,
        volume_defect,
        q_form,
        energy,
        flatness_correction,
        rel_lhs,
        rel_rhs,
        f_mean,
        f_mean_defect,
        eigenvalue,
        margin,
        margin_interval: [margin_at(eigenvalue.delta), margin_at(-eigenvalue.delta)],
        chain_residual,
    })
}

/// `|mean over S^{N-1} of <w, v>^2 - |w|^2 / N|` with a product rule of
/// `points` nodes per direction.
pub fn reilly_average_check(w: &[f64], points: usize) -> Result<f64> {
    let n = w.len();
    let points = points.max(2);
    let target = w.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let mean = match n {
        2 => {
            let vals = (0..points).map(|j| {
                let t = 2.0 * PI * j as f64 / points as f64;
                (w[0] * t.cos() + w[1] * t.sin()).powi(2)
            });
            compensated_sum(vals) / points as f64
        }
        3 => {
            let (zs, ws) = gauss_legendre(points);
            let mut vals = Vec::with_capacity(points * points);
            for (z, wz) in zs.iter().zip(&ws) {
                let r = (1.0 - z * z).sqrt();
                for j in 0..points {
                    let t = 2.0 * PI * j as f64 / points as f64;
                    let v = [r * t.cos(), r * t.sin(), *z];
                    let d = w[0] * v[0] + w[1] * v[1] + w[2] * v[2];
                    vals.push(wz * d * d / (2.0 * points as f64));
                }
            }
            compensated_sum(vals)
        }
        _ => return Err(Error::UnsupportedDimension { required: "N in {2, 3}", got: n }),
    };
    Ok((mean - target).abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrameEnergy {
    pub c: f64,
    /// `max |sum_j |D_{e_j}(c x - nu)|^2 - ((N-1)c^2 - 2c(N-1)H + tr S^2)|`.
    pub max_error: f64,
    /// Same left side against `(N-1)(N-2)(c^2 - sigma_2)`, reported when
    /// `H = c` on every sampled node.
    pub cmc_form_error: Option<f64>,
    pub nodes: usize,
}

pub fn frame_energy_check(surface: &dyn Surface, c: f64, nodes: &[InteriorNode]) -> Result<FrameEnergy> {
    let n = surface.ambient_dim();
    let m = (n - 1) as f64;
    let mut max_error = 0.0f64;
    let mut cmc_error = 0.0f64;
    let mut umbilic = n >= 3;
    for node in nodes {
        let e = SurfaceExpansion::new(surface, &node.u, 2)?;
        let field: Vec<Taylor> = e.x.iter().zip(&e.nu).map(|(x, nu)| x.truncate(1) * c - *nu).collect();
        let f = FieldJet::from_taylor(&field, e.dx.len());
        let jet = e.jet(&node.u)?;
        let p = curvature_at(&jet, &surface.orientation_at(&node.u))?;
        let frame = orthonormal_frame(&jet)?;
        let lhs: f64 = (0..e.dx.len()).map(|j| frame.derivative_along(j, &f).norm_squared()).sum();
        let rhs = m * c * c - 2.0 * c * m * p.h + p.tr_s2;
        max_error = max_error.max((lhs - rhs).abs());
        if umbilic {
            if (p.h - c).abs() < CMC_TOLERANCE {
                cmc_error = cmc_error.max((lhs - m * (m - 1.0) * (c * c - p.sigma2()?)).abs());
            } else {
                umbilic = false;
            }
        }
    }
    Ok(FrameEnergy { c, max_error, cmc_form_error: umbilic.then_some(cmc_error), nodes: nodes.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reilly_average_is_exact_for_small_rules() {
        assert_eq!(reilly_average_check(&[0.0, 0.0, 0.0], 8).unwrap(), 0.0);
        assert!(reilly_average_check(&[1.0, 0.0, 0.0], 8).unwrap() < 1e-14);
        assert!(reilly_average_check(&[0.3, -2.0], 5).unwrap() < 1e-14);
        assert!(reilly_average_check(&[1.0; 4], 8).is_err());
    }
}
