//! Interior and boundary quadrature over the parameter domain of a cone
//! surface, plus refinement tables.
//!
//! Interior nodes for `N = 3` are a tensor product of the trapezoid rule in
//! the polar angle `phi` and Gauss-Legendre in the scaled radius
//! `xi = s / b(phi)`; the pole carries no node. Boundary nodes use the
//! trapezoid rule in `phi`. For `N = 2` the interior is Gauss-Legendre on the
//! parameter interval and the boundary is the two end points.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::SphericalDomain;
use crate::error::{Error, Result};
use crate::geometry::{curvature, CurvaturePoint};
use crate::surface::{boundary_data_at, BoundaryData, Surface};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Neumaier-compensated sum; order-dependent only through the input order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Clone, Debug, PartialEq)]
pub struct InteriorNode {
    pub u: Vec<f64>,
    /// Includes the polar Jacobian `xi b(phi)^2`.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryNode {
    /// Boundary parameter; the ray angle for N = 2.
    pub phi: f64,
    pub u: Vec<f64>,
    /// `du/dphi` (empty for N = 2).
    pub du_dphi: Vec<f64>,
    /// Parameter direction leaving the domain.
    pub outward: Vec<f64>,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub n_phi: usize,
    pub n_s: usize,
    pub n_b: usize,
}

impl Resolution {
    pub const DEFAULT: Resolution = Resolution { n_phi: 256, n_s: 64, n_b: 512 };

    pub fn new(n_phi: usize, n_s: usize, n_b: usize) -> Self {
        Resolution { n_phi, n_s, n_b }
    }

    /// Doubles every count `level` times.
    pub fn refined(self, level: u32) -> Self {
        let f = 1usize << level;
        Resolution { n_phi: self.n_phi * f, n_s: self.n_s * f, n_b: self.n_b * f }
    }
}

impl Default for Resolution {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub level: u32,
    pub resolution: Resolution,
    pub interior: Vec<InteriorNode>,
    pub boundary: Vec<BoundaryNode>,
}

impl QuadratureRule {
    pub fn new(domain: &SphericalDomain, resolution: Resolution) -> Result<Self> {
        Self::at_level(domain, resolution, 0)
    }

    pub fn at_level(domain: &SphericalDomain, base: Resolution, level: u32) -> Result<Self> {
        let resolution = base.refined(level);
        let Resolution { n_phi, n_s, n_b } = resolution;
        if n_s == 0 || (domain.dim() == 3 && (n_phi == 0 || n_b == 0)) {
            return Err(Error::InvalidInput(format!("empty quadrature resolution {resolution:?}")));
        }
        let (xs, ws) = gauss_legendre(n_s);
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        match domain {
            SphericalDomain::Arc { half_width } => {
                let a = *half_width;
                for (x, w) in xs.iter().zip(&ws) {
                    interior.push(InteriorNode { u: vec![a * x], weight: a * w });
                }
                let (lo, hi) = domain.arc_angles().expect("arc");
                boundary.push(BoundaryNode { phi: lo, u: vec![-a], du_dphi: vec![], outward: vec![-1.0], weight: 1.0 });
                boundary.push(BoundaryNode { phi: hi, u: vec![a], du_dphi: vec![], outward: vec![1.0], weight: 1.0 });
            }
            _ => {
                let dphi = 2.0 * PI / n_phi as f64;
                for j in 0..n_phi {
                    let phi = j as f64 * dphi;
                    let b = domain.radius(phi);
                    let (sn, cs) = phi.sin_cos();
                    for (x, w) in xs.iter().zip(&ws) {
                        let xi = 0.5 * (x + 1.0);
                        let s = xi * b;
                        interior.push(InteriorNode { u: vec![s * cs, s * sn], weight: dphi * 0.5 * w * xi * b * b });
                    }
                }
                let db = 2.0 * PI / n_b as f64;
                for k in 0..n_b {
                    let phi = k as f64 * db;
                    let b = domain.radius(phi);
                    let bp = domain.radius_derivative(phi);
                    let (sn, cs) = phi.sin_cos();
                    boundary.push(BoundaryNode {
                        phi,
                        u: vec![b * cs, b * sn],
                        du_dphi: vec![bp * cs - b * sn, bp * sn + b * cs],
                        outward: vec![cs, sn],
                        weight: db,
                    });
                }
            }
        }
        Ok(QuadratureRule { level, resolution, interior, boundary })
    }

    /// Sum of `weight * f(node)` over interior nodes, evaluated in parallel
    /// and reduced in node order.
    pub fn sum_interior<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&InteriorNode) -> Result<f64> + Sync,
    {
        weighted_sum(&self.interior, |n| n.weight, f)
    }

    pub fn sum_boundary<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&BoundaryNode) -> Result<f64> + Sync,
    {
        weighted_sum(&self.boundary, |n| n.weight, f)
    }
}

fn weighted_sum<N, W, F>(nodes: &[N], weight: W, f: F) -> Result<f64>
where
    N: Sync,
    W: Fn(&N) -> f64 + Sync,
    F: Fn(&N) -> Result<f64> + Sync,
{
    let values: Vec<f64> = nodes
        .par_iter()
        .enumerate()
        .map(|(i, node)| {
            let v = f(node)?;
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand { node: i });
            }
            Ok(weight(node) * v)
        })
        .collect::<Result<_>>()?;
    Ok(compensated_sum(values))
}

/// `int_Gamma f dA` for an integrand of the pointwise curvature data.
pub fn integrate_surface<F>(surface: &dyn Surface, rule: &QuadratureRule, f: F) -> Result<f64>
where
    F: Fn(&CurvaturePoint) -> Result<f64> + Sync,
{
    rule.sum_interior(|n| {
        let p = curvature(surface, &n.u)?;
        Ok(f(&p)? * p.area_weight)
    })
}

/// `int_{dGamma} f ds`; for N = 2 a sum over the two end points.
pub fn integrate_boundary<F>(surface: &dyn Surface, rule: &QuadratureRule, f: F) -> Result<f64>
where
    F: Fn(&BoundaryData) -> Result<f64> + Sync,
{
    rule.sum_boundary(|n| {
        let b = boundary_data_at(surface, n)?;
        Ok(f(&b)? * b.length_weight)
    })
}

/// How the successive refinement differences behave.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum OrderEstimate {
    /// `log2` ratio of successive errors.
    Rate(f64),
    /// Errors already at the rounding floor; no rate is measurable.
    AtFloor,
    /// Fewer than three levels.
    Insufficient,
}

impl OrderEstimate {
    /// True when the observed rate is at least `order`, or when the
    /// sequence already sits on the rounding floor.
    pub fn at_least(&self, order: f64) -> bool {
        match *self {
            OrderEstimate::Rate(p) => p >= order,
            OrderEstimate::AtFloor => true,
            OrderEstimate::Insufficient => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub level: u32,
    pub value: f64,
    /// Error against the reference, or against the finest level when no
    /// reference is supplied.
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub reference: Option<f64>,
    pub order: OrderEstimate,
}

/// Absolute rounding floor used when estimating orders.
pub const ROUNDING_FLOOR: f64 = 1e-13;

impl ConvergenceTable {
    /// Builds a table against the finest level (self-refinement) or an
    /// exact `reference`.
    pub fn from_values(values: &[f64], reference: Option<f64>) -> Self {
        let target = reference.or_else(|| values.last().copied()).unwrap_or(0.0);
        let rows: Vec<ConvergenceRow> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| ConvergenceRow { level: i as u32, value: v, error: (v - target).abs() })
            .collect();
        let order = estimate_order(values, reference);
        ConvergenceTable { rows, reference, order }
    }

    pub fn finest(&self) -> Option<f64> {
        self.rows.last().map(|r| r.value)
    }

    /// Errors never grow from one level to the next, up to the floor.
    pub fn monotone(&self) -> bool {
        let scale = self.rows.iter().map(|r| r.value.abs()).fold(1.0, f64::max);
        self.rows.windows(2).all(|w| w[1].error <= w[0].error || w[1].error <= ROUNDING_FLOOR * scale)
    }
}

fn estimate_order(values: &[f64], reference: Option<f64>) -> OrderEstimate {
    if values.len() < 3 {
        return OrderEstimate::Insufficient;
    }
    let scale = values.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let floor = ROUNDING_FLOOR * scale;
    let n = values.len();
    let (e0, e1) = match reference {
        Some(r) => ((values[n - 2] - r).abs(), (values[n - 1] - r).abs()),
        None => ((values[n - 2] - values[n - 3]).abs(), (values[n - 1] - values[n - 2]).abs()),
    };
    if e0 <= floor {
        return OrderEstimate::AtFloor;
    }
    if e1 <= floor {
        // The finer error is below the floor: the rate is at least this.
        return OrderEstimate::Rate((e0 / floor).log2());
    }
    OrderEstimate::Rate((e0 / e1).log2())
}

/// Evaluates `quantity` on successive refinement levels.
pub fn convergence_table<F>(levels: &[QuadratureRule], reference: Option<f64>, quantity: F) -> Result<ConvergenceTable>
where
    F: Fn(&QuadratureRule) -> Result<f64>,
{
    if levels.len() < 2 {
        return Err(Error::InvalidInput("a convergence table needs at least two levels".into()));
    }
    let values = levels.iter().map(&quantity).collect::<Result<Vec<f64>>>()?;
    Ok(ConvergenceTable::from_values(&values, reference))
}
