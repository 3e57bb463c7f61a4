//! Pointwise differential geometry of parametrized hypersurface patches.
//!
//! A [`Chart`] maps a parameter point `u` in `R^{N-1}` into `R^N` and can be
//! expanded to any order in Taylor arithmetic. From the order-2 expansion
//! ([`ChartJet`]) we obtain the metric, unit normal, second fundamental form,
//! mean curvature `H` and the second symmetric function `sigma2`
//! ([`CurvaturePoint`]). Higher expansions ([`SurfaceExpansion`]) carry the
//! same quantities as Taylor polynomials, so tangent fields built from them
//! can be differentiated exactly.
//!
//! Sign convention: `II(v, w) = <D_v nu, w>`, so an origin-centred sphere
//! with outward normal has `H = 1/R > 0`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::taylor::{self, Taylor};

/// Rule fixing the sign of the unit normal.
#[derive(Clone, Debug, PartialEq)]
pub enum Orientation {
    /// The cofactor normal of the parameter columns (cross product for N = 3).
    Parametric,
    Reversed,
    /// Exterior convention for starshaped graphs: `<x, nu> > 0`.
    Outward,
    /// Positive inner product with a reference direction.
    Toward(Vec<f64>),
}

impl Orientation {
    fn sign(&self, x: &[f64], raw_normal: &[f64]) -> f64 {
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
        match self {
            Orientation::Parametric => 1.0,
            Orientation::Reversed => -1.0,
            Orientation::Outward => {
                if dot(x, raw_normal) < 0.0 {
                    -1.0
                } else {
                    1.0
                }
            }
            Orientation::Toward(d) => {
                if dot(d, raw_normal) < 0.0 {
                    -1.0
                } else {
                    1.0
                }
            }
        }
    }
}

/// A smooth parametrization of an (N-1)-dimensional patch in `R^N`.
pub trait Chart: Send + Sync {
    fn ambient_dim(&self) -> usize;

    fn param_dim(&self) -> usize {
        self.ambient_dim() - 1
    }

    /// Admissible parameter points (closure of the parameter domain).
    fn contains(&self, u: &[f64]) -> bool;

    /// Taylor expansion of the embedding around `u`, one entry per ambient
    /// coordinate.
    fn expand(&self, u: &[f64], order: usize) -> Result<Vec<Taylor>>;

    fn orientation_at(&self, _u: &[f64]) -> Orientation {
        Orientation::Parametric
    }
}

impl<C: Chart + ?Sized> Chart for std::sync::Arc<C> {
    fn ambient_dim(&self) -> usize {
        (**self).ambient_dim()
    }
    fn param_dim(&self) -> usize {
        (**self).param_dim()
    }
    fn contains(&self, u: &[f64]) -> bool {
        (**self).contains(u)
    }
    fn expand(&self, u: &[f64], order: usize) -> Result<Vec<Taylor>> {
        (**self).expand(u, order)
    }
    fn orientation_at(&self, u: &[f64]) -> Orientation {
        (**self).orientation_at(u)
    }
}

/// Position and exact first/second parameter derivatives at one point.
#[derive(Clone, Debug)]
pub struct ChartJet {
    pub u: Vec<f64>,
    pub x: DVector<f64>,
    /// `N x (N-1)`; column `i` is `dx/du_i`.
    pub dx: DMatrix<f64>,
    /// `ddx[i][j] = d^2 x / du_i du_j`, symmetric in `(i, j)`.
    pub ddx: Vec<Vec<DVector<f64>>>,
}

impl ChartJet {
    pub fn ambient_dim(&self) -> usize {
        self.x.len()
    }

    pub fn param_dim(&self) -> usize {
        self.dx.ncols()
    }

    pub fn metric(&self) -> DMatrix<f64> {
        self.dx.transpose() * &self.dx
    }

    fn from_expansion(u: &[f64], x: &[Taylor]) -> Result<Self> {
        let n = x.len();
        let m = u.len();
        debug_assert!(x.iter().all(|t| t.order() >= 2));
        let pos = DVector::from_iterator(n, x.iter().map(Taylor::value));
        let mut dx = DMatrix::zeros(n, m);
        for (k, xk) in x.iter().enumerate() {
            for i in 0..m {
                let (a, b) = if i == 0 { (1, 0) } else { (0, 1) };
                dx[(k, i)] = xk.derivative(a, b);
            }
        }
        let mut ddx = vec![vec![DVector::zeros(n); m]; m];
        for i in 0..m {
            for j in i..m {
                let (a, b) = match (i, j) {
                    (0, 0) => (2, 0),
                    (0, 1) => (1, 1),
                    _ => (0, 2),
                };
                let v = DVector::from_iterator(n, x.iter().map(|t| t.derivative(a, b)));
                ddx[i][j] = v.clone();
                ddx[j][i] = v;
            }
        }
        let jet = ChartJet { u: u.to_vec(), x: pos, dx, ddx };
        jet.check_rank()?;
        Ok(jet)
    }

    fn check_rank(&self) -> Result<()> {
        let g = self.metric();
        let scale: f64 = (0..g.nrows()).map(|i| g[(i, i)]).product();
        let gram = g.determinant();
        if !(gram > 1e-24 * scale.max(f64::MIN_POSITIVE)) || !gram.is_finite() {
            return Err(Error::ChartDegenerate { u: self.u.clone(), gram });
        }
        Ok(())
    }
}

/// Evaluates the order-2 jet of `chart` at `u`.
pub fn chart_jet(chart: &dyn Chart, u: &[f64]) -> Result<ChartJet> {
    if u.len() != chart.param_dim() || !chart.contains(u) {
        return Err(Error::OutOfDomain { u: u.to_vec() });
    }
    let x = chart.expand(u, 2)?;
    ChartJet::from_expansion(u, &x)
}

/// Cofactor normal of the `N x (N-1)` column matrix; equals the cross
/// product for `N = 3` and `(T_y, -T_x)` for `N = 2`.
fn cofactor_normal(dx: &DMatrix<f64>) -> DVector<f64> {
    let n = dx.nrows();
    DVector::from_iterator(
        n,
        (0..n).map(|k| {
            let minor = dx.clone().remove_row(k);
            let d = if minor.nrows() == 0 { 1.0 } else { minor.determinant() };
            if k % 2 == 0 {
                d
            } else {
                -d
            }
        }),
    )
}

/// All pointwise geometry at a chart node.
#[derive(Clone, Debug)]
pub struct CurvaturePoint {
    pub x: DVector<f64>,
    pub nu: DVector<f64>,
    pub g: DMatrix<f64>,
    /// Second fundamental form in chart coordinates.
    pub ii: DMatrix<f64>,
    /// Shape operator `g^{-1} ii`.
    pub shape: DMatrix<f64>,
    pub h: f64,
    sigma2: Option<f64>,
    /// `tr(S^2)`, the squared norm of the second fundamental form.
    pub tr_s2: f64,
    pub area_weight: f64,
    /// `<x, nu>`.
    pub support: f64,
}

impl CurvaturePoint {
    pub fn ambient_dim(&self) -> usize {
        self.x.len()
    }

    /// Second elementary symmetric function of the principal curvatures.
    pub fn sigma2(&self) -> Result<f64> {
        self.sigma2.ok_or(Error::UnsupportedDimension { required: "N >= 3", got: self.ambient_dim() })
    }

    /// Frobenius norm of `S - c Id` in an orthonormal frame.
    pub fn umbilicity_defect(&self, c: f64) -> f64 {
        let m = self.shape.nrows();
        let d = &self.shape - DMatrix::<f64>::identity(m, m) * c;
        (&d * &d).trace().max(0.0).sqrt()
    }
}

pub fn curvature_at(jet: &ChartJet, orientation: &Orientation) -> Result<CurvaturePoint> {
    let n = jet.ambient_dim();
    let m = jet.param_dim();
    if n < 2 || m + 1 != n {
        return Err(Error::UnsupportedDimension { required: "N >= 2", got: n });
    }
    let g = jet.metric();
    let det = g.determinant();
    if !(det > 0.0) {
        return Err(Error::SingularMetric { det });
    }
    let g_inv = g.clone().try_inverse().ok_or(Error::SingularMetric { det })?;
    let raw = cofactor_normal(&jet.dx);
    let sign = orientation.sign(jet.x.as_slice(), raw.as_slice());
    let nu = raw.normalize() * sign;
    let mut ii = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            ii[(i, j)] = -jet.ddx[i][j].dot(&nu);
        }
    }
    let shape = &g_inv * &ii;
    let tr = shape.trace();
    let tr_s2 = (&shape * &shape).trace();
    let h = tr / m as f64;
    let sigma2 = (n >= 3).then(|| {
        let mf = m as f64;
        (mf * mf * h * h - tr_s2) / (mf * (mf - 1.0))
    });
    let support = jet.x.dot(&nu);
    Ok(CurvaturePoint { x: jet.x.clone(), nu, g, ii, shape, h, sigma2, tr_s2, area_weight: det.sqrt(), support })
}

/// Curvature at `u` using the chart's own orientation rule.
pub fn curvature(chart: &dyn Chart, u: &[f64]) -> Result<CurvaturePoint> {
    let jet = chart_jet(chart, u)?;
    curvature_at(&jet, &chart.orientation_at(u))
}

/// An ambient vector field sampled along a chart with its parameter partials.
#[derive(Clone, Debug)]
pub struct FieldJet {
    pub value: DVector<f64>,
    pub partials: Vec<DVector<f64>>,
}

impl FieldJet {
    pub fn from_taylor(field: &[Taylor], param_dim: usize) -> Self {
        let n = field.len();
        let value = DVector::from_iterator(n, field.iter().map(Taylor::value));
        let partials =
            (0..param_dim).map(|i| DVector::from_iterator(n, field.iter().map(|t| t.partial(i).value()))).collect();
        FieldJet { value, partials }
    }
}

/// `div_Gamma F = sum_ij g^{ij} <dF/du_i, dx/du_j>`.
pub fn tangential_divergence(field: &FieldJet, jet: &ChartJet) -> Result<f64> {
    let g = jet.metric();
    let det = g.determinant();
    let g_inv = g.try_inverse().ok_or(Error::SingularMetric { det })?;
    let m = jet.param_dim();
    let mut acc = 0.0;
    for i in 0..m {
        for j in 0..m {
            acc += g_inv[(i, j)] * field.partials[i].dot(&jet.dx.column(j));
        }
    }
    Ok(acc)
}

/// Gram-Schmidt frame `e_j = sum_i coeffs[(j, i)] dx/du_i`.
#[derive(Clone, Debug)]
pub struct OrthonormalFrame {
    pub e: Vec<DVector<f64>>,
    pub coeffs: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    dx: DMatrix<f64>,
}

pub fn orthonormal_frame(jet: &ChartJet) -> Result<OrthonormalFrame> {
    let m = jet.param_dim();
    let n = jet.ambient_dim();
    let mut e: Vec<DVector<f64>> = Vec::with_capacity(m);
    let mut coeffs = DMatrix::zeros(m, m);
    for j in 0..m {
        let mut v = jet.dx.column(j).into_owned();
        let mut c = DVector::zeros(m);
        c[j] = 1.0;
        for (k, ek) in e.iter().enumerate() {
            let p = ek.dot(&v);
            v -= ek * p;
            c -= coeffs.row(k).transpose() * p;
        }
        let norm = v.norm();
        if !(norm > 1e-12 * jet.dx.column(j).norm()) {
            return Err(Error::ChartDegenerate { u: jet.u.clone(), gram: 0.0 });
        }
        e.push(v / norm);
        coeffs.set_row(j, &(c / norm).transpose());
    }
    debug_assert_eq!(e.first().map_or(n, |v| v.len()), n);
    let g = jet.metric();
    let det = g.determinant();
    let g_inv = g.try_inverse().ok_or(Error::SingularMetric { det })?;
    Ok(OrthonormalFrame { e, coeffs, g_inv, dx: jet.dx.clone() })
}

impl OrthonormalFrame {
    /// Tangential gradient of a scalar with parameter partials `partials`.
    pub fn gradient(&self, partials: &[f64]) -> DVector<f64> {
        let m = partials.len();
        let mut out = DVector::zeros(self.dx.nrows());
        for i in 0..m {
            for j in 0..m {
                out += self.dx.column(i) * (self.g_inv[(i, j)] * partials[j]);
            }
        }
        out
    }

    /// Directional derivative `D_{e_j} F` of a field along the chart.
    pub fn derivative_along(&self, j: usize, field: &FieldJet) -> DVector<f64> {
        let mut out = DVector::zeros(field.value.len());
        for (i, p) in field.partials.iter().enumerate() {
            out += p * self.coeffs[(j, i)];
        }
        out
    }
}

/// Exponential map of the unit sphere `S^{N-1}` at the pole `e_N`.
///
/// For `N = 3`, `u` are Cartesian normal coordinates; for `N = 2`, `u` is the
/// signed angle from the pole `(0, 1)`, counter-clockwise.
pub fn exp_pole(u: &[Taylor]) -> Vec<Taylor> {
    match u.len() {
        1 => {
            let phi = u[0] + std::f64::consts::FRAC_PI_2;
            vec![phi.cos(), phi.sin()]
        }
        2 => {
            let q = u[0] * u[0] + u[1] * u[1];
            let s = q.sinc_sqrt();
            vec![s * u[0], s * u[1], q.cos_sqrt()]
        }
        m => panic!("exp_pole supports 1 or 2 parameters, got {m}"),
    }
}

/// Taylor-valued geometry of a chart around one point: metric, unit normal,
/// second fundamental form and mean curvature as polynomials in `u`.
///
/// Expanding the chart to order `k` yields the normal to order `k - 1` and
/// the curvature to order `k - 2`.
#[derive(Clone, Debug)]
pub struct SurfaceExpansion {
    pub x: Vec<Taylor>,
    /// `dx[i]` is the column `dx/du_i`.
    pub dx: Vec<Vec<Taylor>>,
    pub nu: Vec<Taylor>,
    pub g: Vec<Vec<Taylor>>,
    pub g_inv: Vec<Vec<Taylor>>,
    pub ii: Vec<Vec<Taylor>>,
    pub mean_curvature: Taylor,
}

/// Unit normal of an expanded embedding, one order below `x`.
pub fn unit_normal_expansion(x: &[Taylor], orientation: &Orientation) -> Vec<Taylor> {
    let n = x.len();
    let m = n - 1;
    let dx: Vec<Vec<Taylor>> = (0..m).map(|i| x.iter().map(|t| t.partial(i)).collect()).collect();
    let raw: Vec<Taylor> = (0..n)
        .map(|k| {
            let minor: Vec<Vec<Taylor>> =
                (0..n).filter(|&r| r != k).map(|r| (0..m).map(|c| dx[c][r]).collect()).collect();
            let d = taylor::det(&minor);
            if k % 2 == 0 {
                d
            } else {
                -d
            }
        })
        .collect();
    let x0: Vec<f64> = x.iter().map(Taylor::value).collect();
    let r0: Vec<f64> = raw.iter().map(Taylor::value).collect();
    let sign = orientation.sign(&x0, &r0);
    let inv_norm = taylor::dot(&raw, &raw).powf(-0.5) * sign;
    raw.iter().map(|r| *r * inv_norm).collect()
}

impl SurfaceExpansion {
    pub fn new(chart: &dyn Chart, u: &[f64], order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidInput("surface expansion needs order >= 2".into()));
        }
        if u.len() != chart.param_dim() || !chart.contains(u) {
            return Err(Error::OutOfDomain { u: u.to_vec() });
        }
        let x = chart.expand(u, order)?;
        let n = x.len();
        let m = n - 1;
        let dx: Vec<Vec<Taylor>> = (0..m).map(|i| x.iter().map(|t| t.partial(i)).collect()).collect();
        let g: Vec<Vec<Taylor>> = (0..m).map(|i| (0..m).map(|j| taylor::dot(&dx[i], &dx[j])).collect()).collect();
        let det = taylor::det(&g).value();
        if !(det > 0.0) {
            return Err(Error::ChartDegenerate { u: u.to_vec(), gram: det });
        }
        let g_inv = taylor::inverse(&g);
        let nu = unit_normal_expansion(&x, &chart.orientation_at(u));
        let ii: Vec<Vec<Taylor>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let dij: Vec<Taylor> = dx[j].iter().map(|t| t.partial(i)).collect();
                        -taylor::dot(&dij, &nu)
                    })
                    .collect()
            })
            .collect();
        let mut tr = Taylor::constant(0.0, order - 2);
        for i in 0..m {
            for j in 0..m {
                tr += g_inv[i][j] * ii[i][j];
            }
        }
        let mean_curvature = tr / m as f64;
        Ok(SurfaceExpansion { x, dx, nu, g, g_inv, ii, mean_curvature })
    }

    pub fn ambient_dim(&self) -> usize {
        self.x.len()
    }

    pub fn support(&self) -> Taylor {
        taylor::dot(&self.x, &self.nu)
    }

    /// `D_v nu` for a tangent field `v`, i.e. the shape operator applied to `v`.
    pub fn shape_apply(&self, v: &[Taylor]) -> Vec<Taylor> {
        let m = self.dx.len();
        let n = self.ambient_dim();
        let proj: Vec<Taylor> = (0..m).map(|i| taylor::dot(&self.dx[i], v)).collect();
        let coords: Vec<Taylor> =
            (0..m).map(|i| (0..m).map(|j| self.g_inv[i][j] * proj[j]).reduce(|a, b| a + b).expect("m >= 1")).collect();
        let dnu: Vec<Vec<Taylor>> = (0..m).map(|i| self.nu.iter().map(|t| t.partial(i)).collect()).collect();
        (0..n).map(|k| (0..m).map(|i| coords[i] * dnu[i][k]).reduce(|a, b| a + b).expect("m >= 1")).collect()
    }

    /// Tangential part of the position field, `x - <x, nu> nu`.
    pub fn radial_tangent_field(&self) -> Vec<Taylor> {
        let p = self.support();
        self.x.iter().zip(&self.nu).map(|(x, nu)| *x - p * *nu).collect()
    }

    /// `(N-1) H F1 - II(F1, .)`, the field whose divergence yields the
    /// second symmetric function.
    pub fn minkowski_field(&self) -> Vec<Taylor> {
        let f1 = self.radial_tangent_field();
        let s_f1 = self.shape_apply(&f1);
        let m = self.dx.len() as f64;
        f1.iter().zip(&s_f1).map(|(a, b)| self.mean_curvature * m * *a - *b).collect()
    }

    /// Order-2 jet at the expansion point.
    pub fn jet(&self, u: &[f64]) -> Result<ChartJet> {
        ChartJet::from_expansion(u, &self.x)
    }
}

pub type DomainFn = Box<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Chart backed only by a point evaluator; derivatives come from
/// Richardson-extrapolated central differences.
pub struct PointChart<F> {
    pub ambient_dim: usize,
    pub eval: F,
    pub step: f64,
    pub domain: DomainFn,
}

impl<F> PointChart<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(ambient_dim: usize, eval: F) -> Self {
        PointChart { ambient_dim, eval, step: 1e-3, domain: Box::new(|_| true) }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    fn shifted(&self, u: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
        let mut p = u.to_vec();
        for &(i, d) in moves {
            p[i] += d;
        }
        (self.eval)(&p)
    }

    fn first(&self, u: &[f64], i: usize, h: f64) -> Vec<f64> {
        let a = self.shifted(u, &[(i, h)]);
        let b = self.shifted(u, &[(i, -h)]);
        a.iter().zip(&b).map(|(a, b)| (a - b) / (2.0 * h)).collect()
    }

    fn second(&self, u: &[f64], i: usize, j: usize, h: f64) -> Vec<f64> {
        if i == j {
            let a = self.shifted(u, &[(i, h)]);
            let c = (self.eval)(u);
            let b = self.shifted(u, &[(i, -h)]);
            a.iter().zip(&b).zip(&c).map(|((a, b), c)| (a - 2.0 * c + b) / (h * h)).collect()
        } else {
            let pp = self.shifted(u, &[(i, h), (j, h)]);
            let pm = self.shifted(u, &[(i, h), (j, -h)]);
            let mp = self.shifted(u, &[(i, -h), (j, h)]);
            let mm = self.shifted(u, &[(i, -h), (j, -h)]);
            (0..pp.len()).map(|k| (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h)).collect()
        }
    }
}

fn richardson(coarse: Vec<f64>, fine: Vec<f64>) -> Vec<f64> {
    coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
}

impl<F> Chart for PointChart<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    fn contains(&self, u: &[f64]) -> bool {
        (self.domain)(u)
    }

    fn expand(&self, u: &[f64], order: usize) -> Result<Vec<Taylor>> {
        if order > 2 {
            return Err(Error::InvalidInput("finite-difference charts provide at most second derivatives".into()));
        }
        let m = u.len();
        let h = self.step;
        let value = (self.eval)(u);
        let n = value.len();
        let firsts: Vec<Vec<f64>> =
            (0..m).map(|i| richardson(self.first(u, i, h), self.first(u, i, h / 2.0))).collect();
        let mut out: Vec<Taylor> = value.iter().map(|&v| Taylor::constant(v, order)).collect();
        // Assemble the polynomial from scaled derivatives.
        for k in 0..n {
            let mut t = Taylor::constant(value[k], order);
            if order >= 1 {
                for (i, d) in firsts.iter().enumerate() {
                    t += Taylor::variable(i, 0.0, order) * d[k];
                }
            }
            out[k] = t;
        }
        if order >= 2 {
            for i in 0..m {
                for j in i..m {
                    let d = richardson(self.second(u, i, j, h), self.second(u, i, j, h / 2.0));
                    let factor = if i == j { 0.5 } else { 1.0 };
                    for k in 0..n {
                        let mono = Taylor::variable(i, 0.0, order) * Taylor::variable(j, 0.0, order);
                        out[k] += mono * (d[k] * factor);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Origin-centred sphere of radius `radius` in `R^N` (N = 2 or 3), in
/// exponential coordinates at the pole `e_N`.
#[derive(Clone, Debug)]
pub struct SphereChart {
    pub dim: usize,
    pub radius: f64,
}

impl SphereChart {
    pub fn new(dim: usize, radius: f64) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::UnsupportedDimension { required: "N in {2, 3}", got: dim });
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidInput(format!("sphere radius must be positive, got {radius}")));
        }
        Ok(SphereChart { dim, radius })
    }
}

impl Chart for SphereChart {
    fn ambient_dim(&self) -> usize {
        self.dim
    }
    fn contains(&self, u: &[f64]) -> bool {
        u.iter().map(|v| v * v).sum::<f64>().sqrt() < std::f64::consts::PI
    }
    fn expand(&self, u: &[f64], order: usize) -> Result<Vec<Taylor>> {
        let vars = Taylor::variables(u, order);
        Ok(exp_pole(&vars).into_iter().map(|t| t * self.radius).collect())
    }
    fn orientation_at(&self, _u: &[f64]) -> Orientation {
        Orientation::Outward
    }
}

/// The coordinate plane `u -> (u_0, u_1, 0)` in `R^3`.
#[derive(Clone, Debug, Default)]
pub struct PlaneChart;

impl Chart for PlaneChart {
    fn ambient_dim(&self) -> usize {
        3
    }
    fn contains(&self, _u: &[f64]) -> bool {
        true
    }
    fn expand(&self, u: &[f64], order: usize) -> Result<Vec<Taylor>> {
        let v = Taylor::variables(u, order);
        Ok(vec![v[0], v[1], Taylor::constant(0.0, order)])
    }
}

/// `u -> factor * x(u)`.
#[derive(Clone, Debug)]
pub struct ScaledChart<C> {
    pub inner: C,
    pub factor: f64,
}

impl<C: Chart> Chart for ScaledChart<C> {
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }
    fn contains(&self, u: &[f64]) -> bool {
        self.inner.contains(u)
    }
    fn expand(&self, u: &[f64], order: usize) -> Result<Vec<Taylor>> {
        Ok(self.inner.expand(u, order)?.into_iter().map(|t| t * self.factor).collect())
    }
    fn orientation_at(&self, u: &[f64]) -> Orientation {
        self.inner.orientation_at(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_pole_jet_is_isometric() {
        let chart = SphereChart::new(3, 1.0).unwrap();
        let jet = chart_jet(&chart, &[0.0, 0.0]).unwrap();
        assert_relative_eq!(jet.x[2], 1.0, epsilon = 1e-15);
        let g = jet.metric();
        assert_relative_eq!(g[(0, 0)], 1.0, epsilon = 1e-14);
        assert_relative_eq!(g[(1, 1)], 1.0, epsilon = 1e-14);
        assert!(g[(0, 1)].abs() < 1e-14);
    }

    #[test]
    fn plane_has_zero_second_derivatives() {
        let jet = chart_jet(&PlaneChart, &[0.3, -1.7]).unwrap();
        for row in &jet.ddx {
            for v in row {
                assert_eq!(v.norm(), 0.0);
            }
        }
        let p = curvature_at(&jet, &Orientation::Parametric).unwrap();
        assert_eq!(p.h, 0.0);
        assert_eq!(p.ii.norm(), 0.0);
    }

    #[test]
    fn sphere_of_radius_two_is_umbilic() {
        let chart = SphereChart::new(3, 2.0).unwrap();
        for u in [[0.0, 0.0], [0.4, -0.9], [1.5, 1.0]] {
            let p = curvature(&chart, &u).unwrap();
            assert_relative_eq!(p.h, 0.5, epsilon = 1e-13);
            assert_relative_eq!(p.sigma2().unwrap(), 0.25, epsilon = 1e-13);
            assert_relative_eq!(p.support, 2.0, epsilon = 1e-13);
            assert!(p.umbilicity_defect(p.h) < 1e-7);
        }
    }

    #[test]
    fn sigma2_unavailable_for_curves() {
        let chart = SphereChart::new(2, 1.0).unwrap();
        let p = curvature(&chart, &[0.2]).unwrap();
        assert_relative_eq!(p.h, 1.0, epsilon = 1e-14);
        assert!(matches!(p.sigma2(), Err(Error::UnsupportedDimension { .. })));
    }

    #[test]
    fn degenerate_chart_is_rejected() {
        let chart = PointChart::new(3, |u: &[f64]| vec![u[0], u[0], 0.0]);
        assert!(matches!(chart_jet(&chart, &[0.1, 0.2]), Err(Error::ChartDegenerate { .. })));
    }

    #[test]
    fn out_of_domain_is_rejected() {
        let chart = SphereChart::new(3, 1.0).unwrap();
        assert!(matches!(chart_jet(&chart, &[3.0, 1.0]), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn identity_and_constant_field_divergence() {
        let chart = SphereChart::new(3, 1.3).unwrap();
        let u = [0.3, 0.2];
        let e = SurfaceExpansion::new(&chart, &u, 3).unwrap();
        let jet = e.jet(&u).unwrap();
        let id = FieldJet::from_taylor(&e.x, 2);
        assert_relative_eq!(tangential_divergence(&id, &jet).unwrap(), 2.0, epsilon = 1e-13);
        let c: Vec<Taylor> = [1.0, -2.0, 0.5].iter().map(|&v| Taylor::constant(v, 3)).collect();
        let cf = FieldJet::from_taylor(&c, 2);
        assert_eq!(tangential_divergence(&cf, &jet).unwrap(), 0.0);
    }

    #[test]
    fn frame_is_orthonormal_and_gradient_projects() {
        let r = 1.7;
        let chart = SphereChart::new(3, r).unwrap();
        let u = [0.6, -0.25];
        let jet = chart_jet(&chart, &u).unwrap();
        let frame = orthonormal_frame(&jet).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let d = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(frame.e[i].dot(&frame.e[j]), d, epsilon = 1e-12);
            }
        }
        assert_eq!(frame.gradient(&[0.0, 0.0]).norm(), 0.0);
        // grad <x, c> = c - <c, nu> nu
        let c = DVector::from_vec(vec![0.3, -1.1, 0.8]);
        let partials: Vec<f64> = (0..2).map(|i| jet.dx.column(i).dot(&c)).collect();
        let grad = frame.gradient(&partials);
        let p = curvature_at(&jet, &Orientation::Outward).unwrap();
        let expect = &c - &p.nu * c.dot(&p.nu);
        assert!((grad - expect).norm() < 1e-9);
    }
}
