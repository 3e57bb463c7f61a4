//! First non-trivial Neumann eigenvalue of the Laplace-Beltrami operator by
//! piecewise-linear finite elements on the parameter domain.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::Serialize;

use crate::cone::SphericalDomain;
use crate::error::{Error, Result};
use crate::geometry::Chart;
use crate::surface::Surface;
use crate::taylor::Taylor;

pub const MAX_ITERATIONS: usize = 500;
pub const RAYLEIGH_TOLERANCE: f64 = 1e-12;

/// Triangulation of a planar parameter domain.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceMesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counter-clockwise in the parameter plane.
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<usize>,
    /// Longest edge in parameter space.
    pub h: f64,
}

impl SurfaceMesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    fn signed_area(&self, t: &[usize; 3]) -> f64 {
        let [a, b, c] = t.map(|i| self.vertices[i]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    }

    /// Smallest signed parameter area over all triangles.
    pub fn min_area(&self) -> f64 {
        self.triangles.iter().map(|t| self.signed_area(t)).fold(f64::INFINITY, f64::min)
    }

    fn finish(mut self) -> Result<Self> {
        let mut h = 0.0f64;
        for t in &self.triangles {
            for k in 0..3 {
                let (p, q) = (self.vertices[t[k]], self.vertices[t[(k + 1) % 3]]);
                h = h.max((p[0] - q[0]).hypot(p[1] - q[1]));
            }
            if !(self.signed_area(t) > 0.0) {
                return Err(Error::DegenerateMesh(format!("triangle {t:?} has non-positive area")));
            }
        }
        self.h = h;
        Ok(self)
    }
}

/// Polar fan over a spherical domain with `rings` rings: ring `i` has `6 i`
/// vertices at radius `(i / rings) b(phi)`; the pole is a vertex.
pub fn polar_fan_mesh(domain: &SphericalDomain, rings: usize) -> Result<SurfaceMesh> {
    if domain.dim() != 3 {
        return Err(Error::UnsupportedDimension { required: "N = 3", got: domain.dim() });
    }
    if rings == 0 {
        return Err(Error::DegenerateMesh("a polar fan needs at least one ring".into()));
    }
    let mut vertices = vec![[0.0, 0.0]];
    let mut start = vec![0usize];
    for i in 1..=rings {
        start.push(vertices.len());
        let n = 6 * i;
        for j in 0..n {
            let phi = 2.0 * PI * j as f64 / n as f64;
            let s = i as f64 / rings as f64 * domain.radius(phi);
            vertices.push([s * phi.cos(), s * phi.sin()]);
        }
    }
    let ring = |i: usize, j: usize| {
        let n = if i == 0 { 1 } else { 6 * i };
        start[i] + j % n
    };
    let mut triangles = Vec::new();
    for j in 0..6 {
        triangles.push([0, ring(1, j), ring(1, j + 1)]);
    }
    for i in 2..=rings {
        let (na, nb) = (6 * (i - 1), 6 * i);
        let (mut ja, mut jb) = (0usize, 0usize);
        while ja < na || jb < nb {
            // Compare next angles as fractions ja+1 / na against jb+1 / nb.
            let advance_outer = ja == na || (jb < nb && (jb + 1) * na <= (ja + 1) * nb);
            if advance_outer {
                triangles.push([ring(i - 1, ja), ring(i, jb), ring(i, jb + 1)]);
                jb += 1;
            } else {
                triangles.push([ring(i - 1, ja), ring(i, jb), ring(i - 1, ja + 1)]);
                ja += 1;
            }
        }
    }
    let boundary = (0..6 * rings).map(|j| ring(rings, j)).collect();
    SurfaceMesh { vertices, triangles, boundary, h: 0.0 }.finish()
}

/// Rings needed for a longest radial spacing of at most `h`.
pub fn rings_for_spacing(domain: &SphericalDomain, h: f64) -> usize {
    (domain.max_radius() / h).ceil().max(1.0) as usize
}

/// `[0, width] x [0, height]` split into `n x n` cells, two triangles each.
pub fn rectangle_mesh(width: f64, height: f64, n: usize) -> Result<SurfaceMesh> {
    if n == 0 || !(width > 0.0 && height > 0.0) {
        return Err(Error::DegenerateMesh(format!("rectangle {width} x {height} with {n} cells")));
    }
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([width * i as f64 / n as f64, height * j as f64 / n as f64]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            if (i + j) % 2 == 0 {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
        }
    }
    let boundary = (0..vertices.len())
        .filter(|&k| {
            let (i, j) = (k % (n + 1), k / (n + 1));
            i == 0 || j == 0 || i == n || j == n
        })
        .collect();
    SurfaceMesh { vertices, triangles, boundary, h: 0.0 }.finish()
}

/// Symmetric matrix in envelope (skyline) storage: row `i` holds columns
/// `first[i]..=i`.
#[derive(Clone, Debug)]
pub struct SkylineMatrix {
    first: Vec<usize>,
    offset: Vec<usize>,
    values: Vec<f64>,
}

impl SkylineMatrix {
    fn with_envelope(first: Vec<usize>) -> Self {
        let mut offset = Vec::with_capacity(first.len() + 1);
        let mut total = 0;
        for (i, &f) in first.iter().enumerate() {
            offset.push(total);
            total += i - f + 1;
        }
        offset.push(total);
        SkylineMatrix { first, offset, values: vec![0.0; total] }
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        debug_assert!(j >= self.first[i]);
        self.offset[i] + (j - self.first[i])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if j > i { (j, i) } else { (i, j) };
        if c < self.first[r] {
            0.0
        } else {
            self.values[self.slot(r, c)]
        }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.values[s] += v;
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.values[self.offset[i]..self.offset[i + 1]]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let f = self.first[i];
            let row = self.row(i);
            let mut acc = row[i - f] * x[i];
            for (k, &a) in row[..i - f].iter().enumerate() {
                acc += a * x[f + k];
                y[f + k] += a * x[i];
            }
            y[i] += acc;
        }
        y
    }

    /// `self + s * other` for matrices with the same envelope.
    fn shifted(&self, other: &SkylineMatrix, s: f64) -> SkylineMatrix {
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }
}

/// Envelope Cholesky factor `L` with `A = L L^T`.
struct SkylineCholesky {
    l: SkylineMatrix,
}

impl SkylineCholesky {
    fn factor(a: &SkylineMatrix) -> Result<Self> {
        let mut l = a.clone();
        let n = l.dim();
        for i in 0..n {
            let fi = l.first[i];
            for j in fi..=i {
                let fj = l.first[j];
                let lo = fi.max(fj);
                let (oi, oj) = (l.offset[i], l.offset[j]);
                let mut acc = l.values[oi + (j - fi)];
                for k in lo..j {
                    acc -= l.values[oi + (k - fi)] * l.values[oj + (k - fj)];
                }
                if j == i {
                    if !(acc > 0.0) {
                        return Err(Error::DegenerateMesh(format!("matrix is not positive definite at row {i}")));
                    }
                    l.values[oi + (i - fi)] = acc.sqrt();
                } else {
                    l.values[oi + (j - fi)] = acc / l.values[oj + (j - fj)];
                }
            }
        }
        Ok(SkylineCholesky { l })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let l = &self.l;
        let n = l.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            let f = l.first[i];
            let row = l.row(i);
            let mut acc = y[i];
            for (k, &a) in row[..i - f].iter().enumerate() {
                acc -= a * y[f + k];
            }
            y[i] = acc / row[i - f];
        }
        for i in (0..n).rev() {
            let f = l.first[i];
            let row = l.row(i);
            y[i] /= row[i - f];
            let yi = y[i];
            for (k, &a) in row[..i - f].iter().enumerate() {
                y[f + k] -= a * yi;
            }
        }
        y
    }
}

/// Stiffness and consistent mass matrices.
#[derive(Clone, Debug)]
pub struct Operators {
    pub stiffness: SkylineMatrix,
    pub mass: SkylineMatrix,
}

fn metric_at(chart: &dyn Chart, u: &[f64]) -> Result<Matrix2<f64>> {
    let x = chart.expand(u, 1)?;
    let d: Vec<Vec<f64>> = (0..2).map(|i| x.iter().map(|t| t.partial(i).value()).collect()).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    Ok(Matrix2::new(dot(&d[0], &d[0]), dot(&d[0], &d[1]), dot(&d[1], &d[0]), dot(&d[1], &d[1])))
}

/// Assembles `K` and `M` with the pulled-back metric sampled once per
/// triangle at its centroid.
pub fn assemble_operators(chart: &dyn Chart, mesh: &SurfaceMesh) -> Result<Operators> {
    if chart.param_dim() != 2 {
        return Err(Error::UnsupportedDimension { required: "two parameters", got: chart.ambient_dim() });
    }
    let n = mesh.vertex_count();
    let mut first: Vec<usize> = (0..n).collect();
    for t in &mesh.triangles {
        let lo = *t.iter().min().expect("three vertices");
        for &v in t {
            first[v] = first[v].min(lo);
        }
    }
    let locals: Vec<([[f64; 3]; 3], f64)> = mesh
        .triangles
        .par_iter()
        .map(|t| {
            let p = t.map(|i| Vector2::new(mesh.vertices[i][0], mesh.vertices[i][1]));
            let centroid = (p[0] + p[1] + p[2]) / 3.0;
            let g = metric_at(chart, &[centroid.x, centroid.y])?;
            let det = g.determinant();
            if !(det > 0.0) {
                return Err(Error::SingularMetric { det });
            }
            let g_inv = g.try_inverse().ok_or(Error::SingularMetric { det })?;
            let e1 = p[1] - p[0];
            let e2 = p[2] - p[0];
            let jac = Matrix2::new(e1.x, e2.x, e1.y, e2.y);
            let area = 0.5 * jac.determinant();
            let jac_inv_t = jac.try_inverse().ok_or_else(|| Error::DegenerateMesh(format!("{t:?}")))?.transpose();
            let ref_grads = [Vector2::new(-1.0, -1.0), Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)];
            let grads = ref_grads.map(|r| jac_inv_t * r);
            let w = area * det.sqrt();
            let mut k = [[0.0; 3]; 3];
            for a in 0..3 {
                for b in 0..3 {
                    k[a][b] = w * grads[a].dot(&(g_inv * grads[b]));
                }
            }
            Ok((k, w))
        })
        .collect::<Result<_>>()?;
    let mut stiffness = SkylineMatrix::with_envelope(first.clone());
    let mut mass = SkylineMatrix::with_envelope(first);
    for (t, (k, w)) in mesh.triangles.iter().zip(&locals) {
        for a in 0..3 {
            for b in 0..3 {
                if t[b] > t[a] {
                    continue;
                }
                stiffness.add(t[a], t[b], k[a][b]);
                let m = if a == b { 2.0 } else { 1.0 };
                mass.add(t[a], t[b], w * m / 12.0);
            }
        }
    }
    Ok(Operators { stiffness, mass })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralResult {
    pub lambda1: f64,
    #[serde(skip)]
    pub eigenvector: Vec<f64>,
    /// `|K v - lambda M v| / |M v|`.
    pub residual: f64,
    pub iterations: usize,
    pub vertices: usize,
    pub h: f64,
}

/// Smallest non-zero generalized eigenvalue of `(K, M)` by shifted inverse
/// iteration on the `M`-orthogonal complement of the constants.
pub fn lambda1_from_operators(ops: &Operators, mesh: &SurfaceMesh) -> Result<SpectralResult> {
    let (k, m) = (&ops.stiffness, &ops.mass);
    let n = k.dim();
    if n < 3 {
        return Err(Error::DegenerateMesh("too few vertices".into()));
    }
    let ones = vec![1.0; n];
    let m_ones = m.mul_vec(&ones);
    let total = m_ones.iter().sum::<f64>();
    // Small against lambda_1 ~ 1 / area, and invariant under scaling.
    let shift = 0.1 / total;
    let chol = SkylineCholesky::factor(&k.shifted(m, shift))?;
    let deflate = |x: &mut Vec<f64>| {
        let c = x.iter().zip(&m_ones).map(|(a, b)| a * b).sum::<f64>() / total;
        x.iter_mut().for_each(|v| *v -= c);
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let mut x: Vec<f64> = mesh.vertices.iter().map(|p| p[0] + 0.37 * p[1] + 0.11 * p[0] * p[1]).collect();
    deflate(&mut x);
    let mut previous = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        let mx = m.mul_vec(&x);
        let mut y = chol.solve(&mx);
        deflate(&mut y);
        let my = m.mul_vec(&y);
        let norm = dot(&y, &my).sqrt();
        if !(norm > 0.0) {
            return Err(Error::NoConvergence { iterations: it });
        }
        y.iter_mut().for_each(|v| *v /= norm);
        let ky = k.mul_vec(&y);
        let rq = dot(&y, &ky);
        x = y;
        if (rq - previous).abs() <= RAYLEIGH_TOLERANCE * rq.abs() {
            let mx = m.mul_vec(&x);
            let r: f64 = ky.iter().zip(&mx).map(|(a, b)| (a - rq * b).powi(2)).sum::<f64>().sqrt();
            let residual = r / dot(&mx, &mx).sqrt();
            return Ok(SpectralResult {
                lambda1: rq,
                eigenvector: x,
                residual,
                iterations: it,
                vertices: n,
                h: mesh.h,
            });
        }
        previous = rq;
    }
    Err(Error::NoConvergence { iterations: MAX_ITERATIONS })
}

pub fn lambda1_neumann(chart: &dyn Chart, mesh: &SurfaceMesh) -> Result<SpectralResult> {
    lambda1_from_operators(&assemble_operators(chart, mesh)?, mesh)
}

/// Eigenvalue estimates on successively refined meshes with Richardson
/// extrapolation.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralStudy {
    pub levels: Vec<SpectralResult>,
    pub observed_order: Option<f64>,
    pub extrapolated: f64,
    /// Relative gap between the finest estimate and the extrapolated value.
    pub delta: f64,
}

impl SpectralStudy {
    pub fn finest(&self) -> &SpectralResult {
        self.levels.last().expect("non-empty study")
    }

    /// Finest estimates differ by less than the previous difference.
    pub fn is_cauchy(&self) -> bool {
        let v: Vec<f64> = self.levels.iter().map(|l| l.lambda1).collect();
        v.windows(3).all(|w| (w[2] - w[1]).abs() < (w[1] - w[0]).abs())
    }
}

/// Richardson extrapolation of estimates on meshes refined by a factor two.
pub fn richardson_study(levels: Vec<SpectralResult>) -> Result<SpectralStudy> {
    let v: Vec<f64> = levels.iter().map(|l| l.lambda1).collect();
    let n = v.len();
    if n == 0 {
        return Err(Error::InvalidInput("no spectral levels".into()));
    }
    let observed_order = (n >= 3)
        .then(|| {
            let (d0, d1) = (v[n - 2] - v[n - 3], v[n - 1] - v[n - 2]);
            (d0 / d1).log2()
        })
        .filter(|p| p.is_finite() && *p > 0.0);
    let extrapolated = if n >= 2 {
        let p = observed_order.unwrap_or(2.0);
        v[n - 1] + (v[n - 1] - v[n - 2]) / (2f64.powf(p) - 1.0)
    } else {
        v[0]
    };
    let delta = ((v[n - 1] - extrapolated) / extrapolated).abs();
    Ok(SpectralStudy { levels, observed_order, extrapolated, delta })
}

/// Runs the eigenvalue solver on polar fans with the given ring counts.
pub fn spectral_study(surface: &dyn Surface, rings: &[usize]) -> Result<SpectralStudy> {
    let levels = rings
        .iter()
        .map(|&r| lambda1_neumann(surface, &polar_fan_mesh(surface.domain(), r)?))
        .collect::<Result<Vec<_>>>()?;
    richardson_study(levels)
}

/// Chart of the unit sphere restricted to the domain, for `lambda_1(omega)`.
struct UnitSphereDomain;

impl Chart for UnitSphereDomain {
    fn ambient_dim(&self) -> usize {
        3
    }
    fn contains(&self, u: &[f64]) -> bool {
        u[0].hypot(u[1]) < PI
    }
    fn expand(&self, u: &[f64], order: usize) -> Result<Vec<Taylor>> {
        Ok(crate::geometry::exp_pole(&Taylor::variables(u, order)))
    }
}

/// `lambda_1(omega)` of the spherical domain itself.
pub fn domain_eigenvalue(domain: &SphericalDomain, rings: &[usize]) -> Result<SpectralStudy> {
    let levels = rings
        .iter()
        .map(|&r| lambda1_neumann(&UnitSphereDomain, &polar_fan_mesh(domain, r)?))
        .collect::<Result<Vec<_>>>()?;
    richardson_study(levels)
}
