//! Truncated multivariate Taylor arithmetic (forward-mode differentiation of
//! arbitrary order) in up to two variables.
//!
//! A [`Taylor`] value represents the polynomial
//! `sum_{a+b <= order} c[a][b] * h0^a * h1^b` where `h` is the displacement
//! from the expansion point. Coefficients are scaled derivatives:
//! `c[a][b] = d^{a+b} f / (d u0^a d u1^b) / (a! b!)`.
//!
//! Every chart in the crate is evaluated in this arithmetic, so first, second
//! and higher derivatives are exact up to floating-point rounding.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Highest expansion order supported.
pub const MAX_ORDER: usize = 5;
const W: usize = MAX_ORDER + 1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taylor {
    c: [[f64; W]; W],
    order: usize,
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

impl Taylor {
    pub fn constant(value: f64, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "expansion order {order} exceeds {MAX_ORDER}");
        let mut c = [[0.0; W]; W];
        c[0][0] = value;
        Self { c, order }
    }

    /// The independent variable `index` (0 or 1) expanded around `value`.
    pub fn variable(index: usize, value: f64, order: usize) -> Self {
        assert!(index < 2, "at most two independent variables");
        let mut t = Self::constant(value, order);
        if order >= 1 {
            if index == 0 {
                t.c[1][0] = 1.0;
            } else {
                t.c[0][1] = 1.0;
            }
        }
        t
    }

    /// Seeds `point.len()` independent variables around `point`.
    pub fn variables(point: &[f64], order: usize) -> Vec<Self> {
        point.iter().enumerate().map(|(i, &v)| Self::variable(i, v, order)).collect()
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.c[0][0]
    }

    /// Raw scaled coefficient of `h0^a h1^b`.
    #[inline]
    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        if a + b > self.order {
            0.0
        } else {
            self.c[a][b]
        }
    }

    /// Mixed partial derivative `d^{a+b} f / (du0^a du1^b)` at the expansion point.
    pub fn derivative(&self, a: usize, b: usize) -> f64 {
        assert!(a + b <= self.order, "derivative beyond expansion order");
        self.c[a][b] * factorial(a) * factorial(b)
    }

    /// Lowers the expansion order (drops high-order coefficients).
    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        let mut out = Self::constant(0.0, order);
        for a in 0..=order {
            for b in 0..=order - a {
                out.c[a][b] = self.c[a][b];
            }
        }
        out
    }

    /// Partial derivative with respect to variable `index`, as a Taylor
    /// expansion of one order less.
    pub fn partial(&self, index: usize) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 expansion");
        let order = self.order - 1;
        let mut out = Self::constant(0.0, order);
        for a in 0..=order {
            for b in 0..=order - a {
                out.c[a][b] =
                    if index == 0 { (a + 1) as f64 * self.c[a + 1][b] } else { (b + 1) as f64 * self.c[a][b + 1] };
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        (0..=self.order).all(|a| (0..=self.order - a).all(|b| self.c[a][b].is_finite()))
    }

    /// Composes a univariate function with this expansion, given
    /// `coeffs[k] = f^(k)(value) / k!` for `k = 0..=order`.
    pub fn compose(&self, coeffs: &[f64]) -> Self {
        debug_assert!(coeffs.len() > self.order);
        let mut h = *self;
        h.c[0][0] = 0.0;
        let mut r = Self::constant(coeffs[self.order], self.order);
        for k in (0..self.order).rev() {
            r *= h;
            r.c[0][0] += coeffs[k];
        }
        r
    }

    fn series(&self, f: impl Fn(usize) -> f64) -> Self {
        let coeffs: Vec<f64> = (0..=self.order).map(f).collect();
        self.compose(&coeffs)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.series(|k| {
            let d = match k % 4 {
                0 => s,
                1 => c,
                2 => -s,
                _ => -c,
            };
            d / factorial(k)
        })
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.series(|k| {
            let d = match k % 4 {
                0 => c,
                1 => -s,
                2 => -c,
                _ => s,
            };
            d / factorial(k)
        })
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.series(|k| e / factorial(k))
    }

    pub fn ln(&self) -> Self {
        let x = self.value();
        self.series(|k| {
            if k == 0 {
                x.ln()
            } else {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign / (k as f64 * x.powi(k as i32))
            }
        })
    }

    /// `self^p` for real `p`; the expansion point must be positive unless
    /// `p` is a non-negative integer.
    pub fn powf(&self, p: f64) -> Self {
        let x = self.value();
        self.series(|k| {
            let mut falling = 1.0;
            for i in 0..k {
                falling *= p - i as f64;
            }
            falling / factorial(k) * x.powf(p - k as f64)
        })
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn recip(&self) -> Self {
        let x = self.value();
        self.series(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign / x.powi(k as i32 + 1)
        })
    }

    pub fn square(&self) -> Self {
        *self * *self
    }

    /// `cos(sqrt(q))`, analytic in `q` including `q = 0`.
    pub fn cos_sqrt(&self) -> Self {
        let q = self.value();
        if q > SQRT_BRANCH {
            self.sqrt().cos()
        } else {
            self.entire_series(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign / factorial(2 * k)
            })
        }
    }

    /// `sin(sqrt(q)) / sqrt(q)`, analytic in `q` including `q = 0`.
    pub fn sinc_sqrt(&self) -> Self {
        let q = self.value();
        if q > SQRT_BRANCH {
            let s = self.sqrt();
            s.sin() / s
        } else {
            self.entire_series(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign / factorial(2 * k + 1)
            })
        }
    }

    /// Composes an entire function given by its Maclaurin coefficients
    /// `a(k)`, re-expanded around the current value.
    fn entire_series(&self, a: impl Fn(usize) -> f64) -> Self {
        const TERMS: usize = 24;
        let q0 = self.value();
        let coeffs: Vec<f64> = (0..=self.order)
            .map(|m| (m..TERMS).map(|k| a(k) * binomial(k, m) * q0.powi((k - m) as i32)).sum())
            .collect();
        self.compose(&coeffs)
    }
}

/// Above this argument the square-root branch is well conditioned.
const SQRT_BRANCH: f64 = 0.25;

impl Add for Taylor {
    type Output = Taylor;
    fn add(self, rhs: Taylor) -> Taylor {
        let order = self.order.min(rhs.order);
        let mut out = Taylor::constant(0.0, order);
        for a in 0..=order {
            for b in 0..=order - a {
                out.c[a][b] = self.c[a][b] + rhs.c[a][b];
            }
        }
        out
    }
}

impl Sub for Taylor {
    type Output = Taylor;
    fn sub(self, rhs: Taylor) -> Taylor {
        self + (-rhs)
    }
}

impl Neg for Taylor {
    type Output = Taylor;
    fn neg(mut self) -> Taylor {
        for row in self.c.iter_mut() {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
        self
    }
}

impl Mul for Taylor {
    type Output = Taylor;
    fn mul(self, rhs: Taylor) -> Taylor {
        let order = self.order.min(rhs.order);
        let mut out = Taylor::constant(0.0, order);
        for a in 0..=order {
            for b in 0..=order - a {
                let mut acc = 0.0;
                for i in 0..=a {
                    for j in 0..=b {
                        acc += self.c[i][j] * rhs.c[a - i][b - j];
                    }
                }
                out.c[a][b] = acc;
            }
        }
        out
    }
}

impl Div for Taylor {
    type Output = Taylor;
    fn div(self, rhs: Taylor) -> Taylor {
        self * rhs.recip()
    }
}

impl Add<f64> for Taylor {
    type Output = Taylor;
    fn add(mut self, rhs: f64) -> Taylor {
        self.c[0][0] += rhs;
        self
    }
}

impl Sub<f64> for Taylor {
    type Output = Taylor;
    fn sub(mut self, rhs: f64) -> Taylor {
        self.c[0][0] -= rhs;
        self
    }
}

impl Mul<f64> for Taylor {
    type Output = Taylor;
    fn mul(mut self, rhs: f64) -> Taylor {
        for row in self.c.iter_mut() {
            for v in row.iter_mut() {
                *v *= rhs;
            }
        }
        self
    }
}

impl Div<f64> for Taylor {
    type Output = Taylor;
    fn div(self, rhs: f64) -> Taylor {
        self * (1.0 / rhs)
    }
}

impl Mul<Taylor> for f64 {
    type Output = Taylor;
    fn mul(self, rhs: Taylor) -> Taylor {
        rhs * self
    }
}

impl Add<Taylor> for f64 {
    type Output = Taylor;
    fn add(self, rhs: Taylor) -> Taylor {
        rhs + self
    }
}

impl Sub<Taylor> for f64 {
    type Output = Taylor;
    fn sub(self, rhs: Taylor) -> Taylor {
        -rhs + self
    }
}

impl AddAssign for Taylor {
    fn add_assign(&mut self, rhs: Taylor) {
        *self = *self + rhs;
    }
}

impl SubAssign for Taylor {
    fn sub_assign(&mut self, rhs: Taylor) {
        *self = *self - rhs;
    }
}

impl MulAssign for Taylor {
    fn mul_assign(&mut self, rhs: Taylor) {
        *self = *self * rhs;
    }
}

/// Euclidean inner product of two Taylor-valued vectors.
pub fn dot(a: &[Taylor], b: &[Taylor]) -> Taylor {
    debug_assert_eq!(a.len(), b.len());
    let order = a.iter().chain(b).map(Taylor::order).min().unwrap_or(MAX_ORDER);
    a.iter().zip(b).fold(Taylor::constant(0.0, order), |acc, (x, y)| acc + *x * *y)
}

/// Determinant of a small square Taylor matrix by cofactor expansion.
pub fn det(m: &[Vec<Taylor>]) -> Taylor {
    let n = m.len();
    match n {
        0 => Taylor::constant(1.0, MAX_ORDER),
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => {
            let mut acc: Option<Taylor> = None;
            for col in 0..n {
                let minor: Vec<Vec<Taylor>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, v)| *v).collect())
                    .collect();
                let term = m[0][col] * det(&minor);
                let term = if col % 2 == 0 { term } else { -term };
                acc = Some(match acc {
                    Some(a) => a + term,
                    None => term,
                });
            }
            acc.expect("non-empty matrix")
        }
    }
}

/// Inverse of a small symmetric Taylor matrix via the adjugate.
pub fn inverse(m: &[Vec<Taylor>]) -> Vec<Vec<Taylor>> {
    let n = m.len();
    let d = det(m);
    let inv_d = d.recip();
    if n == 1 {
        return vec![vec![inv_d]];
    }
    let mut out = vec![vec![Taylor::constant(0.0, d.order()); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<Taylor>> =
                (0..n).filter(|&r| r != j).map(|r| (0..n).filter(|&c| c != i).map(|c| m[r][c]).collect()).collect();
            let cof = det(&minor);
            let cof = if (i + j) % 2 == 0 { cof } else { -cof };
            out[i][j] = cof * inv_d;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn product_rule_and_mixed_partials() {
        let x = Taylor::variable(0, 0.7, 3);
        let y = Taylor::variable(1, -0.4, 3);
        let f = x * x * y + y.sin() * x.exp();
        // f_x = 2xy + sin(y) e^x
        assert_relative_eq!(f.derivative(1, 0), 2.0 * 0.7 * -0.4 + (-0.4f64).sin() * 0.7f64.exp(), epsilon = 1e-14);
        // f_xy = 2x + cos(y) e^x
        assert_relative_eq!(f.derivative(1, 1), 2.0 * 0.7 + (-0.4f64).cos() * 0.7f64.exp(), epsilon = 1e-14);
        // f_yyy = -cos(y) e^x
        assert_relative_eq!(f.derivative(0, 3), -(-0.4f64).cos() * 0.7f64.exp(), epsilon = 1e-14);
    }

    #[test]
    fn partial_lowers_order() {
        let x = Taylor::variable(0, 1.3, 4);
        let f = x.powf(3.0);
        let df = f.partial(0);
        assert_eq!(df.order(), 3);
        assert_relative_eq!(df.value(), 3.0 * 1.3f64.powi(2), epsilon = 1e-13);
        assert_relative_eq!(df.derivative(2, 0), 6.0, epsilon = 1e-12);
    }

    #[test]
    fn sqrt_branch_functions_are_continuous() {
        for &q in &[0.0, 1e-6, 0.2, 0.25, 0.2500001, 1.0, 4.0] {
            let t = Taylor::variable(0, q, 4);
            let c = t.cos_sqrt();
            let s = t.sinc_sqrt();
            let r: f64 = f64::sqrt(q);
            assert_relative_eq!(c.value(), r.cos(), epsilon = 1e-15);
            let sinc = if q == 0.0 { 1.0 } else { r.sin() / r };
            assert_relative_eq!(s.value(), sinc, epsilon = 1e-15);
            // d/dq cos(sqrt q) = -sinc(sqrt q) / 2
            assert_relative_eq!(c.derivative(1, 0), -0.5 * sinc, epsilon = 1e-13);
        }
    }

    #[test]
    fn inverse_of_two_by_two() {
        let x = Taylor::variable(0, 0.3, 2);
        let m = vec![vec![x + 2.0, x * 0.5], vec![x * 0.5, Taylor::constant(1.5, 2)]];
        let inv = inverse(&m);
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Taylor::constant(0.0, 2);
                for k in 0..2 {
                    acc += m[i][k] * inv[k][j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(acc.value(), expect, epsilon = 1e-14);
                assert!(acc.derivative(1, 0).abs() < 1e-13);
                assert!(acc.derivative(2, 0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn ln_exp_roundtrip() {
        let x = Taylor::variable(0, 0.9, 5);
        let y = x.exp().ln();
        assert_relative_eq!(y.value(), 0.9, epsilon = 1e-15);
        assert_relative_eq!(y.derivative(1, 0), 1.0, epsilon = 1e-14);
        for k in 2..=5 {
            assert!(y.derivative(k, 0).abs() < 1e-11);
        }
    }
}
