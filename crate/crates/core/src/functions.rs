//! Smooth functions with analytic derivatives, used as interpolation data
//! and as manufactured solutions.

use crate::bs_element::Jet;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A function on the plane with analytic derivatives up to order two.
pub trait SmoothFunction<T: Scalar>: Send + Sync {
    /// `[u, u_x, u_y, u_xx, u_xy, u_yy]` at `x`.
    fn jet(&self, x: [T; 2]) -> Jet<T>;

    /// `Δ²u` at `x`, when known.
    fn bilaplacian(&self, _x: [T; 2]) -> Option<T> {
        None
    }

    fn value(&self, x: [T; 2]) -> T {
        self.jet(x)[0]
    }
}

/// Compares the analytic gradient and Hessian against central differences
/// at the given points, relative to the size of the jet.
pub fn check_derivatives<F: SmoothFunction<f64> + ?Sized>(f: &F, points: &[[f64; 2]], tol: f64) -> Result<()> {
    let h = 1e-5;
    for &x in points {
        let j = f.jet(x);
        let at = |dx: f64, dy: f64| f.jet([x[0] + dx, x[1] + dy]);
        let fd = [
            (at(h, 0.0)[0] - at(-h, 0.0)[0]) / (2.0 * h),
            (at(0.0, h)[0] - at(0.0, -h)[0]) / (2.0 * h),
            (at(h, 0.0)[1] - at(-h, 0.0)[1]) / (2.0 * h),
            (at(h, 0.0)[2] - at(-h, 0.0)[2]) / (2.0 * h),
            (at(0.0, h)[2] - at(0.0, -h)[2]) / (2.0 * h),
        ];
        let want = [j[1], j[2], j[3], j[4], j[5]];
        let scale = 1.0 + j.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for (k, (a, b)) in fd.iter().zip(&want).enumerate() {
            if (a - b).abs() > tol * scale {
                return Err(Error::Dimension(format!(
                    "derivative {k} at ({}, {}) is {b}, finite difference gives {a}",
                    x[0], x[1]
                )));
            }
        }
    }
    Ok(())
}

/// `-4 cos(x/2) sin(y/2)`, with `Δ²u = u / 4`.
#[derive(Clone, Copy, Debug, Default)]
pub struct CosSin;

impl<T: Scalar> SmoothFunction<T> for CosSin {
    fn jet(&self, x: [T; 2]) -> Jet<T> {
        let h = T::lit(0.5);
        let (sx, cx) = (x[0] * h).sin_cos();
        let (sy, cy) = (x[1] * h).sin_cos();
        let two = T::lit(2.0);
        [-T::lit(4.0) * cx * sy, two * sx * sy, -two * cx * cy, cx * sy, sx * cy, cx * sy]
    }

    fn bilaplacian(&self, x: [T; 2]) -> Option<T> {
        Some(self.jet(x)[0] * T::lit(0.25))
    }
}

/// `sin(x) cos(y)`, with `Δ²u = 4u`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SinCos;

impl<T: Scalar> SmoothFunction<T> for SinCos {
    fn jet(&self, x: [T; 2]) -> Jet<T> {
        let (sx, cx) = x[0].sin_cos();
        let (sy, cy) = x[1].sin_cos();
        [sx * cy, cx * cy, -sx * sy, -sx * cy, -cx * sy, -sx * cy]
    }

    fn bilaplacian(&self, x: [T; 2]) -> Option<T> {
        Some(self.jet(x)[0] * T::lit(4.0))
    }
}

/// A bivariate polynomial `sum c[i][j] x^i y^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly2<T> {
    /// `coeffs[i][j]` multiplies `x^i y^j`.
    coeffs: Vec<Vec<T>>,
}

impl<T: Scalar> Poly2<T> {
    pub fn new(coeffs: Vec<Vec<T>>) -> Self {
        Self { coeffs }
    }

    pub fn monomial(i: usize, j: usize) -> Self {
        let mut c = vec![vec![T::zero(); j + 1]; i + 1];
        c[i][j] = T::one();
        Self { coeffs: c }
    }

    pub fn constant(v: T) -> Self {
        Self { coeffs: vec![vec![v]] }
    }

    pub fn total_degree(&self) -> usize {
        let mut d = 0;
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c != T::zero() {
                    d = d.max(i + j);
                }
            }
        }
        d
    }

    fn get(&self, i: usize, j: usize) -> T {
        self.coeffs.get(i).and_then(|r| r.get(j)).copied().unwrap_or_else(T::zero)
    }

    fn dims(&self) -> (usize, usize) {
        (self.coeffs.len(), self.coeffs.iter().map(Vec::len).max().unwrap_or(0))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a1, a2) = self.dims();
        let (b1, b2) = other.dims();
        let c = (0..a1.max(b1))
            .map(|i| (0..a2.max(b2)).map(|j| self.get(i, j) + other.get(i, j)).collect())
            .collect();
        Self { coeffs: c }
    }

    pub fn scale(&self, s: T) -> Self {
        Self { coeffs: self.coeffs.iter().map(|r| r.iter().map(|&c| c * s).collect()).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a1, a2) = self.dims();
        let (b1, b2) = other.dims();
        let mut c = vec![vec![T::zero(); (a2 + b2).saturating_sub(1)]; (a1 + b1).saturating_sub(1)];
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, &u) in row.iter().enumerate() {
                for (k, row2) in other.coeffs.iter().enumerate() {
                    for (l, &v) in row2.iter().enumerate() {
                        c[i + k][j + l] += u * v;
                    }
                }
            }
        }
        Self { coeffs: c }
    }

    pub fn dx(&self) -> Self {
        let (a1, a2) = self.dims();
        let c = (1..a1.max(1))
            .map(|i| (0..a2).map(|j| self.get(i, j) * T::from_usize_lossy(i)).collect())
            .collect::<Vec<Vec<T>>>();
        Self { coeffs: if c.is_empty() { vec![vec![T::zero()]] } else { c } }
    }

    pub fn dy(&self) -> Self {
        let (a1, a2) = self.dims();
        let c = (0..a1)
            .map(|i| {
                let r: Vec<T> = (1..a2.max(1)).map(|j| self.get(i, j) * T::from_usize_lossy(j)).collect();
                if r.is_empty() { vec![T::zero()] } else { r }
            })
            .collect::<Vec<Vec<T>>>();
        Self { coeffs: if c.is_empty() { vec![vec![T::zero()]] } else { c } }
    }

    pub fn eval(&self, x: [T; 2]) -> T {
        let mut s = T::zero();
        for row in self.coeffs.iter().rev() {
            let mut r = T::zero();
            for &c in row.iter().rev() {
                r = r * x[1] + c;
            }
            s = s * x[0] + r;
        }
        s
    }

    pub fn laplacian(&self) -> Self {
        self.dx().dx().add(&self.dy().dy())
    }
}

impl<T: Scalar> SmoothFunction<T> for Poly2<T> {
    fn jet(&self, x: [T; 2]) -> Jet<T> {
        let (px, py) = (self.dx(), self.dy());
        [self.eval(x), px.eval(x), py.eval(x), px.dx().eval(x), px.dy().eval(x), py.dy().eval(x)]
    }

    fn bilaplacian(&self, x: [T; 2]) -> Option<T> {
        Some(self.laplacian().laplacian().eval(x))
    }
}

/// Polynomial with cached derivative polynomials, for repeated evaluation.
#[derive(Clone, Debug)]
pub struct CachedPoly<T> {
    parts: [Poly2<T>; 7],
}

impl<T: Scalar> CachedPoly<T> {
    pub fn new(p: Poly2<T>) -> Self {
        let (px, py) = (p.dx(), p.dy());
        let b = p.laplacian().laplacian();
        Self { parts: [p.clone(), px.clone(), py.clone(), px.dx(), px.dy(), py.dy(), b] }
    }
}

impl<T: Scalar> SmoothFunction<T> for CachedPoly<T> {
    fn jet(&self, x: [T; 2]) -> Jet<T> {
        std::array::from_fn(|k| self.parts[k].eval(x))
    }

    fn bilaplacian(&self, x: [T; 2]) -> Option<T> {
        Some(self.parts[6].eval(x))
    }
}

/// `¼ (x³ + 5y² − 10y³ + y⁴)²`, a solution with homogeneous clamped data
/// along `y = 0`.
pub fn clamped_polynomial<T: Scalar>() -> CachedPoly<T> {
    let l = T::lit;
    let inner = Poly2::new(vec![
        vec![T::zero(), T::zero(), l(5.0), l(-10.0), l(1.0)],
        vec![T::zero()],
        vec![T::zero()],
        vec![l(1.0)],
    ]);
    CachedPoly::new(inner.mul(&inner).scale(l(0.25)))
}
