//! Univariate Bernstein polynomials and uniform B-spline spaces on `[0, 1]`.
//!
//! The spaces used by the elements are `S(p, r, k)`: degree `p`, `k` equal
//! segments, regularity `r` at the inner breakpoints, with open (clamped)
//! knot vectors. Only `r = p - 2` (double inner knots) and `r = p - 1`
//! (simple inner knots) are supported.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

/// Largest derivative order exposed by the public evaluation routines.
pub const MAX_PUBLIC_DERIVATIVE: usize = 2;

/// Values and derivatives of the basis functions that do not vanish at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisEval<T> {
    /// Index of the first non-vanishing basis function.
    pub first: usize,
    /// `derivs[d][j]` is the `d`-th derivative of basis function `first + j`.
    pub derivs: Vec<Vec<T>>,
}

impl<T: Scalar> BasisEval<T> {
    pub fn values(&self) -> &[T] {
        &self.derivs[0]
    }

    pub fn order(&self) -> usize {
        self.derivs.len() - 1
    }

    /// Dense vector of `d`-th derivatives over all `dim` basis functions.
    pub fn dense(&self, d: usize, dim: usize) -> Vec<T> {
        let mut out = vec![T::zero(); dim];
        for (j, &v) in self.derivs[d].iter().enumerate() {
            out[self.first + j] = v;
        }
        out
    }
}

/// Which one-sided limit to take when evaluating exactly at a knot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Limit {
    FromLeft,
    FromRight,
}

/// Bernstein polynomials `C(p, j) x^j (1 - x)^(p - j)` and their derivatives.
pub fn bernstein_eval<T: Scalar>(p: usize, x: T, d: usize) -> Result<BasisEval<T>> {
    if d > MAX_PUBLIC_DERIVATIVE {
        return Err(Error::Unsupported(format!("derivative order {d} > {MAX_PUBLIC_DERIVATIVE}")));
    }
    Ok(bernstein_derivs(p, x, d))
}

pub(crate) fn bernstein_derivs<T: Scalar>(p: usize, x: T, d: usize) -> BasisEval<T> {
    // table[q] holds the Bernstein values of degree q (q = 0..=p)
    let mut table: Vec<Vec<T>> = Vec::with_capacity(p + 1);
    table.push(vec![T::one()]);
    for q in 1..=p {
        let prev = &table[q - 1];
        let mut cur = vec![T::zero(); q + 1];
        for j in 0..=q {
            let left = if j > 0 { x * prev[j - 1] } else { T::zero() };
            let right = if j < q { (T::one() - x) * prev[j] } else { T::zero() };
            cur[j] = left + right;
        }
        table.push(cur);
    }
    let mut derivs = Vec::with_capacity(d + 1);
    for order in 0..=d {
        if order > p {
            derivs.push(vec![T::zero(); p + 1]);
            continue;
        }
        // d^order/dx^order b_j^p = p!/(p-order)! sum_i (-1)^(order-i) C(order,i) b_{j-i}^{p-order}
        let base = &table[p - order];
        let mut falling = T::one();
        for m in 0..order {
            falling *= T::from_usize_lossy(p - m);
        }
        let mut row = vec![T::zero(); p + 1];
        for (j, slot) in row.iter_mut().enumerate() {
            let mut s = T::zero();
            for i in 0..=order {
                if j < i || j - i > p - order {
                    continue;
                }
                let c = T::from_usize_lossy(binomial(order, i));
                let sign = if (order - i) % 2 == 0 { T::one() } else { -T::one() };
                s += sign * c * base[j - i];
            }
            *slot = falling * s;
        }
        derivs.push(row);
    }
    BasisEval { first: 0, derivs }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Open knot vector of a uniform spline space on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct KnotVector<T> {
    degree: usize,
    segments: usize,
    regularity: usize,
    knots: Vec<T>,
}

impl<T: Scalar> KnotVector<T> {
    /// Knots of `S(p, r, k)`: end knots repeated `p + 1` times, inner
    /// breakpoints `i/k` with multiplicity `p - r`.
    pub fn new(degree: usize, segments: usize, regularity: usize) -> Result<Self> {
        if segments == 0 {
            return Err(Error::Unsupported("spline space needs at least one segment".into()));
        }
        let supported = regularity + 1 == degree || (degree >= 2 && regularity + 2 == degree);
        if !supported {
            return Err(Error::Unsupported(format!(
                "regularity {regularity} for degree {degree} (expected {} or {})",
                degree.saturating_sub(2),
                degree.saturating_sub(1)
            )));
        }
        let mult = degree - regularity;
        let k = T::from_usize_lossy(segments);
        let mut knots = vec![T::zero(); degree + 1];
        for i in 1..segments {
            let u = T::from_usize_lossy(i) / k;
            knots.extend(std::iter::repeat_n(u, mult));
        }
        knots.extend(std::iter::repeat_n(T::one(), degree + 1));
        Ok(Self { degree, segments, regularity, knots })
    }

    /// Bernstein space of degree `p` (single segment).
    pub fn bernstein(degree: usize) -> Self {
        let mut knots = vec![T::zero(); degree + 1];
        knots.extend(std::iter::repeat_n(T::one(), degree + 1));
        Self { degree, segments: 1, regularity: degree.saturating_sub(1), knots }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    pub fn regularity(&self) -> usize {
        self.regularity
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    /// Number of basis functions.
    pub fn dim(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Breakpoints `0, 1/k, ..., 1`.
    pub fn breakpoints(&self) -> Vec<T> {
        let k = T::from_usize_lossy(self.segments);
        (0..=self.segments).map(|i| T::from_usize_lossy(i) / k).collect()
    }

    /// Knot averages, one per basis function.
    pub fn greville(&self) -> Vec<T> {
        let p = self.degree;
        if p == 0 {
            return (0..self.dim()).map(|i| (self.knots[i] + self.knots[i + 1]) / T::lit(2.0)).collect();
        }
        let pf = T::from_usize_lossy(p);
        (0..self.dim())
            .map(|i| self.knots[i + 1..=i + p].iter().copied().sum::<T>() / pf)
            .collect()
    }

    fn span(&self, x: T, limit: Limit) -> usize {
        let last = self.dim() - 1;
        let mut s = self.degree;
        match limit {
            Limit::FromRight => {
                while s < last && self.knots[s + 1] <= x {
                    s += 1;
                }
            }
            Limit::FromLeft => {
                while s < last && self.knots[s + 1] < x {
                    s += 1;
                }
            }
        }
        s
    }

    /// Values and derivatives up to order 2 at `x`, right-continuous at knots.
    pub fn eval(&self, x: T, d: usize) -> Result<BasisEval<T>> {
        if d > MAX_PUBLIC_DERIVATIVE {
            return Err(Error::Unsupported(format!("derivative order {d} > {MAX_PUBLIC_DERIVATIVE}")));
        }
        Ok(self.derivs(x, d, Limit::FromRight))
    }

    /// Values and all derivatives up to `order` (any order) with an explicit
    /// one-sided limit at knots.
    pub(crate) fn derivs(&self, x: T, order: usize, limit: Limit) -> BasisEval<T> {
        let p = self.degree;
        let span = self.span(x, limit);
        let u = &self.knots;
        let mut ndu = vec![vec![T::zero(); p + 1]; p + 1];
        let mut left = vec![T::zero(); p + 1];
        let mut right = vec![T::zero(); p + 1];
        ndu[0][0] = T::one();
        for j in 1..=p {
            left[j] = x - u[span + 1 - j];
            right[j] = u[span + j] - x;
            let mut saved = T::zero();
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        let mut derivs = vec![vec![T::zero(); p + 1]; order + 1];
        for j in 0..=p {
            derivs[0][j] = ndu[j][p];
        }
        let n = order.min(p);
        let mut a = vec![vec![T::zero(); p + 1]; 2];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = T::one();
            for k in 1..=n {
                let mut d = T::zero();
                let rk = r as isize - k as isize;
                let pk = p - k;
                if rk >= 0 {
                    let rk = rk as usize;
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                    d = a[s2][0] * ndu[rk][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                    d += a[s2][j] * ndu[idx][pk];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                derivs[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut fac = T::from_usize_lossy(p);
        for (k, row) in derivs.iter_mut().enumerate().take(n + 1).skip(1) {
            for v in row.iter_mut() {
                *v *= fac;
            }
            fac *= T::from_usize_lossy(p - k);
        }
        BasisEval { first: span - p, derivs }
    }

    /// Collocation matrix `A[m][j] = B_j(gamma_m)` at the Greville abscissae.
    pub fn greville_collocation(&self) -> DenseMatrix<T> {
        let n = self.dim();
        let mut a = DenseMatrix::zeros(n, n);
        for (m, &g) in self.greville().iter().enumerate() {
            let e = self.derivs(g, 0, Limit::FromRight);
            for (j, &v) in e.values().iter().enumerate() {
                a[(m, e.first + j)] = v;
            }
        }
        a
    }

    /// Coefficients of the spline interpolating `f` at the Greville abscissae.
    ///
    /// For functions in the space these are exactly the dual-functional
    /// values, i.e. the B-spline coefficients of `f`.
    pub fn dual_functionals(&self, f: impl Fn(T) -> T) -> Result<Vec<T>> {
        let rhs: Vec<T> = self.greville().into_iter().map(f).collect();
        let lu = self.greville_collocation().lu()?;
        Ok(lu.solve(&rhs))
    }

    /// Evaluates `sum_j coeffs[j] B_j(x)`.
    pub fn combine(&self, coeffs: &[T], x: T) -> T {
        let e = self.derivs(x, 0, Limit::FromRight);
        e.values().iter().enumerate().map(|(j, &v)| v * coeffs[e.first + j]).sum()
    }
}
