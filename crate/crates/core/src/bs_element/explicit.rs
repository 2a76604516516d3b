//! Closed-form coefficient tables for degrees 3, 4 and 5 at the default
//! segment counts, with interior functionals given by tensor coefficients.

use super::{CoeffTable, ElementGeometry, ElementSpec, InteriorConvention, LocalBasis};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::quad_mesh::BilinearMap;
use crate::scalar::Scalar;

/// Corner patterns of one vertex, before rotation to that vertex.
struct VertexPatterns<T> {
    /// Along the edge arriving at the vertex (left column).
    left: CoeffTable<T>,
    /// Along the edge leaving the vertex (bottom row).
    bottom: CoeffTable<T>,
    value: CoeffTable<T>,
    /// Gradient corrections, one per component.
    grad: [CoeffTable<T>; 2],
    /// Hessian corrections for `(0,0)`, `(0,1)`, `(1,1)`.
    hess: [CoeffTable<T>; 3],
}

/// Prefactors of the combination formulas.
struct Weights<T> {
    grad: T,
    grad_edge: T,
    hess: T,
    hess_edge: T,
}

fn r<T: Scalar>(num: f64, den: f64) -> T {
    T::lit(num) / T::lit(den)
}

fn table<T: Scalar>(n: usize, entries: &[(usize, usize, T)]) -> CoeffTable<T> {
    let mut t = CoeffTable::zeros(n);
    for &(j1, j2, v) in entries {
        t.add(j1, j2, v);
    }
    t
}

const HESS_INDEX: [(usize, usize); 3] = [(0, 0), (0, 1), (1, 1)];

fn edge_table<T: Scalar>(p: usize, g: &ElementGeometry<T>, i: isize) -> CoeffTable<T> {
    let (a0, a1, len) = (g.a(i), g.a(i + 1), g.edge_length(i));
    let (n, entries): (usize, Vec<(usize, usize, T)>) = match p {
        5 => {
            let s = r::<T>(8.0, 25.0) / len;
            (6, vec![(2, 1, s * a0), (3, 1, s * a1)])
        }
        4 => {
            let s = r::<T>(1.0, 32.0) / len;
            let (two, three) = (T::lit(2.0), T::lit(3.0));
            (7, vec![(2, 1, s * two * a0), (3, 1, s * three * (a0 + a1)), (4, 1, s * two * a1)])
        }
        3 => {
            let s = r::<T>(2.0, 81.0) / len;
            let (two, three) = (T::lit(2.0), T::lit(3.0));
            (
                8,
                vec![
                    (2, 1, s * a0),
                    (3, 1, s * (three * a0 + two * a1)),
                    (4, 1, s * (two * a0 + three * a1)),
                    (5, 1, s * a1),
                ],
            )
        }
        _ => unreachable!("degree checked by caller"),
    };
    table(n, &entries).rotate(i as usize)
}

fn patterns_p5<T: Scalar>(g: &ElementGeometry<T>, k: isize) -> VertexPatterns<T> {
    let n = 6;
    let one = T::one();
    let half = r::<T>(1.0, 2.0);
    let c35 = r::<T>(3.0, 5.0);
    let left = table(
        n,
        &[(1, 3, -c35 * g.b0(k - 1)), (0, 2, one), (1, 2, one + c35 * g.b1(k - 1)), (0, 1, half), (1, 1, half)],
    );
    let bottom = table(
        n,
        &[(1, 1, half), (2, 1, one + c35 * g.b0(k)), (3, 1, -c35 * g.b1(k)), (1, 0, half), (2, 0, one)],
    );
    let value = table(n, &[(0, 1, half), (0, 0, one), (1, 0, half)]);
    let grad = std::array::from_fn(|i| {
        table(
            n,
            &[
                (1, 2, -r::<T>(1.0, 5.0) * g.t(k - 2)[i]),
                (1, 1, r::<T>(1.0, 10.0) * g.q(k)[i]),
                (2, 1, r::<T>(1.0, 5.0) * g.t(k + 1)[i]),
            ],
        )
    });
    let hess = HESS_INDEX.map(|(i, j)| {
        let (tl, tb) = (g.tt(k - 1, i, j), g.tt(k, i, j));
        table(
            n,
            &[
                (1, 2, r::<T>(1.0, 5.0) * g.qq(k - 1, i, j)),
                (0, 1, -half * tl),
                (1, 1, -r::<T>(2.0, 5.0) * g.qq(k, i, j) - half * tl - half * tb),
                (2, 1, r::<T>(1.0, 5.0) * g.qq(k + 1, i, j)),
                (1, 0, -half * tb),
            ],
        )
    });
    VertexPatterns { left, bottom, value, grad, hess }
}

fn patterns_p4<T: Scalar>(g: &ElementGeometry<T>, k: isize) -> VertexPatterns<T> {
    let n = 7;
    let (third, two3, half) = (r::<T>(1.0, 3.0), r::<T>(2.0, 3.0), r::<T>(1.0, 2.0));
    let (e8, e316) = (r::<T>(1.0, 8.0), r::<T>(3.0, 16.0));
    let (b0l, b1l, b0, b1) = (g.b0(k - 1), g.b1(k - 1), g.b0(k), g.b1(k));
    let left = table(
        n,
        &[
            (1, 4, -e8 * b0l),
            (0, 3, half),
            (1, 3, half + e316 * (b1l - b0l)),
            (0, 2, two3),
            (1, 2, two3 + e8 * b1l),
            (0, 1, third),
            (1, 1, third),
        ],
    );
    let bottom = table(
        n,
        &[
            (1, 1, third),
            (2, 1, two3 + e8 * b0),
            (3, 1, half + e316 * (b0 - b1)),
            (4, 1, -e8 * b1),
            (1, 0, third),
            (2, 0, two3),
            (3, 0, half),
        ],
    );
    let value = table(
        n,
        &[
            (0, 2, third),
            (1, 2, third),
            (0, 1, two3),
            (1, 1, third),
            (2, 1, third),
            (0, 0, T::one()),
            (1, 0, two3),
            (2, 0, third),
        ],
    );
    let (e24, e4, e6) = (r::<T>(1.0, 24.0), r::<T>(1.0, 4.0), r::<T>(1.0, 6.0));
    let grad = std::array::from_fn(|i| {
        let (tl, tr, q) = (g.t(k - 2)[i], g.t(k + 1)[i], g.q(k)[i]);
        table(
            n,
            &[
                (1, 3, -e24 * tl),
                (1, 2, -e4 * tl - e6 * q),
                (1, 1, e24 * q),
                (2, 1, e4 * tr - e6 * q),
                (3, 1, e24 * tr),
            ],
        )
    });
    let (e32, e16) = (r::<T>(1.0, 32.0), r::<T>(1.0, 16.0));
    let hess = HESS_INDEX.map(|(i, j)| {
        let (tl, tb) = (g.tt(k - 1, i, j), g.tt(k, i, j));
        let (ql, qk, qr) = (g.qq(k - 1, i, j), g.qq(k, i, j), g.qq(k + 1, i, j));
        table(
            n,
            &[
                (1, 3, e32 * ql),
                (0, 2, -e6 * tl),
                (1, 2, -e6 * tl - e8 * qk + e16 * ql),
                (0, 1, -third * tl),
                (1, 1, -third * tl - third * tb - e316 * qk),
                (2, 1, -e8 * qk + e16 * qr - e6 * tb),
                (3, 1, e32 * qr),
                (1, 0, -third * tb),
                (2, 0, -e6 * tb),
            ],
        )
    });
    VertexPatterns { left, bottom, value, grad, hess }
}

fn patterns_p3<T: Scalar>(g: &ElementGeometry<T>, k: isize) -> VertexPatterns<T> {
    let n = 8;
    let (third, two3) = (r::<T>(1.0, 3.0), r::<T>(2.0, 3.0));
    let (e9, e6, e18) = (r::<T>(1.0, 9.0), r::<T>(1.0, 6.0), r::<T>(1.0, 18.0));
    let (b0l, b1l, b0, b1) = (g.b0(k - 1), g.b1(k - 1), g.b0(k), g.b1(k));
    let left = table(
        n,
        &[
            (1, 5, -e18 * b0l),
            (0, 4, third),
            (1, 4, third + e9 * b1l - e6 * b0l),
            (0, 3, two3),
            (1, 3, two3 + e6 * b1l - e9 * b0l),
            (0, 2, two3),
            (1, 2, two3 + e18 * b1l),
            (0, 1, third),
            (1, 1, third),
        ],
    );
    let bottom = table(
        n,
        &[
            (1, 1, third),
            (2, 1, two3 + e18 * b0),
            (3, 1, two3 + e6 * b0 - e9 * b1),
            (4, 1, third + e9 * b0 - e6 * b1),
            (5, 1, -e18 * b1),
            (1, 0, third),
            (2, 0, two3),
            (3, 0, two3),
            (4, 0, third),
        ],
    );
    let value = table(
        n,
        &[
            (0, 2, third),
            (1, 2, third),
            (0, 1, two3),
            (1, 1, third),
            (2, 1, third),
            (0, 0, T::one()),
            (1, 0, two3),
            (2, 0, third),
        ],
    );
    let (e54, e11_54, e5_18, e27) = (r::<T>(1.0, 54.0), r::<T>(11.0, 54.0), r::<T>(5.0, 18.0), r::<T>(1.0, 27.0));
    let grad = std::array::from_fn(|i| {
        let (tl, tr, q) = (g.t(k - 2)[i], g.t(k + 1)[i], g.q(k)[i]);
        table(
            n,
            &[
                (1, 3, -e18 * tl - e54 * q),
                (1, 2, -e5_18 * tl - e11_54 * q),
                (1, 1, e27 * q),
                (2, 1, e5_18 * tr - e11_54 * q),
                (3, 1, e18 * tr - e54 * q),
            ],
        )
    });
    let (e72, e11_72, e36) = (r::<T>(1.0, 72.0), r::<T>(11.0, 72.0), r::<T>(1.0, 36.0));
    let hess = HESS_INDEX.map(|(i, j)| {
        let (tl, tb) = (g.tt(k - 1, i, j), g.tt(k, i, j));
        let (ql, qk, qr) = (g.qq(k - 1, i, j), g.qq(k, i, j), g.qq(k + 1, i, j));
        table(
            n,
            &[
                (1, 3, -e72 * qk + e36 * ql),
                (0, 2, -e6 * tl),
                (1, 2, -e6 * tl - e11_72 * qk + e18 * ql),
                (0, 1, -third * tl),
                (1, 1, -third * tl - third * tb - e6 * qk),
                (2, 1, -e11_72 * qk + e18 * qr - e6 * tb),
                (3, 1, e36 * qr - e72 * qk),
                (1, 0, -third * tb),
                (2, 0, -e6 * tb),
            ],
        )
    });
    VertexPatterns { left, bottom, value, grad, hess }
}

/// Builds the local basis of degree 3, 4 or 5 from the closed-form tables.
///
/// Interior functionals are tensor coefficients; use
/// [`LocalBasis::to_face_points`] to switch to point values.
pub fn build_basis_explicit<T: Scalar>(map: &BilinearMap<T>, degree: usize) -> Result<LocalBasis<T>> {
    if !(3..=5).contains(&degree) {
        return Err(Error::Unsupported(format!("closed-form tables exist for degrees 3-5, not {degree}")));
    }
    let spec = ElementSpec::default_for(degree)?;
    let n = spec.n();
    let g = ElementGeometry::new(map);
    let w: Weights<T> = match degree {
        5 => Weights { grad: r(2.0, 5.0), grad_edge: r(5.0, 16.0), hess: T::lit(20.0), hess_edge: T::lit(32.0) },
        4 => Weights { grad: r(3.0, 8.0), grad_edge: r(1.0, 4.0), hess: T::lit(24.0), hess_edge: T::lit(48.0) },
        _ => Weights { grad: r(1.0, 3.0), grad_edge: r(1.0, 8.0), hess: T::lit(27.0), hess_edge: T::lit(96.0) },
    };
    let edges: Vec<CoeffTable<T>> = (1..=4).map(|i| edge_table(degree, &g, i)).collect();
    let edge = |i: isize| &edges[(i - 1).rem_euclid(4) as usize];

    let mut out: Vec<CoeffTable<T>> = Vec::with_capacity(spec.dim());
    for k in 1..=4isize {
        let pat = match degree {
            5 => patterns_p5(&g, k),
            4 => patterns_p4(&g, k),
            _ => patterns_p3(&g, k),
        };
        let ku = k as usize;

        let mut v = pat.value.clone();
        v.axpy(T::one(), &pat.left);
        v.axpy(T::one(), &pat.bottom);
        out.push(v.rotate(ku));

        for i in 0..2 {
            let mut inner = pat.grad[i].clone();
            inner.axpy(-g.t(k - 1)[i], &pat.left);
            inner.axpy(g.t(k)[i], &pat.bottom);
            let mut d = inner.rotate(ku).scaled(w.grad);
            d.axpy(-w.grad_edge * g.n(k)[i], edge(k));
            d.axpy(-w.grad_edge * g.n(k - 1)[i], edge(k - 1));
            out.push(d);
        }

        for (h, &(i, j)) in HESS_INDEX.iter().enumerate() {
            let lambda = if i == j { T::one() } else { T::lit(2.0) };
            let mut inner = pat.hess[h].clone();
            inner.axpy(g.tt(k - 1, i, j), &pat.left);
            inner.axpy(g.tt(k, i, j), &pat.bottom);
            let mut d = inner.rotate(ku).scaled(lambda / w.hess);
            d.axpy(-lambda / w.hess_edge * g.nn(k, i, j), edge(k));
            d.axpy(lambda / w.hess_edge * g.nn(k - 1, i, j), edge(k - 1));
            out.push(d);
        }
    }
    out.extend(edges.iter().cloned());
    for j2 in 2..n - 2 {
        for j1 in 2..n - 2 {
            out.push(CoeffTable::unit(n, j1, j2));
        }
    }
    debug_assert_eq!(out.len(), spec.dim());

    let mut coeffs = DenseMatrix::zeros(out.len(), n * n);
    for (f, t) in out.iter().enumerate() {
        coeffs.row_mut(f).copy_from_slice(t.coefficients());
    }
    Ok(LocalBasis::from_coefficients(spec, InteriorConvention::Coefficients, *map, coeffs))
}
