//! Basis construction by a dense linear solve on tensor-product coefficients.

use super::{
    edge_line, edge_param, functional_matrix, ElementGeometry, ElementSpec, InteriorConvention, LocalBasis, Pushforward,
    TensorPoint,
};
use crate::error::Result;
use crate::linalg::DenseMatrix;
use crate::quad_mesh::BilinearMap;
use crate::scalar::Scalar;
use crate::spline_basis::Limit;

/// Rows that vanish exactly on the element space: per edge, continuity of
/// the `(p-1)`-th trace derivative at inner knots, and per edge segment a
/// vanishing `p`-th divided difference of the physical normal derivative.
///
/// Along an edge the normal derivative is `g / det` with `g` of degree `p`
/// and `det` linear on each segment, so the divided difference vanishes
/// exactly when it is a polynomial of degree `p - 1`.
pub(crate) fn constraint_rows<T: Scalar>(map: &BilinearMap<T>, spec: ElementSpec) -> Vec<Vec<T>> {
    let (p, k, n) = (spec.degree, spec.segments, spec.n());
    let knots = spec.knots::<T>();
    let kf = T::from_usize_lossy(k);
    let mut rows = Vec::with_capacity(8 * k - 4);
    for e in 0..4 {
        for m in 1..k {
            let x = T::from_usize_lossy(m) / kf;
            let left = knots.derivs(x, p - 1, Limit::FromLeft).dense(p - 1, n);
            let right = knots.derivs(x, p - 1, Limit::FromRight).dense(p - 1, n);
            let mut row = vec![T::zero(); n * n];
            for j in 0..n {
                let (j1, j2) = edge_line(n, e, j, 0);
                row[j2 * n + j1] = right[j] - left[j];
            }
            rows.push(normalized(row));
        }
    }
    let geom = ElementGeometry::new(map);
    let pi = T::PI();
    for (e, nv) in geom.n.iter().enumerate() {
        for m in 0..k {
            let lo = T::from_usize_lossy(m) / kf;
            let half = T::lit(0.5) / kf;
            let mid = lo + half;
            let nodes: Vec<T> = (0..=p)
                .map(|l| {
                    let ang = pi * T::from_usize_lossy(2 * l + 1) / T::from_usize_lossy(2 * (p + 1));
                    mid + half * ang.cos()
                })
                .collect();
            let mut row = vec![T::zero(); n * n];
            for (l, &s) in nodes.iter().enumerate() {
                let w = T::one()
                    / nodes
                        .iter()
                        .enumerate()
                        .filter(|&(o, _)| o != l)
                        .fold(T::one(), |acc, (_, &so)| acc * (s - so));
                let xi = edge_param(e, s);
                let pf = Pushforward::new(map, xi);
                let tp = TensorPoint::new(&knots, xi, [Limit::FromRight; 2]);
                for (idx, jet) in tp.jets() {
                    let g = pf.apply(&jet);
                    row[idx] += w * (g[1] * nv[0] + g[2] * nv[1]);
                }
            }
            rows.push(normalized(row));
        }
    }
    rows
}

fn normalized<T: Scalar>(mut row: Vec<T>) -> Vec<T> {
    let m = row.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    if m > T::zero() {
        for v in &mut row {
            *v /= m;
        }
    }
    row
}

/// Builds the basis dual to the element functionals by solving, for the
/// tensor coefficients, the square system made of the space constraints and
/// the duality conditions.
pub fn build_basis_numeric<T: Scalar>(
    map: &BilinearMap<T>,
    spec: ElementSpec,
    convention: InteriorConvention,
) -> Result<LocalBasis<T>> {
    let n2 = spec.n() * spec.n();
    let cons = constraint_rows(map, spec);
    let lam = functional_matrix(map, spec, convention);
    let d = lam.rows();
    debug_assert_eq!(cons.len() + d, n2);
    let mut a = DenseMatrix::zeros(n2, n2);
    let mut b = DenseMatrix::zeros(n2, d);
    for (r, row) in cons.iter().enumerate() {
        a.row_mut(r).copy_from_slice(row);
    }
    for l in 0..d {
        let r = cons.len() + l;
        let row = lam.row(l);
        let s = row.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()));
        let s = if s > T::zero() { T::one() / s } else { T::one() };
        for (c, &v) in row.iter().enumerate() {
            a[(r, c)] = s * v;
        }
        b[(r, l)] = s;
    }
    let x = a.lu()?.solve_matrix(&b);
    let mut coeffs = DenseMatrix::zeros(d, n2);
    for f in 0..d {
        for c in 0..n2 {
            coeffs[(f, c)] = x[(c, f)];
        }
    }
    Ok(LocalBasis::from_coefficients(spec, convention, *map, coeffs))
}
