//! Local C¹ quadrilateral elements: spaces, degrees of freedom, coefficient
//! tables and physical-space evaluation.
//!
//! A local basis function is stored through its tensor-product B-spline
//! coefficients on the parameter square. The element space is
//! `S(p, p-2, k) ⊗ S(p, p-2, k)` restricted so that on every edge the trace is
//! in `S(p, p-1, k)` and the physical normal derivative is in
//! `S(p-1, p-2, k)`.

mod explicit;
mod numeric;

pub use explicit::build_basis_explicit;
pub use numeric::build_basis_numeric;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::quad_mesh::BilinearMap;
use crate::scalar::{self, Scalar, Vec2};
use crate::spline_basis::{KnotVector, Limit};

/// Value, gradient and Hessian in the order `[v, dx, dy, dxx, dxy, dyy]`.
pub type Jet<T> = [T; 6];

/// Degree and number of segments per direction of a local element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ElementSpec {
    pub degree: usize,
    pub segments: usize,
}

impl ElementSpec {
    pub fn new(degree: usize, segments: usize) -> Result<Self> {
        if degree < 3 {
            return Err(Error::Unsupported(format!("degree {degree} < 3")));
        }
        let min = 6usize.saturating_sub(degree).max(1);
        if segments < min {
            return Err(Error::Unsupported(format!(
                "degree {degree} needs at least {min} segments per direction, got {segments}"
            )));
        }
        Ok(Self { degree, segments })
    }

    /// The smallest admissible segment count, `max(1, 6 - p)`.
    pub fn default_for(degree: usize) -> Result<Self> {
        Self::new(degree, 6usize.saturating_sub(degree).max(1))
    }

    /// Tensor coefficients per direction.
    pub fn n(&self) -> usize {
        2 * self.segments + self.degree - 1
    }

    pub fn edge_points(&self) -> usize {
        self.segments + self.degree - 6
    }

    pub fn edge_normals(&self) -> usize {
        self.segments + self.degree - 5
    }

    pub fn per_edge(&self) -> usize {
        self.edge_points() + self.edge_normals()
    }

    /// Interior functionals per direction.
    pub fn interior_side(&self) -> usize {
        self.n() - 4
    }

    pub fn interior(&self) -> usize {
        self.interior_side() * self.interior_side()
    }

    /// Number of local basis functions.
    pub fn dim(&self) -> usize {
        24 + 4 * self.per_edge() + self.interior()
    }

    /// Offset of the first edge functional of local edge `e`.
    pub fn edge_offset(&self, e: usize) -> usize {
        24 + e * self.per_edge()
    }

    pub fn interior_offset(&self) -> usize {
        24 + 4 * self.per_edge()
    }

    pub fn knots<T: Scalar>(&self) -> KnotVector<T> {
        KnotVector::new(self.degree, self.segments, self.degree - 2).expect("validated spec")
    }

    pub fn trace_knots<T: Scalar>(&self) -> KnotVector<T> {
        KnotVector::new(self.degree, self.segments, self.degree - 1).expect("validated spec")
    }

    pub fn normal_knots<T: Scalar>(&self) -> KnotVector<T> {
        KnotVector::new(self.degree - 1, self.segments, self.degree - 2).expect("validated spec")
    }

    /// Edge parameters of the trace point functionals.
    pub fn edge_point_params<T: Scalar>(&self) -> Vec<T> {
        self.trace_knots::<T>().greville()[3..3 + self.edge_points()].to_vec()
    }

    /// Edge parameters of the normal-derivative functionals.
    pub fn edge_normal_params<T: Scalar>(&self) -> Vec<T> {
        self.normal_knots::<T>().greville()[2..2 + self.edge_normals()].to_vec()
    }

    /// Parameter coordinates (per direction) of the face points.
    pub fn face_params<T: Scalar>(&self) -> Vec<T> {
        self.knots::<T>().greville()[2..self.n() - 2].to_vec()
    }

    /// The local functionals in basis order: 6 per corner, then per edge the
    /// trace points followed by the normal derivatives, then the interior
    /// functionals with `j1` running fastest.
    pub fn local_dofs(&self) -> Vec<LocalDof> {
        let mut out = Vec::with_capacity(self.dim());
        for corner in 0..4 {
            for data in VertexData::ALL {
                out.push(LocalDof::Vertex { corner, data });
            }
        }
        for edge in 0..4 {
            for index in 0..self.edge_points() {
                out.push(LocalDof::EdgePoint { edge, index });
            }
            for index in 0..self.edge_normals() {
                out.push(LocalDof::EdgeNormal { edge, index });
            }
        }
        let n = self.n();
        for j2 in 2..n - 2 {
            for j1 in 2..n - 2 {
                out.push(LocalDof::Interior { j1, j2 });
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VertexData {
    Value,
    Dx,
    Dy,
    Dxx,
    Dxy,
    Dyy,
}

impl VertexData {
    pub const ALL: [VertexData; 6] =
        [VertexData::Value, VertexData::Dx, VertexData::Dy, VertexData::Dxx, VertexData::Dxy, VertexData::Dyy];

    /// Position in a [`Jet`].
    pub fn index(self) -> usize {
        self as usize
    }
}

/// A local degree of freedom of one element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LocalDof {
    Vertex { corner: usize, data: VertexData },
    /// Trace value at a mapped Greville point of local edge `edge`.
    EdgePoint { edge: usize, index: usize },
    /// Inward normal derivative at a mapped Greville point of local edge `edge`.
    EdgeNormal { edge: usize, index: usize },
    /// Interior functional anchored at tensor index `(j1, j2)`.
    Interior { j1: usize, j2: usize },
}

/// What the interior functionals measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InteriorConvention {
    /// Tensor-product coefficient `c[j1][j2]`; the dual basis functions are
    /// the tensor products themselves.
    Coefficients,
    /// Point value at the mapped face point `F(theta_j1, theta_j2)`.
    FacePoints,
}

/// Parameter corner of each local vertex.
pub fn corner_param<T: Scalar>(corner: usize) -> Vec2<T> {
    let (o, z) = (T::one(), T::zero());
    [[z, z], [o, z], [o, o], [z, o]][corner]
}

/// Point of local edge `edge` at parameter `s`, running from vertex `edge`
/// to vertex `edge + 1`.
pub fn edge_param<T: Scalar>(edge: usize, s: T) -> Vec2<T> {
    let (o, z) = (T::one(), T::zero());
    match edge {
        0 => [s, z],
        1 => [o, s],
        2 => [o - s, o],
        3 => [z, o - s],
        _ => panic!("local edge index {edge} out of range"),
    }
}

/// Tensor index of the `j`-th coefficient on the boundary line of local
/// edge `e`, counted along the edge direction; `depth` 1 gives the line next
/// to it.
pub fn edge_line(n: usize, e: usize, j: usize, depth: usize) -> (usize, usize) {
    match e {
        0 => (j, depth),
        1 => (n - 1 - depth, j),
        2 => (n - 1 - j, n - 1 - depth),
        3 => (depth, n - 1 - j),
        _ => panic!("local edge index {e} out of range"),
    }
}

/// Precomputed edge, normal and corner quantities of one quad.
///
/// Arrays are indexed by `k - 1` for the vertex/edge number `k = 1..4`; the
/// accessor methods take any integer `k` and reduce it modulo 4.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementGeometry<T> {
    pub vertices: [Vec2<T>; 4],
    /// `t(k) = v(k+1) - v(k)`.
    pub t: [Vec2<T>; 4],
    /// `a(k) = det(t(k-1), t(k))`.
    pub a: [T; 4],
    /// Inward unit normals.
    pub n: [Vec2<T>; 4],
    /// `q(k) = v(k) - v(k+1) + v(k+2) - v(k+3)`.
    pub q: [Vec2<T>; 4],
    /// `t(k-1)·t(k) / |t(k)|²`.
    pub b0: [T; 4],
    /// `t(k+1)·t(k) / |t(k)|²`.
    pub b1: [T; 4],
}

fn wrap(k: isize) -> usize {
    (k - 1).rem_euclid(4) as usize
}

impl<T: Scalar> ElementGeometry<T> {
    pub fn new(map: &BilinearMap<T>) -> Self {
        let v = map.corners;
        let t: [Vec2<T>; 4] = std::array::from_fn(|i| scalar::sub(v[(i + 1) % 4], v[i]));
        let a = std::array::from_fn(|i| scalar::det(t[(i + 3) % 4], t[i]));
        let n = std::array::from_fn(|i| scalar::scale(T::one() / scalar::norm(t[i]), scalar::perp(t[i])));
        let q = std::array::from_fn(|i| {
            scalar::add(scalar::sub(v[i], v[(i + 1) % 4]), scalar::sub(v[(i + 2) % 4], v[(i + 3) % 4]))
        });
        let b0 = std::array::from_fn(|i| scalar::dot(t[(i + 3) % 4], t[i]) / scalar::dot(t[i], t[i]));
        let b1 = std::array::from_fn(|i| scalar::dot(t[(i + 1) % 4], t[i]) / scalar::dot(t[i], t[i]));
        Self { vertices: v, t, a, n, q, b0, b1 }
    }

    pub fn t(&self, k: isize) -> Vec2<T> {
        self.t[wrap(k)]
    }

    pub fn a(&self, k: isize) -> T {
        self.a[wrap(k)]
    }

    pub fn n(&self, k: isize) -> Vec2<T> {
        self.n[wrap(k)]
    }

    pub fn q(&self, k: isize) -> Vec2<T> {
        self.q[wrap(k)]
    }

    pub fn b0(&self, k: isize) -> T {
        self.b0[wrap(k)]
    }

    pub fn b1(&self, k: isize) -> T {
        self.b1[wrap(k)]
    }

    pub fn edge_length(&self, k: isize) -> T {
        scalar::norm(self.t(k))
    }

    /// `t(k)_i t(k)_j` (0-based `i`, `j`).
    pub fn tt(&self, k: isize, i: usize, j: usize) -> T {
        let t = self.t(k);
        t[i] * t[j]
    }

    /// `t(k-1)_i t(k)_j + t(k-1)_j t(k)_i`.
    pub fn qq(&self, k: isize, i: usize, j: usize) -> T {
        let (s, t) = (self.t(k - 1), self.t(k));
        s[i] * t[j] + s[j] * t[i]
    }

    /// `n(k)_i t(k)_j + n(k)_j t(k)_i`.
    pub fn nn(&self, k: isize, i: usize, j: usize) -> T {
        let (n, t) = (self.n(k), self.t(k));
        n[i] * t[j] + n[j] * t[i]
    }
}

/// Square table of tensor-product coefficients of one function.
///
/// Stored with `j2` (the second parameter direction) as the slow index from
/// bottom to top. The display form used for printing lists rows from the
/// top, i.e. from the highest `j2` down.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffTable<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> CoeffTable<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn unit(n: usize, j1: usize, j2: usize) -> Self {
        let mut t = Self::zeros(n);
        t.set(j1, j2, T::one());
        t
    }

    pub fn from_coefficients(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Dimension(format!("{} coefficients for a {n}x{n} table", data.len())));
        }
        Ok(Self { n, data })
    }

    /// Builds a table from rows listed top to bottom.
    pub fn from_display_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("coefficient table must be square".into()));
        }
        let mut t = Self::zeros(n);
        for (r, row) in rows.iter().enumerate() {
            for (j1, &v) in row.iter().enumerate() {
                t.set(j1, n - 1 - r, v);
            }
        }
        Ok(t)
    }

    pub fn display_rows(&self) -> Vec<Vec<T>> {
        (0..self.n).rev().map(|j2| (0..self.n).map(|j1| self.get(j1, j2)).collect()).collect()
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, j1: usize, j2: usize) -> T {
        self.data[j2 * self.n + j1]
    }

    pub fn set(&mut self, j1: usize, j2: usize, v: T) {
        self.data[j2 * self.n + j1] = v;
    }

    pub fn add(&mut self, j1: usize, j2: usize, v: T) {
        self.data[j2 * self.n + j1] += v;
    }

    /// Coefficients with index `j2 * n + j1`.
    pub fn coefficients(&self) -> &[T] {
        &self.data
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: T, other: &Self) {
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&v| s * v).collect() }
    }

    /// Rotation that carries the pattern at the corner of vertex 1 to the
    /// corner of vertex `k` (1-based): `k - 1` quarter turns counter-clockwise.
    pub fn rotate(&self, k: usize) -> Self {
        let mut out = self.clone();
        for _ in 0..(k + 3) % 4 {
            let mut next = Self::zeros(self.n);
            for j2 in 0..self.n {
                for j1 in 0..self.n {
                    next.set(self.n - 1 - j2, j1, out.get(j1, j2));
                }
            }
            out = next;
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).map(|(&a, &b)| (a - b).abs()).fold(T::zero(), T::max)
    }
}

/// Chain rule from parameter to physical derivatives at one parameter point.
#[derive(Clone, Copy, Debug)]
pub struct Pushforward<T> {
    jinv: [[T; 2]; 2],
    mixed: Vec2<T>,
    pub det: T,
}

impl<T: Scalar> Pushforward<T> {
    pub fn new(map: &BilinearMap<T>, xi: Vec2<T>) -> Self {
        let j = map.jacobian(xi);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let jinv = [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]];
        Self { jinv, mixed: map.mixed(), det }
    }

    /// Maps parameter derivatives of `f ∘ F` to physical derivatives of `f`.
    pub fn apply(&self, r: &Jet<T>) -> Jet<T> {
        let ji = &self.jinv;
        let g0 = ji[0][0] * r[1] + ji[1][0] * r[2];
        let g1 = ji[0][1] * r[1] + ji[1][1] * r[2];
        let m = [[r[3], r[4] - (g0 * self.mixed[0] + g1 * self.mixed[1])], [T::zero(), r[5]]];
        let m = [[m[0][0], m[0][1]], [m[0][1], m[1][1]]];
        let h = |c: usize, d: usize| {
            let mut s = T::zero();
            for a in 0..2 {
                for b in 0..2 {
                    s += ji[a][c] * m[a][b] * ji[b][d];
                }
            }
            s
        };
        [r[0], g0, g1, h(0, 0), h(0, 1), h(1, 1)]
    }
}

/// Parameter-space jets of the non-vanishing tensor-product functions at a point.
pub(crate) struct TensorPoint<T> {
    n: usize,
    first: [usize; 2],
    du: Vec<Vec<T>>,
    dv: Vec<Vec<T>>,
}

impl<T: Scalar> TensorPoint<T> {
    pub(crate) fn new(knots: &KnotVector<T>, xi: Vec2<T>, limits: [Limit; 2]) -> Self {
        let u = knots.derivs(xi[0], 2, limits[0]);
        let v = knots.derivs(xi[1], 2, limits[1]);
        Self { n: knots.dim(), first: [u.first, v.first], du: u.derivs, dv: v.derivs }
    }

    /// `(tensor index, parameter jet)` of every non-vanishing function.
    pub(crate) fn jets(&self) -> impl Iterator<Item = (usize, Jet<T>)> + '_ {
        let w = self.du[0].len();
        (0..w).flat_map(move |b| {
            (0..w).map(move |a| {
                let (u, v) = (&self.du, &self.dv);
                let idx = (self.first[1] + b) * self.n + self.first[0] + a;
                (
                    idx,
                    [
                        u[0][a] * v[0][b],
                        u[1][a] * v[0][b],
                        u[0][a] * v[1][b],
                        u[2][a] * v[0][b],
                        u[1][a] * v[1][b],
                        u[0][a] * v[2][b],
                    ],
                )
            })
        })
    }
}

/// Applies every local functional to every tensor-product function.
/// Row `l` holds functional `l`, column `j2 * n + j1` the tensor function.
pub(crate) fn functional_matrix<T: Scalar>(
    map: &BilinearMap<T>,
    spec: ElementSpec,
    convention: InteriorConvention,
) -> DenseMatrix<T> {
    let n = spec.n();
    let knots = spec.knots::<T>();
    let dofs = spec.local_dofs();
    let mut m = DenseMatrix::zeros(dofs.len(), n * n);
    let edge_pts: Vec<T> = spec.edge_point_params();
    let edge_nrm: Vec<T> = spec.edge_normal_params();
    let face: Vec<T> = spec.face_params();
    let geom = ElementGeometry::new(map);
    for (row, dof) in dofs.iter().enumerate() {
        let (xi, weights): (Vec2<T>, Jet<T>) = match *dof {
            LocalDof::Vertex { corner, data } => {
                let mut w = [T::zero(); 6];
                w[data.index()] = T::one();
                (corner_param(corner), w)
            }
            LocalDof::EdgePoint { edge, index } => {
                let mut w = [T::zero(); 6];
                w[0] = T::one();
                (edge_param(edge, edge_pts[index]), w)
            }
            LocalDof::EdgeNormal { edge, index } => {
                let nv = geom.n[edge];
                let z = T::zero();
                (edge_param(edge, edge_nrm[index]), [z, nv[0], nv[1], z, z, z])
            }
            LocalDof::Interior { j1, j2 } => match convention {
                InteriorConvention::Coefficients => {
                    m[(row, j2 * n + j1)] = T::one();
                    continue;
                }
                InteriorConvention::FacePoints => {
                    let mut w = [T::zero(); 6];
                    w[0] = T::one();
                    ([face[j1 - 2], face[j2 - 2]], w)
                }
            },
        };
        let pf = Pushforward::new(map, xi);
        let tp = TensorPoint::new(&knots, xi, [Limit::FromRight; 2]);
        for (idx, jet) in tp.jets() {
            let phys = pf.apply(&jet);
            m[(row, idx)] = phys.iter().zip(&weights).map(|(&a, &b)| a * b).sum();
        }
    }
    m
}

/// The local basis of one element.
#[derive(Clone, Debug)]
pub struct LocalBasis<T> {
    spec: ElementSpec,
    convention: InteriorConvention,
    map: BilinearMap<T>,
    knots: KnotVector<T>,
    /// Row `f` holds the tensor coefficients of basis function `f`.
    coeffs: DenseMatrix<T>,
}

impl<T: Scalar> LocalBasis<T> {
    pub(crate) fn from_coefficients(
        spec: ElementSpec,
        convention: InteriorConvention,
        map: BilinearMap<T>,
        coeffs: DenseMatrix<T>,
    ) -> Self {
        Self { spec, convention, map, knots: spec.knots(), coeffs }
    }

    pub fn spec(&self) -> ElementSpec {
        self.spec
    }

    pub fn convention(&self) -> InteriorConvention {
        self.convention
    }

    pub fn map(&self) -> &BilinearMap<T> {
        &self.map
    }

    pub fn knots(&self) -> &KnotVector<T> {
        &self.knots
    }

    pub fn dim(&self) -> usize {
        self.coeffs.rows()
    }

    pub fn dofs(&self) -> Vec<LocalDof> {
        self.spec.local_dofs()
    }

    pub fn coefficient_matrix(&self) -> &DenseMatrix<T> {
        &self.coeffs
    }

    pub fn table(&self, f: usize) -> CoeffTable<T> {
        CoeffTable { n: self.spec.n(), data: self.coeffs.row(f).to_vec() }
    }

    pub fn tables(&self) -> Vec<CoeffTable<T>> {
        (0..self.dim()).map(|f| self.table(f)).collect()
    }

    /// Functional `l` applied to basis function `f`, as entry `(l, f)`.
    pub fn duality_matrix(&self) -> DenseMatrix<T> {
        let lam = functional_matrix(&self.map, self.spec, self.convention);
        let d = self.dim();
        let mut out = DenseMatrix::zeros(d, d);
        for l in 0..d {
            let row = lam.row(l);
            for f in 0..d {
                out[(l, f)] = row.iter().zip(self.coeffs.row(f)).map(|(&a, &b)| a * b).sum();
            }
        }
        out
    }

    /// Parameter-space jets of all basis functions.
    pub fn eval_param(&self, xi: Vec2<T>, limits: [Limit; 2]) -> Vec<Jet<T>> {
        let tp = TensorPoint::new(&self.knots, xi, limits);
        let mut out = vec![[T::zero(); 6]; self.dim()];
        for (idx, jet) in tp.jets() {
            for (f, o) in out.iter_mut().enumerate() {
                let c = self.coeffs[(f, idx)];
                if c != T::zero() {
                    for (a, b) in o.iter_mut().zip(jet) {
                        *a += c * b;
                    }
                }
            }
        }
        out
    }

    /// Physical values, gradients and Hessians of all basis functions at `F(xi)`.
    pub fn eval(&self, xi: Vec2<T>) -> Vec<Jet<T>> {
        self.eval_with(xi, [Limit::FromRight; 2])
    }

    pub fn eval_with(&self, xi: Vec2<T>, limits: [Limit; 2]) -> Vec<Jet<T>> {
        let pf = Pushforward::new(&self.map, xi);
        let tp = TensorPoint::new(&self.knots, xi, limits);
        let mut out = vec![[T::zero(); 6]; self.dim()];
        for (idx, jet) in tp.jets() {
            let phys = pf.apply(&jet);
            for (f, o) in out.iter_mut().enumerate() {
                let c = self.coeffs[(f, idx)];
                if c != T::zero() {
                    for (a, b) in o.iter_mut().zip(phys) {
                        *a += c * b;
                    }
                }
            }
        }
        out
    }

    /// Tensor coefficients of `sum_f local[f] * basis_f`.
    pub fn combine(&self, local: &[T]) -> Vec<T> {
        let nn = self.coeffs.cols();
        let mut c = vec![T::zero(); nn];
        for (f, &w) in local.iter().enumerate() {
            if w != T::zero() {
                for (a, &b) in c.iter_mut().zip(self.coeffs.row(f)) {
                    *a += w * b;
                }
            }
        }
        c
    }

    /// Physical jet at `F(xi)` of the function with tensor coefficients `c`.
    pub fn eval_tensor(&self, c: &[T], xi: Vec2<T>, limits: [Limit; 2]) -> Jet<T> {
        let pf = Pushforward::new(&self.map, xi);
        let tp = TensorPoint::new(&self.knots, xi, limits);
        let mut r = [T::zero(); 6];
        for (idx, jet) in tp.jets() {
            for (a, b) in r.iter_mut().zip(jet) {
                *a += c[idx] * b;
            }
        }
        pf.apply(&r)
    }

    /// Rebuilds the basis so that the interior functionals are point values
    /// at the face points; vertex and edge basis functions are corrected to
    /// vanish there.
    pub fn to_face_points(&self) -> Result<Self> {
        if self.convention == InteriorConvention::FacePoints {
            return Ok(self.clone());
        }
        let off = self.spec.interior_offset();
        let m = self.spec.interior();
        let face = self.spec.face_params::<T>();
        let side = self.spec.interior_side();
        let points: Vec<Vec2<T>> =
            (0..m).map(|i| [face[i % side], face[i / side]]).collect();
        let d = self.dim();
        // values[m][f] = basis_f at face point m
        let mut values = DenseMatrix::zeros(m, d);
        for (pi, &xi) in points.iter().enumerate() {
            let tp = TensorPoint::new(&self.knots, xi, [Limit::FromRight; 2]);
            for (idx, jet) in tp.jets() {
                for f in 0..d {
                    values[(pi, f)] += self.coeffs[(f, idx)] * jet[0];
                }
            }
        }
        let mut e = DenseMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                e[(i, j)] = values[(i, off + j)];
            }
        }
        let lu = e.lu()?;
        let nn = self.coeffs.cols();
        let mut out = self.coeffs.clone();
        for f in 0..off {
            let w = lu.solve(&values.column(f));
            for (mu, &wm) in w.iter().enumerate() {
                for c in 0..nn {
                    let v = self.coeffs[(off + mu, c)];
                    out[(f, c)] -= wm * v;
                }
            }
        }
        for pm in 0..m {
            let mut unit = vec![T::zero(); m];
            unit[pm] = T::one();
            let w = lu.solve(&unit);
            for c in 0..nn {
                out[(off + pm, c)] = (0..m).map(|mu| w[mu] * self.coeffs[(off + mu, c)]).sum();
            }
        }
        Ok(Self { convention: InteriorConvention::FacePoints, coeffs: out, ..self.clone() })
    }
}

#[cfg(test)]
mod tests;
