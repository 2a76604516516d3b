//! Conforming quadrilateral meshes with bilinear element maps.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar, Vec2};

/// A mesh edge. The global orientation runs from `lo` to `hi` (`lo < hi`).
#[derive(Clone, Debug, PartialEq)]
pub struct Edge<T> {
    pub lo: usize,
    pub hi: usize,
    /// One or two adjacent quads, in order of first appearance.
    pub quads: Vec<usize>,
    /// Unit normal: the direction `hi - lo` rotated by +90 degrees.
    pub normal: Vec2<T>,
    pub midpoint: Vec2<T>,
    pub length: T,
}

impl<T> Edge<T> {
    pub fn is_boundary(&self) -> bool {
        self.quads.len() == 1
    }
}

/// A convex quadrilateral with counter-clockwise vertices.
///
/// Local edge `i` runs from `vertices[i]` to `vertices[(i + 1) % 4]`;
/// `reversed[i]` is set when that direction is opposite to the global one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quad {
    pub vertices: [usize; 4],
    pub edges: [usize; 4],
    pub reversed: [bool; 4],
}

/// The bilinear map from the unit square onto a quad.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BilinearMap<T> {
    pub corners: [Vec2<T>; 4],
}

impl<T: Scalar> BilinearMap<T> {
    pub fn new(corners: [Vec2<T>; 4]) -> Self {
        Self { corners }
    }

    pub fn eval(&self, xi: Vec2<T>) -> Vec2<T> {
        let [v1, v2, v3, v4] = self.corners;
        let (s, t) = (xi[0], xi[1]);
        let one = T::one();
        let w = [(one - s) * (one - t), s * (one - t), s * t, (one - s) * t];
        [
            w[0] * v1[0] + w[1] * v2[0] + w[2] * v3[0] + w[3] * v4[0],
            w[0] * v1[1] + w[1] * v2[1] + w[2] * v3[1] + w[3] * v4[1],
        ]
    }

    /// Jacobian `J[r][c] = dF_r / d xi_c`.
    pub fn jacobian(&self, xi: Vec2<T>) -> [[T; 2]; 2] {
        let [v1, v2, _, v4] = self.corners;
        let q = self.mixed();
        // dF/dxi1 = (v2 - v1) + xi2 q, dF/dxi2 = (v4 - v1) + xi1 q
        let c1 = scalar::add(scalar::sub(v2, v1), scalar::scale(xi[1], q));
        let c2 = scalar::add(scalar::sub(v4, v1), scalar::scale(xi[0], q));
        [[c1[0], c2[0]], [c1[1], c2[1]]]
    }

    /// The only nonzero second derivative, `d^2 F / d xi1 d xi2 = v1 - v2 + v3 - v4`.
    pub fn mixed(&self) -> Vec2<T> {
        let [v1, v2, v3, v4] = self.corners;
        [v1[0] - v2[0] + v3[0] - v4[0], v1[1] - v2[1] + v3[1] - v4[1]]
    }

    pub fn det_jacobian(&self, xi: Vec2<T>) -> T {
        let j = self.jacobian(xi);
        j[0][0] * j[1][1] - j[0][1] * j[1][0]
    }

    /// Corner determinants `det(t_prev, t_next)` at each vertex; the Jacobian
    /// determinant at the corner of vertex `i` equals entry `i`.
    pub fn corner_dets(&self) -> [T; 4] {
        let c = self.corners;
        let mut out = [T::zero(); 4];
        for (i, slot) in out.iter_mut().enumerate() {
            let prev = scalar::sub(c[i], c[(i + 3) % 4]);
            let next = scalar::sub(c[(i + 1) % 4], c[i]);
            *slot = scalar::det(prev, next);
        }
        out
    }

    /// Parameter point of `x`, by Newton iteration from the center.
    pub fn inverse(&self, x: Vec2<T>) -> Option<Vec2<T>> {
        let half = T::lit(0.5);
        let mut xi = [half, half];
        for _ in 0..50 {
            let f = scalar::sub(self.eval(xi), x);
            let j = self.jacobian(xi);
            let d = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if d == T::zero() {
                return None;
            }
            let dx = (j[1][1] * f[0] - j[0][1] * f[1]) / d;
            let dy = (-j[1][0] * f[0] + j[0][0] * f[1]) / d;
            xi = [xi[0] - dx, xi[1] - dy];
            if dx.abs() + dy.abs() < T::tolerance() * T::lit(1e-2) {
                break;
            }
        }
        Some(xi)
    }
}

/// Per-quad and global size and shape measures.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshGeometry<T> {
    /// Longest edge of each quad.
    pub h_quad: Vec<T>,
    /// Minimum angle over the four triangles of the two diagonal splits.
    pub rho_quad: Vec<T>,
    /// Minimum Jacobian determinant of each element map (attained at a corner).
    pub min_det: Vec<T>,
    pub h: T,
    pub rho: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadMesh<T> {
    vertices: Vec<Vec2<T>>,
    quads: Vec<Quad>,
    edges: Vec<Edge<T>>,
}

#[derive(Serialize, Deserialize)]
struct MeshFile {
    vertices: Vec<[f64; 2]>,
    quads: Vec<[usize; 4]>,
}

impl<T: Scalar> QuadMesh<T> {
    /// Builds and validates a mesh from vertex coordinates and CCW quads.
    pub fn new(vertices: Vec<Vec2<T>>, quads: Vec<[usize; 4]>) -> Result<Self> {
        if quads.is_empty() {
            return Err(Error::InvalidMesh("mesh has no quads".into()));
        }
        for (i, v) in vertices.iter().enumerate() {
            if !(v[0].is_finite() && v[1].is_finite()) {
                return Err(Error::InvalidMesh(format!("vertex {i} has non-finite coordinates")));
            }
        }
        let mut used = vec![false; vertices.len()];
        for (q, vs) in quads.iter().enumerate() {
            for (a, &v) in vs.iter().enumerate() {
                if v >= vertices.len() {
                    return Err(Error::InvalidMesh(format!("quad {q} references missing vertex {v}")));
                }
                if vs[..a].contains(&v) {
                    return Err(Error::InvalidMesh(format!("quad {q} repeats vertex {v}")));
                }
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::InvalidMesh(format!("vertex {v} belongs to no quad")));
        }

        for (q, vs) in quads.iter().enumerate() {
            let map = BilinearMap::new(vs.map(|v| vertices[v]));
            let h = (0..4)
                .map(|i| scalar::norm(scalar::sub(map.corners[(i + 1) % 4], map.corners[i])))
                .fold(T::zero(), T::max);
            let tol = T::lit(1e-10) * h * h;
            for (i, a) in map.corner_dets().into_iter().enumerate() {
                if !(a > tol) {
                    return Err(Error::NonConvex { quad: q, corner: i + 1, value: a.as_f64() });
                }
            }
        }

        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge<T>> = Vec::new();
        let mut first_reversed: Vec<bool> = Vec::new();
        let mut built = Vec::with_capacity(quads.len());
        for (q, vs) in quads.iter().enumerate() {
            let mut quad = Quad { vertices: *vs, edges: [0; 4], reversed: [false; 4] };
            for i in 0..4 {
                let (a, b) = (vs[i], vs[(i + 1) % 4]);
                let (lo, hi) = (a.min(b), a.max(b));
                quad.reversed[i] = a > b;
                let e = *index.entry((lo, hi)).or_insert_with(|| {
                    let (pl, ph) = (vertices[lo], vertices[hi]);
                    let d = scalar::sub(ph, pl);
                    let length = scalar::norm(d);
                    edges.push(Edge {
                        lo,
                        hi,
                        quads: Vec::new(),
                        normal: scalar::scale(T::one() / length, scalar::perp(d)),
                        midpoint: scalar::scale(T::lit(0.5), scalar::add(pl, ph)),
                        length,
                    });
                    first_reversed.push(quad.reversed[i]);
                    edges.len() - 1
                });
                let edge = &mut edges[e];
                if edge.quads.len() == 2 {
                    return Err(Error::InvalidMesh(format!("edge ({lo}, {hi}) is shared by more than two quads")));
                }
                if let Some(&other) = edge.quads.first() {
                    if first_reversed[e] == quad.reversed[i] {
                        return Err(Error::InvalidMesh(format!(
                            "edge ({lo}, {hi}) is traversed in the same direction by quads {other} and {q}"
                        )));
                    }
                }
                edge.quads.push(q);
                quad.edges[i] = e;
            }
            built.push(quad);
        }

        let mesh = Self { vertices, quads: built, edges };
        mesh.check_hanging()?;
        Ok(mesh)
    }

    fn check_hanging(&self) -> Result<()> {
        let h = self
            .quads
            .iter()
            .map(|q| self.quad_h(q))
            .fold(T::zero(), T::max);
        let tol = T::lit(1e-12) * h;
        let mut order: Vec<usize> = (0..self.vertices.len()).collect();
        order.sort_by(|&a, &b| self.vertices[a][0].partial_cmp(&self.vertices[b][0]).expect("finite"));
        let xs: Vec<T> = order.iter().map(|&v| self.vertices[v][0]).collect();
        for e in &self.edges {
            let (a, b) = (self.vertices[e.lo], self.vertices[e.hi]);
            let (xmin, xmax) = (a[0].min(b[0]) - tol, a[0].max(b[0]) + tol);
            let start = xs.partition_point(|&x| x < xmin);
            for (&v, &x) in order[start..].iter().zip(&xs[start..]) {
                if x > xmax {
                    break;
                }
                if v == e.lo || v == e.hi {
                    continue;
                }
                let p = self.vertices[v];
                let d = scalar::sub(b, a);
                let s = scalar::dot(scalar::sub(p, a), d) / scalar::dot(d, d);
                if s <= T::zero() || s >= T::one() {
                    continue;
                }
                let dist = scalar::det(d, scalar::sub(p, a)).abs() / e.length;
                if dist < tol {
                    return Err(Error::HangingVertex { vertex: v, lo: e.lo, hi: e.hi });
                }
            }
        }
        Ok(())
    }

    fn quad_h(&self, q: &Quad) -> T {
        q.edges.iter().map(|&e| self.edges[e].length).fold(T::zero(), T::max)
    }

    pub fn vertices(&self) -> &[Vec2<T>] {
        &self.vertices
    }

    pub fn quads(&self) -> &[Quad] {
        &self.quads
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_quads(&self) -> usize {
        self.quads.len()
    }

    pub fn param_map(&self, q: usize) -> BilinearMap<T> {
        BilinearMap::new(self.quads[q].vertices.map(|v| self.vertices[v]))
    }

    /// Number of quads incident to each vertex.
    pub fn valences(&self) -> Vec<usize> {
        let mut val = vec![0; self.vertices.len()];
        for q in &self.quads {
            for &v in &q.vertices {
                val[v] += 1;
            }
        }
        val
    }

    /// Vertices lying on a boundary edge.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut b = vec![false; self.vertices.len()];
        for e in self.edges.iter().filter(|e| e.is_boundary()) {
            b[e.lo] = true;
            b[e.hi] = true;
        }
        b
    }

    /// `+1` when the inward normal of local edge `k` (0-based) of quad `q`
    /// equals the global edge normal, `-1` otherwise.
    pub fn edge_orientation_sign(&self, q: usize, k: usize) -> i8 {
        // the inward normal of a CCW quad is the local edge direction turned by +90 degrees
        if self.quads[q].reversed[k] {
            -1
        } else {
            1
        }
    }

    pub fn geometry_report(&self) -> Result<MeshGeometry<T>> {
        let mut h_quad = Vec::with_capacity(self.quads.len());
        let mut rho_quad = Vec::with_capacity(self.quads.len());
        let mut min_det = Vec::with_capacity(self.quads.len());
        for (qi, q) in self.quads.iter().enumerate() {
            let map = self.param_map(qi);
            let c = map.corners;
            h_quad.push(self.quad_h(q));
            let mut rho = T::infinity();
            for tri in [[0, 1, 2], [0, 2, 3], [0, 1, 3], [1, 2, 3]] {
                for m in 0..3 {
                    let p = c[tri[m]];
                    let u = scalar::sub(c[tri[(m + 1) % 3]], p);
                    let w = scalar::sub(c[tri[(m + 2) % 3]], p);
                    let ang = scalar::det(u, w).abs().atan2(scalar::dot(u, w));
                    rho = rho.min(ang);
                }
            }
            if !(rho > T::zero()) {
                return Err(Error::Degenerate { quad: qi });
            }
            rho_quad.push(rho);
            min_det.push(map.corner_dets().into_iter().fold(T::infinity(), T::min));
        }
        let h = h_quad.iter().copied().fold(T::zero(), T::max);
        let rho = rho_quad.iter().copied().fold(T::infinity(), T::min);
        Ok(MeshGeometry { h_quad, rho_quad, min_det, h, rho })
    }

    /// Splits every quad into four through its edge midpoints and the image
    /// of the parameter center. New vertices: originals, then edge midpoints
    /// by edge index, then centers by quad index.
    pub fn refine_regular(&self) -> Self {
        let nv = self.vertices.len();
        let ne = self.edges.len();
        let mut vertices = self.vertices.clone();
        vertices.extend(self.edges.iter().map(|e| e.midpoint));
        let half = T::lit(0.5);
        vertices.extend((0..self.quads.len()).map(|q| self.param_map(q).eval([half, half])));
        let mut quads = Vec::with_capacity(4 * self.quads.len());
        for (qi, q) in self.quads.iter().enumerate() {
            let [v1, v2, v3, v4] = q.vertices;
            let m = q.edges.map(|e| nv + e);
            let c = nv + ne + qi;
            quads.push([v1, m[0], c, m[3]]);
            quads.push([m[0], v2, m[1], c]);
            quads.push([c, m[1], v3, m[2]]);
            quads.push([m[3], c, m[2], v4]);
        }
        Self::new(vertices, quads).expect("regular refinement of a valid mesh is valid")
    }

    pub fn refine_times(&self, levels: usize) -> Self {
        let mut m = self.clone();
        for _ in 0..levels {
            m = m.refine_regular();
        }
        m
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: MeshFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let vertices = file.vertices.iter().map(|v| [T::lit(v[0]), T::lit(v[1])]).collect();
        Self::new(vertices, file.quads)
    }

    pub fn to_json_string(&self) -> String {
        let file = MeshFile {
            vertices: self.vertices.iter().map(|v| [v[0].as_f64(), v[1].as_f64()]).collect(),
            quads: self.quads.iter().map(|q| q.vertices).collect(),
        };
        serde_json::to_string_pretty(&file).expect("mesh serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_square() -> QuadMesh<f64> {
        QuadMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], vec![[0, 1, 2, 3]]).unwrap()
    }

    fn grid2() -> QuadMesh<f64> {
        let mut v = Vec::new();
        for j in 0..3 {
            for i in 0..3 {
                v.push([i as f64, j as f64]);
            }
        }
        let q = vec![[0, 1, 4, 3], [1, 2, 5, 4], [3, 4, 7, 6], [4, 5, 8, 7]];
        QuadMesh::new(v, q).unwrap()
    }

    #[test]
    fn single_quad_counts() {
        let m = QuadMesh::<f64>::from_json_str(r#"{"vertices":[[0,0],[1,0],[1,1],[0,1]],"quads":[[0,1,2,3]]}"#).unwrap();
        assert_eq!((m.num_quads(), m.num_edges(), m.num_vertices()), (1, 4, 4));
        assert!(m.edges().iter().all(|e| e.is_boundary()));
    }

    #[test]
    fn grid_counts_and_valence() {
        let m = grid2();
        assert_eq!((m.num_quads(), m.num_edges(), m.num_vertices()), (4, 12, 9));
        let val = m.valences();
        let bnd = m.boundary_vertices();
        let corners: Vec<_> = (0..9).filter(|&v| val[v] == 1).collect();
        assert_eq!(corners, vec![0, 2, 6, 8]);
        assert_eq!(val[4], 4);
        assert!(!bnd[4]);
        assert_eq!(m.edges().iter().filter(|e| !e.is_boundary()).count(), 4);
    }

    #[test]
    fn clockwise_quad_is_rejected() {
        let e = QuadMesh::<f64>::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]], vec![[0, 1, 2, 3]])
            .unwrap_err();
        assert!(e.to_string().contains("non-CCW/non-convex"), "{e}");
        assert!(matches!(e, Error::NonConvex { quad: 0, .. }));
    }

    #[test]
    fn nonconvex_quad_is_rejected() {
        let e = QuadMesh::<f64>::new(vec![[0.0, 0.0], [2.0, 0.0], [0.5, 0.5], [0.0, 2.0]], vec![[0, 1, 2, 3]])
            .unwrap_err();
        assert!(matches!(e, Error::NonConvex { corner: 3, .. }), "{e}");
    }

    #[test]
    fn hanging_vertex_is_rejected() {
        // right column split in two, left quad spans both
        let v = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [1.0, 0.5], [2.0, 0.5], [0.0, 1.0], [1.0, 1.0], [2.0, 1.0]];
        let q = vec![[0, 1, 6, 5], [1, 2, 4, 3], [3, 4, 7, 6]];
        let e = QuadMesh::<f64>::new(v, q).unwrap_err();
        assert!(matches!(e, Error::HangingVertex { vertex: 3, lo: 1, hi: 6 }), "{e}");
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(QuadMesh::<f64>::from_json_str("{\"vertices\": 3}"), Err(Error::Parse(_))));
    }

    #[test]
    fn param_map_examples() {
        let m = unit_square().param_map(0);
        assert_eq!(m.eval([0.0, 0.0]), [0.0, 0.0]);
        assert_eq!(m.jacobian([0.0, 0.0]), [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(m.eval([0.5, 0.5]), [0.5, 0.5]);
        let g = BilinearMap::new([[0.0, 0.0], [2.0, 0.0], [3.0, 2.0], [0.0, 1.0]]);
        assert_eq!(g.eval([1.0, 1.0]), [3.0, 2.0]);
        assert_eq!(g.mixed(), [1.0, 1.0]);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let g = BilinearMap::<f64>::new([[0.0, 0.0], [2.0, 0.1], [3.0, 2.0], [-0.2, 1.0]]);
        let h = 1e-6;
        let xi = [0.3f64, 0.7];
        let j = g.jacobian(xi);
        for c in 0..2 {
            let mut p = xi;
            let mut m = xi;
            p[c] += h;
            m[c] -= h;
            let (fp, fm) = (g.eval(p), g.eval(m));
            for r in 0..2 {
                assert!(((fp[r] - fm[r]) / (2.0 * h) - j[r][c]).abs() < 1e-8);
            }
        }
        let x = g.eval(xi);
        let back = g.inverse(x).unwrap();
        assert!((back[0] - xi[0]).abs() < 1e-12 && (back[1] - xi[1]).abs() < 1e-12);
    }

    #[test]
    fn geometry_examples() {
        let g = unit_square().geometry_report().unwrap();
        assert_eq!(g.h_quad[0], 1.0);
        assert!((g.rho_quad[0] - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert_eq!(unit_square().param_map(0).corner_dets(), [1.0; 4]);
        let r = QuadMesh::new(vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]], vec![[0, 1, 2, 3]]).unwrap();
        let g = r.geometry_report().unwrap();
        assert_eq!(g.h, 2.0);
        assert!((g.rho - 0.5f64.atan()).abs() < 1e-15);
    }

    #[test]
    fn refinement_counts_and_size() {
        let m = unit_square().refine_regular();
        assert_eq!((m.num_quads(), m.num_edges(), m.num_vertices()), (4, 12, 9));
        for l in 0..4 {
            let m = unit_square().refine_times(l);
            assert_eq!(m.num_quads(), 4usize.pow(l as u32));
            assert_eq!(m.geometry_report().unwrap().h, 0.5f64.powi(l as i32));
        }
    }

    #[test]
    fn orientation_signs() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 1.0]];
        let m = QuadMesh::new(v, vec![[0, 1, 4, 3], [1, 2, 5, 4]]).unwrap();
        for (ei, e) in m.edges().iter().enumerate() {
            let signs: Vec<i8> = e
                .quads
                .iter()
                .map(|&q| m.edge_orientation_sign(q, m.quads()[q].edges.iter().position(|&x| x == ei).unwrap()))
                .collect();
            if e.quads.len() == 2 {
                assert_eq!(signs.iter().map(|&s| s as i32).sum::<i32>(), 0);
            } else {
                // boundary sign follows from the global convention alone
                let q = e.quads[0];
                let k = m.quads()[q].edges.iter().position(|&x| x == ei).unwrap();
                let qv = m.quads()[q].vertices;
                let want = if qv[k] == e.lo { 1 } else { -1 };
                assert_eq!(signs[0], want);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let m = grid2();
        let back = QuadMesh::<f64>::from_json_str(&m.to_json_string()).unwrap();
        assert_eq!(m, back);
    }

    fn random_quad() -> impl Strategy<Value = [Vec2<f64>; 4]> {
        // perturbations below a quarter of the side keep the unit square convex
        proptest::array::uniform8(-0.24f64..0.24).prop_map(|d| {
            [[d[0], d[1]], [1.0 + d[2], d[3]], [1.0 + d[4], 1.0 + d[5]], [d[6], 1.0 + d[7]]]
        })
    }

    proptest! {
        #[test]
        fn element_map_properties(c in random_quad()) {
            let m = QuadMesh::new(c.to_vec(), vec![[0, 1, 2, 3]]).unwrap();
            let g = m.geometry_report().unwrap();
            let map = m.param_map(0);
            prop_assert_eq!(map.eval([0.0, 0.0]), c[0]);
            prop_assert_eq!(map.eval([1.0, 0.0]), c[1]);
            prop_assert_eq!(map.eval([1.0, 1.0]), c[2]);
            prop_assert_eq!(map.eval([0.0, 1.0]), c[3]);
            let mut sampled_min = f64::INFINITY;
            for i in 0..5 {
                for j in 0..5 {
                    let d = map.det_jacobian([i as f64 / 4.0, j as f64 / 4.0]);
                    prop_assert!(d > 0.0);
                    sampled_min = sampled_min.min(d);
                }
            }
            // corners are on the sample grid and the determinant is bilinear
            prop_assert!((sampled_min - g.min_det[0]).abs() < 1e-12);
            let min_edge = m.edges().iter().map(|e| e.length).fold(f64::INFINITY, f64::min);
            prop_assert!(min_edge >= g.rho.sin().powi(2) * g.h);
            prop_assert!(g.rho > 0.0 && g.rho <= std::f64::consts::FRAC_PI_4 + 1e-15);
        }

        #[test]
        fn refinement_preserves_validity(c in random_quad()) {
            let m = QuadMesh::new(c.to_vec(), vec![[0, 1, 2, 3]]).unwrap().refine_times(2);
            for q in 0..m.num_quads() {
                prop_assert!(m.param_map(q).corner_dets().iter().all(|&a| a > 0.0));
            }
            prop_assert!(m.geometry_report().is_ok());
        }
    }
}
