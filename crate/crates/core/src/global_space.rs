//! The global C¹ space on a quad mesh: degrees of freedom, local-to-global
//! maps with orientation signs, and evaluation of global functions.

use rayon::prelude::*;

use crate::bs_element::{
    build_basis_explicit, build_basis_numeric, edge_param, ElementSpec, InteriorConvention, Jet, LocalBasis, LocalDof,
    VertexData,
};
use crate::error::Result;
use crate::quad_mesh::{BilinearMap, QuadMesh};
use crate::scalar::Scalar;
use crate::spline_basis::Limit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DofKind {
    VertexValue,
    VertexDx,
    VertexDy,
    VertexDxx,
    VertexDxy,
    VertexDyy,
    /// Derivative along the global edge normal at an edge anchor point.
    EdgeNormal,
    /// Trace value at an edge anchor point.
    EdgePoint,
    /// Point value at a face point of a quad.
    FacePoint,
}

impl DofKind {
    fn vertex(data: VertexData) -> Self {
        match data {
            VertexData::Value => DofKind::VertexValue,
            VertexData::Dx => DofKind::VertexDx,
            VertexData::Dy => DofKind::VertexDy,
            VertexData::Dxx => DofKind::VertexDxx,
            VertexData::Dxy => DofKind::VertexDxy,
            VertexData::Dyy => DofKind::VertexDyy,
        }
    }
}

/// Mesh entity a degree of freedom is attached to, with its sub-index.
/// Edge sub-indices count from the `lo` end of the edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Anchor {
    Vertex(usize),
    Edge { edge: usize, index: usize },
    Face { quad: usize, index: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dof {
    pub kind: DofKind,
    pub anchor: Anchor,
    pub index: usize,
}

/// All global degrees of freedom, numbered vertex block first, then edges by
/// edge index (trace points before normals), then faces by quad index.
#[derive(Clone, Debug)]
pub struct DofSet {
    spec: ElementSpec,
    dofs: Vec<Dof>,
    edge_start: usize,
    face_start: usize,
}

impl DofSet {
    pub fn spec(&self) -> ElementSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    pub fn dofs(&self) -> &[Dof] {
        &self.dofs
    }

    pub fn get(&self, i: usize) -> Dof {
        self.dofs[i]
    }

    pub fn vertex_dof(&self, vertex: usize, data: VertexData) -> usize {
        6 * vertex + data.index()
    }

    pub fn edge_point_dof(&self, edge: usize, index: usize) -> usize {
        self.edge_start + edge * self.spec.per_edge() + index
    }

    pub fn edge_normal_dof(&self, edge: usize, index: usize) -> usize {
        self.edge_start + edge * self.spec.per_edge() + self.spec.edge_points() + index
    }

    pub fn face_dof(&self, quad: usize, index: usize) -> usize {
        self.face_start + quad * self.spec.interior() + index
    }
}

/// `(interior_side)² |Q| + per_edge |E| + 6 |V|`.
pub fn dimension_formula<T: Scalar>(mesh: &QuadMesh<T>, spec: ElementSpec) -> usize {
    spec.interior() * mesh.num_quads() + spec.per_edge() * mesh.num_edges() + 6 * mesh.num_vertices()
}

pub fn enumerate_dofs<T: Scalar>(mesh: &QuadMesh<T>, spec: ElementSpec) -> DofSet {
    let mut dofs = Vec::with_capacity(dimension_formula(mesh, spec));
    let mut push = |kind, anchor| {
        let index = dofs.len();
        dofs.push(Dof { kind, anchor, index });
    };
    for v in 0..mesh.num_vertices() {
        for data in VertexData::ALL {
            push(DofKind::vertex(data), Anchor::Vertex(v));
        }
    }
    let edge_start = 6 * mesh.num_vertices();
    for edge in 0..mesh.num_edges() {
        for index in 0..spec.edge_points() {
            push(DofKind::EdgePoint, Anchor::Edge { edge, index });
        }
        for index in 0..spec.edge_normals() {
            push(DofKind::EdgeNormal, Anchor::Edge { edge, index });
        }
    }
    let face_start = edge_start + spec.per_edge() * mesh.num_edges();
    for quad in 0..mesh.num_quads() {
        for index in 0..spec.interior() {
            push(DofKind::FacePoint, Anchor::Face { quad, index });
        }
    }
    DofSet { spec, dofs, edge_start, face_start }
}

/// For one quad, the global index and sign of every local basis function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalToGlobal {
    pub entries: Vec<(usize, i8)>,
}

pub fn local_to_global<T: Scalar>(mesh: &QuadMesh<T>, dofs: &DofSet, q: usize) -> LocalToGlobal {
    let spec = dofs.spec;
    let quad = &mesh.quads()[q];
    let entries = spec
        .local_dofs()
        .into_iter()
        .map(|d| match d {
            LocalDof::Vertex { corner, data } => (dofs.vertex_dof(quad.vertices[corner], data), 1),
            LocalDof::EdgePoint { edge, index } => {
                let i = if quad.reversed[edge] { spec.edge_points() - 1 - index } else { index };
                (dofs.edge_point_dof(quad.edges[edge], i), 1)
            }
            LocalDof::EdgeNormal { edge, index } => {
                let i = if quad.reversed[edge] { spec.edge_normals() - 1 - index } else { index };
                (dofs.edge_normal_dof(quad.edges[edge], i), mesh.edge_orientation_sign(q, edge))
            }
            LocalDof::Interior { j1, j2 } => {
                let side = spec.interior_side();
                (dofs.face_dof(q, (j2 - 2) * side + (j1 - 2)), 1)
            }
        })
        .collect();
    LocalToGlobal { entries }
}

/// Local basis of one element with face-point interior functionals: the
/// closed-form tables for degrees 3 to 5 at the default segment count, the
/// numeric construction otherwise.
pub fn element_basis<T: Scalar>(map: &BilinearMap<T>, spec: ElementSpec) -> Result<LocalBasis<T>> {
    let explicit = (3..=5).contains(&spec.degree) && ElementSpec::default_for(spec.degree)? == spec;
    if explicit {
        build_basis_explicit(map, spec.degree)?.to_face_points()
    } else {
        build_basis_numeric(map, spec, InteriorConvention::FacePoints)
    }
}

/// Largest discrepancies found by [`GlobalSpace::check_c1`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct JumpReport {
    pub value: f64,
    pub gradient: f64,
    /// Largest disagreement of the full second-order jets of incident quads at a vertex.
    pub vertex_hessian: f64,
}

/// The assembled space `V(M)` for one mesh and element spec.
#[derive(Clone, Debug)]
pub struct GlobalSpace<T> {
    mesh: QuadMesh<T>,
    dofs: DofSet,
    l2g: Vec<LocalToGlobal>,
    bases: Vec<LocalBasis<T>>,
}

impl<T: Scalar> GlobalSpace<T> {
    pub fn new(mesh: QuadMesh<T>, spec: ElementSpec) -> Result<Self> {
        let dofs = enumerate_dofs(&mesh, spec);
        let l2g = (0..mesh.num_quads()).map(|q| local_to_global(&mesh, &dofs, q)).collect();
        let bases = (0..mesh.num_quads())
            .into_par_iter()
            .map(|q| element_basis(&mesh.param_map(q), spec))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { mesh, dofs, l2g, bases })
    }

    pub fn mesh(&self) -> &QuadMesh<T> {
        &self.mesh
    }

    pub fn dofs(&self) -> &DofSet {
        &self.dofs
    }

    pub fn spec(&self) -> ElementSpec {
        self.dofs.spec
    }

    pub fn dim(&self) -> usize {
        self.dofs.len()
    }

    pub fn local_to_global(&self, q: usize) -> &LocalToGlobal {
        &self.l2g[q]
    }

    pub fn basis(&self, q: usize) -> &LocalBasis<T> {
        &self.bases[q]
    }

    /// Local basis weights of the global function `global` on quad `q`.
    pub fn restrict(&self, q: usize, global: &[T]) -> Vec<T> {
        self.l2g[q]
            .entries
            .iter()
            .map(|&(g, s)| if s < 0 { -global[g] } else { global[g] })
            .collect()
    }

    /// Tensor-product coefficients of the global function on quad `q`.
    pub fn tensor_coeffs(&self, q: usize, global: &[T]) -> Vec<T> {
        self.bases[q].combine(&self.restrict(q, global))
    }

    /// Physical jet of the global function at `F_q(xi)`.
    pub fn eval(&self, q: usize, global: &[T], xi: [T; 2]) -> Jet<T> {
        self.bases[q].eval_tensor(&self.tensor_coeffs(q, global), xi, [Limit::FromRight; 2])
    }

    /// Samples value and gradient jumps at 20 points on each interior edge and
    /// compares the second-order jets of all quads meeting at each vertex.
    pub fn check_c1(&self, global: &[T]) -> JumpReport {
        let coeffs: Vec<Vec<T>> = (0..self.mesh.num_quads()).map(|q| self.tensor_coeffs(q, global)).collect();
        let jet_at = |q: usize, xi: [T; 2]| self.bases[q].eval_tensor(&coeffs[q], xi, [Limit::FromRight; 2]);
        let mut rep = JumpReport::default();
        for (e, edge) in self.mesh.edges().iter().enumerate() {
            if edge.is_boundary() {
                continue;
            }
            let sides: Vec<(usize, usize)> = edge
                .quads
                .iter()
                .map(|&q| (q, self.mesh.quads()[q].edges.iter().position(|&x| x == e).expect("edge of quad")))
                .collect();
            for i in 0..20 {
                let s = T::from_usize_lossy(i) / T::lit(19.0);
                let jets: Vec<Jet<T>> = sides
                    .iter()
                    .map(|&(q, k)| {
                        let local = if self.mesh.quads()[q].reversed[k] { T::one() - s } else { s };
                        jet_at(q, edge_param(k, local))
                    })
                    .collect();
                let (a, b) = (jets[0], jets[1]);
                rep.value = rep.value.max((a[0] - b[0]).abs().as_f64());
                rep.gradient = rep.gradient.max((a[1] - b[1]).abs().as_f64()).max((a[2] - b[2]).abs().as_f64());
            }
        }
        let corners: [[T; 2]; 4] = [[T::zero(), T::zero()], [T::one(), T::zero()], [T::one(), T::one()], [T::zero(), T::one()]];
        let mut first: Vec<Option<Jet<T>>> = vec![None; self.mesh.num_vertices()];
        for (q, quad) in self.mesh.quads().iter().enumerate() {
            for (c, &v) in quad.vertices.iter().enumerate() {
                let j = jet_at(q, corners[c]);
                match first[v] {
                    None => first[v] = Some(j),
                    Some(f) => {
                        for (x, y) in f.iter().zip(&j) {
                            rep.vertex_hessian = rep.vertex_hessian.max((*x - *y).abs().as_f64());
                        }
                    }
                }
            }
        }
        rep
    }
}
