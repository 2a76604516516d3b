//! Projection of smooth functions onto the local and global spaces by
//! applying the degree-of-freedom functionals.

use rayon::prelude::*;

use crate::bs_element::{corner_param, edge_param, ElementGeometry, InteriorConvention, LocalBasis, LocalDof};
use crate::error::{Error, Result};
use crate::functions::SmoothFunction;
use crate::global_space::{Anchor, DofKind, GlobalSpace};
use crate::scalar::{add, dot, scale, sub, Scalar};

/// Applies every local functional of `basis` to `f`.
///
/// The basis must use face-point interior functionals.
pub fn project_local<T: Scalar, F: SmoothFunction<T> + ?Sized>(basis: &LocalBasis<T>, f: &F) -> Result<Vec<T>> {
    if basis.convention() != InteriorConvention::FacePoints {
        return Err(Error::Unsupported("projection needs face-point interior functionals".into()));
    }
    let spec = basis.spec();
    let map = basis.map();
    let geom = ElementGeometry::new(map);
    let pts: Vec<T> = spec.edge_point_params();
    let nrm: Vec<T> = spec.edge_normal_params();
    let face: Vec<T> = spec.face_params();
    Ok(basis
        .dofs()
        .into_iter()
        .map(|d| match d {
            LocalDof::Vertex { corner, data } => f.jet(map.eval(corner_param(corner)))[data.index()],
            LocalDof::EdgePoint { edge, index } => f.value(map.eval(edge_param(edge, pts[index]))),
            LocalDof::EdgeNormal { edge, index } => {
                let j = f.jet(map.eval(edge_param(edge, nrm[index])));
                dot([j[1], j[2]], geom.n[edge])
            }
            LocalDof::Interior { j1, j2 } => f.value(map.eval([face[j1 - 2], face[j2 - 2]])),
        })
        .collect())
}

/// Applies every global functional of `space` to `f`.
pub fn project_global<T: Scalar, F: SmoothFunction<T> + ?Sized>(space: &GlobalSpace<T>, f: &F) -> Vec<T> {
    let mesh = space.mesh();
    let spec = space.spec();
    let pts: Vec<T> = spec.edge_point_params();
    let nrm: Vec<T> = spec.edge_normal_params();
    let face: Vec<T> = spec.face_params();
    let side = spec.interior_side();
    space
        .dofs()
        .dofs()
        .par_iter()
        .map(|d| match (d.kind, d.anchor) {
            (kind, Anchor::Vertex(v)) => f.jet(mesh.vertices()[v])[vertex_slot(kind)],
            (kind, Anchor::Edge { edge, index }) => {
                let e = &mesh.edges()[edge];
                let (lo, hi) = (mesh.vertices()[e.lo], mesh.vertices()[e.hi]);
                let at = |s: T| add(lo, scale(s, sub(hi, lo)));
                if kind == DofKind::EdgeNormal {
                    let j = f.jet(at(nrm[index]));
                    dot([j[1], j[2]], e.normal)
                } else {
                    f.value(at(pts[index]))
                }
            }
            (_, Anchor::Face { quad, index }) => {
                f.value(mesh.param_map(quad).eval([face[index % side], face[index / side]]))
            }
        })
        .collect()
}

fn vertex_slot(kind: DofKind) -> usize {
    match kind {
        DofKind::VertexValue => 0,
        DofKind::VertexDx => 1,
        DofKind::VertexDy => 2,
        DofKind::VertexDxx => 3,
        DofKind::VertexDxy => 4,
        DofKind::VertexDyy => 5,
        _ => unreachable!("non-vertex dof at a vertex anchor"),
    }
}
