//! Galerkin discretization of `Δ²u = g` with clamped boundary data
//! `u = g1`, `∂u/∂n = g2`, and error measurement against an exact solution.
//!
//! Assembly and error evaluation work in `f64`; the free-DoF system is
//! factored with a sparse Cholesky decomposition.

use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use rayon::prelude::*;

use crate::bs_element::{edge_param, Jet};
use crate::error::{Error, Result};
use crate::functions::{check_derivatives, SmoothFunction};
use crate::global_space::{Anchor, DofKind, GlobalSpace};
use crate::linalg::DenseMatrix;
use crate::quad_mesh::QuadMesh;
use crate::quadrature::{gauss_legendre, split_square_rule};
use crate::scalar::sub;
use crate::spline_basis::Limit;

/// Bilinear form used for the stiffness matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WeakForm {
    /// `∫ Δu Δv`.
    #[default]
    Laplacian,
    /// `∫ D²u : D²v`.
    Hessian,
}

impl WeakForm {
    pub fn name(self) -> &'static str {
        match self {
            WeakForm::Laplacian => "laplacian",
            WeakForm::Hessian => "hessian",
        }
    }
}

type PointFn = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;
type JetFn = Arc<dyn Fn([f64; 2]) -> Jet<f64> + Send + Sync>;

/// Problem data given directly instead of through an exact solution.
#[derive(Clone)]
pub struct RawData {
    pub load: PointFn,
    /// Boundary values.
    pub g1: PointFn,
    /// Outward normal derivative on the boundary.
    pub g2: PointFn,
    /// Second-order data at boundary vertices; the clamped data alone does
    /// not determine it.
    pub vertex_jet: Option<JetFn>,
}

#[derive(Clone)]
pub enum ProblemData {
    Manufactured(Arc<dyn SmoothFunction<f64>>),
    Raw(RawData),
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub data: ProblemData,
    pub weak_form: WeakForm,
}

impl ProblemSpec {
    /// A problem whose load and boundary data derive from `u`. The analytic
    /// derivatives of `u` are checked against finite differences.
    pub fn manufactured(u: Arc<dyn SmoothFunction<f64>>, weak_form: WeakForm) -> Result<Self> {
        check_derivatives(u.as_ref(), &[[0.13, 0.27], [0.61, 0.42], [-0.35, 0.8]], 1e-5)?;
        if u.bilaplacian([0.0, 0.0]).is_none() {
            return Err(Error::InsufficientData("exact solution has no bilaplacian".into()));
        }
        Ok(Self { data: ProblemData::Manufactured(u), weak_form })
    }

    pub fn raw(data: RawData, weak_form: WeakForm) -> Self {
        Self { data: ProblemData::Raw(data), weak_form }
    }

    fn load(&self, x: [f64; 2]) -> f64 {
        match &self.data {
            ProblemData::Manufactured(u) => u.bilaplacian(x).expect("checked at construction"),
            ProblemData::Raw(r) => (r.load)(x),
        }
    }
}

/// Square sparse matrix in compressed row form.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.par_sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(t.len() / 4);
        let mut vals: Vec<f64> = Vec::with_capacity(t.len() / 4);
        let mut last = None;
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *vals.last_mut().expect("entry exists") += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `max |A - Aᵀ| / max |A|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        let m = self.max_abs();
        if m > 0.0 {
            worst / m
        } else {
            0.0
        }
    }
}

/// Prescribed values of the constrained degrees of freedom, plus free
/// directions that move several constrained values together.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Constraints {
    /// `Some(value)` for every constrained degree of freedom.
    pub fixed: Vec<Option<f64>>,
    /// Each entry is one extra unknown `y`, adding `y * weight` to the listed
    /// constrained degrees of freedom.
    pub free_directions: Vec<Vec<(usize, f64)>>,
}

impl Constraints {
    pub fn none(n: usize) -> Self {
        Self { fixed: vec![None; n], free_directions: Vec::new() }
    }

    pub fn all(values: &[f64]) -> Self {
        Self { fixed: values.iter().map(|&v| Some(v)).collect(), free_directions: Vec::new() }
    }

    /// Free degrees of freedom followed by the free directions, each as a
    /// list of `(dof, weight)`.
    pub fn unknowns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut out: Vec<Vec<(usize, f64)>> =
            self.fixed.iter().enumerate().filter(|(_, c)| c.is_none()).map(|(i, _)| vec![(i, 1.0)]).collect();
        out.extend(self.free_directions.iter().cloned());
        out
    }

    /// The global vector `sum y_u unknown_u`, vanishing on the constrained data.
    pub fn expand(&self, y: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.fixed.len()];
        for (u, &yu) in self.unknowns().iter().zip(y) {
            for &(i, w) in u {
                v[i] += w * yu;
            }
        }
        v
    }
}

/// Stiffness matrix, load vector and boundary constraints.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub load: Vec<f64>,
    pub constraints: Constraints,
}

/// Jets of the basis functions at the quadrature points of one quad, with
/// weights already multiplied by the Jacobian determinant.
fn quad_samples(space: &GlobalSpace<f64>, q: usize) -> (Vec<f64>, Vec<[f64; 2]>, Vec<Vec<Jet<f64>>>) {
    let spec = space.spec();
    let basis = space.basis(q);
    let map = basis.map();
    let rule = split_square_rule::<f64>(spec.degree + 2, spec.segments);
    let mut w = Vec::with_capacity(rule.len());
    let mut x = Vec::with_capacity(rule.len());
    let mut jets = Vec::with_capacity(rule.len());
    for (xi, wt) in rule {
        w.push(wt * map.det_jacobian(xi).abs());
        x.push(map.eval(xi));
        jets.push(basis.eval(xi));
    }
    (w, x, jets)
}

/// Element-wise Galerkin assembly of the stiffness matrix and load vector.
pub fn assemble(space: &GlobalSpace<f64>, problem: &ProblemSpec) -> LinearSystem {
    let n = space.dim();
    let parts: Vec<(Vec<(usize, usize, f64)>, Vec<(usize, f64)>)> = (0..space.mesh().num_quads())
        .into_par_iter()
        .map(|q| {
            let (w, x, jets) = quad_samples(space, q);
            let l2g = &space.local_to_global(q).entries;
            let d = l2g.len();
            let mut ke = vec![0.0; d * d];
            let mut fe = vec![0.0; d];
            for ((&wt, &xp), jet) in w.iter().zip(&x).zip(&jets) {
                let g = problem.load(xp);
                for a in 0..d {
                    let ja = &jet[a];
                    fe[a] += wt * g * ja[0];
                    for b in a..d {
                        let jb = &jet[b];
                        let v = match problem.weak_form {
                            WeakForm::Laplacian => (ja[3] + ja[5]) * (jb[3] + jb[5]),
                            WeakForm::Hessian => ja[3] * jb[3] + 2.0 * ja[4] * jb[4] + ja[5] * jb[5],
                        };
                        ke[a * d + b] += wt * v;
                    }
                }
            }
            let mut t = Vec::with_capacity(d * d);
            let mut f = Vec::with_capacity(d);
            for a in 0..d {
                let (ga, sa) = l2g[a];
                f.push((ga, f64::from(sa) * fe[a]));
                for b in 0..d {
                    let (gb, sb) = l2g[b];
                    let v = if b >= a { ke[a * d + b] } else { ke[b * d + a] };
                    t.push((ga, gb, f64::from(sa * sb) * v));
                }
            }
            (t, f)
        })
        .collect();
    let mut load = vec![0.0; n];
    let mut triplets = Vec::with_capacity(parts.iter().map(|p| p.0.len()).sum());
    for (t, f) in parts {
        triplets.extend(t);
        for (g, v) in f {
            load[g] += v;
        }
    }
    LinearSystem { matrix: CsrMatrix::from_triplets(n, triplets), load, constraints: Constraints::none(n) }
}

/// Basis traces along one boundary edge at Gauss points.
struct EdgeTrace<'a> {
    edge: usize,
    dofs: &'a [(usize, i8)],
    /// Weight (including the edge length), point, and per local DoF the
    /// signed value and derivative along the global edge normal.
    samples: Vec<(f64, [f64; 2], Vec<[f64; 2]>)>,
}

impl<'a> EdgeTrace<'a> {
    fn new(space: &'a GlobalSpace<f64>, edge: usize) -> Self {
        let mesh = space.mesh();
        let e = &mesh.edges()[edge];
        let q = e.quads[0];
        let k = mesh.quads()[q].edges.iter().position(|&x| x == edge).expect("edge of quad");
        let spec = space.spec();
        let basis = space.basis(q);
        let dofs = &space.local_to_global(q).entries[..];
        let (nodes, weights) = gauss_legendre::<f64>(spec.degree + 2);
        let cells = spec.segments;
        let mut samples = Vec::with_capacity(cells * nodes.len());
        for c in 0..cells {
            for (t, w) in nodes.iter().zip(&weights) {
                let xi = edge_param(k, (c as f64 + t) / cells as f64);
                let traces = basis
                    .eval(xi)
                    .iter()
                    .zip(dofs)
                    .map(|(j, &(_, sign))| {
                        let s = f64::from(sign);
                        [s * j[0], s * (j[1] * e.normal[0] + j[2] * e.normal[1])]
                    })
                    .collect();
                samples.push((w * e.length / cells as f64, basis.map().eval(xi), traces));
            }
        }
        Self { edge, dofs, samples }
    }

    /// Local indices of the DoFs whose traces live on this edge.
    fn local(&self, space: &GlobalSpace<f64>) -> Vec<usize> {
        let e = &space.mesh().edges()[self.edge];
        (0..self.dofs.len())
            .filter(|&a| match space.dofs().get(self.dofs[a].0).anchor {
                Anchor::Vertex(v) => v == e.lo || v == e.hi,
                Anchor::Edge { edge, .. } => edge == self.edge,
                Anchor::Face { .. } => false,
            })
            .collect()
    }
}

/// Fixes the boundary DoFs. Vertex data come from the second-order jet at
/// each boundary vertex; the edge DoFs follow from L² projection of the value
/// and normal derivative traces. The normal derivative projection is global
/// along the boundary and also determines the normal slope and twist at
/// vertices on straight boundary segments, whose curvature across the
/// boundary stays free.
pub fn impose_dirichlet(space: &GlobalSpace<f64>, problem: &ProblemSpec) -> Result<Constraints> {
    let mesh = space.mesh();
    let on_boundary = mesh.boundary_vertices();
    let no_jet = |v: usize| {
        Error::InsufficientData(format!(
            "second-order data needed at boundary vertex {v}; boundary values and normal derivatives do not determine it"
        ))
    };
    let jet_at = |v: usize| -> Result<Jet<f64>> {
        let x = mesh.vertices()[v];
        match &problem.data {
            ProblemData::Manufactured(u) => Ok(u.jet(x)),
            ProblemData::Raw(r) => r.vertex_jet.as_ref().map(|f| f(x)).ok_or_else(|| no_jet(v)),
        }
    };
    let value = |x: [f64; 2]| match &problem.data {
        ProblemData::Manufactured(u) => u.value(x),
        ProblemData::Raw(r) => (r.g1)(x),
    };
    // derivative along the global normal of `edge`
    let slope = |edge: usize, x: [f64; 2]| {
        let e = &mesh.edges()[edge];
        match &problem.data {
            ProblemData::Manufactured(u) => {
                let j = u.jet(x);
                j[1] * e.normal[0] + j[2] * e.normal[1]
            }
            // the outward normal is the opposite of the quad's inward normal
            ProblemData::Raw(r) => {
                let q = e.quads[0];
                let k = mesh.quads()[q].edges.iter().position(|&x| x == edge).expect("edge of quad");
                -f64::from(mesh.edge_orientation_sign(q, k)) * (r.g2)(x)
            }
        }
    };

    let mut out = vec![None; space.dim()];
    for d in space.dofs().dofs() {
        if let Anchor::Vertex(v) = d.anchor {
            if on_boundary[v] {
                out[d.index] = Some(jet_at(v)?[d.index % 6]);
            }
        }
    }
    let straight = straight_boundary_frames(mesh);
    let traces: Vec<EdgeTrace> =
        (0..mesh.num_edges()).filter(|&e| mesh.edges()[e].is_boundary()).map(|e| EdgeTrace::new(space, e)).collect();

    // values: edge by edge, the vertex data being fixed
    for tr in &traces {
        let local = tr.local(space);
        let unknown: Vec<usize> =
            local.iter().copied().filter(|&a| space.dofs().get(tr.dofs[a].0).kind == DofKind::EdgePoint).collect();
        if unknown.is_empty() {
            continue;
        }
        let m = unknown.len();
        let mut mass = DenseMatrix::zeros(m, m);
        let mut rhs = vec![0.0; m];
        for (w, x, t) in &tr.samples {
            let known: f64 = local.iter().filter_map(|&a| out[tr.dofs[a].0].map(|c| c * t[a][0])).sum();
            let r = value(*x) - known;
            for (i, &a) in unknown.iter().enumerate() {
                rhs[i] += w * t[a][0] * r;
                for (j, &b) in unknown.iter().enumerate() {
                    mass.row_mut(i)[j] += w * t[a][0] * t[b][0];
                }
            }
        }
        for (&a, c) in unknown.iter().zip(mass.lu()?.solve(&rhs)) {
            out[tr.dofs[a].0] = Some(c);
        }
    }

    // normal derivatives: one global projection along the boundary
    let mut directions: Vec<Vec<(usize, f64)>> = Vec::new();
    for (v, frame) in straight.iter().enumerate() {
        if let Some((t, n)) = frame {
            let b = 6 * v;
            directions.push(vec![(b + 1, n[0]), (b + 2, n[1])]);
            directions.push(vec![(b + 3, 2.0 * t[0] * n[0]), (b + 4, t[0] * n[1] + t[1] * n[0]), (b + 5, 2.0 * t[1] * n[1])]);
        }
    }
    for d in space.dofs().dofs() {
        if let Anchor::Edge { edge, .. } = d.anchor {
            if d.kind == DofKind::EdgeNormal && mesh.edges()[edge].is_boundary() {
                out[d.index] = Some(0.0);
                directions.push(vec![(d.index, 1.0)]);
            }
        }
    }
    let mut touch: std::collections::HashMap<usize, Vec<(usize, f64)>> = std::collections::HashMap::new();
    for (u, dir) in directions.iter().enumerate() {
        for &(g, c) in dir {
            touch.entry(g).or_default().push((u, c));
        }
    }
    let mut triplets = Vec::new();
    let mut load = vec![0.0; directions.len()];
    for tr in &traces {
        let local = tr.local(space);
        for (w, x, t) in &tr.samples {
            let known: f64 = local.iter().filter_map(|&a| out[tr.dofs[a].0].map(|c| c * t[a][1])).sum();
            let r = slope(tr.edge, *x) - known;
            let mut psi: Vec<(usize, f64)> = Vec::new();
            for &a in &local {
                for &(u, c) in touch.get(&tr.dofs[a].0).map(Vec::as_slice).unwrap_or(&[]) {
                    psi.push((u, c * t[a][1]));
                }
            }
            for &(u, a) in &psi {
                load[u] += w * a * r;
                for &(v, b) in &psi {
                    triplets.push((u, v, w * a * b));
                }
            }
        }
    }
    if !directions.is_empty() {
        let m = directions.len();
        let sol = solve(&LinearSystem {
            matrix: CsrMatrix::from_triplets(m, triplets),
            load,
            constraints: Constraints::none(m),
        })?;
        for (dir, y) in directions.iter().zip(&sol.coeffs) {
            for &(g, c) in dir {
                *out[g].as_mut().expect("boundary dof") += c * y;
            }
        }
    }

    let free_directions = straight
        .iter()
        .enumerate()
        .filter_map(|(v, f)| f.map(|(_, n)| vec![(6 * v + 3, n[0] * n[0]), (6 * v + 4, n[0] * n[1]), (6 * v + 5, n[1] * n[1])]))
        .collect();
    Ok(Constraints { fixed: out, free_directions })
}

/// Unit tangent and normal at boundary vertices whose two boundary edges are
/// collinear; `None` elsewhere.
fn straight_boundary_frames(mesh: &QuadMesh<f64>) -> Vec<Option<([f64; 2], [f64; 2])>> {
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); mesh.num_vertices()];
    for e in mesh.edges().iter().filter(|e| e.is_boundary()) {
        incident[e.lo].push(e.hi);
        incident[e.hi].push(e.lo);
    }
    incident
        .iter()
        .enumerate()
        .map(|(v, nb)| {
            let [a, b] = nb[..] else { return None };
            let x = mesh.vertices()[v];
            let (ta, tb) = (sub(mesh.vertices()[a], x), sub(mesh.vertices()[b], x));
            let (la, lb) = (ta[0].hypot(ta[1]), tb[0].hypot(tb[1]));
            if (ta[0] * tb[1] - ta[1] * tb[0]).abs() < 1e-10 * la * lb {
                let t = [ta[0] / la, ta[1] / la];
                Some((t, [-t[1], t[0]]))
            } else {
                None
            }
        })
        .collect()
}

/// Solution of a constrained system.
#[derive(Clone, Debug)]
pub struct Solution {
    pub coeffs: Vec<f64>,
    pub free: usize,
    /// `‖A x - b‖ / ‖b‖` on the free degrees of freedom.
    pub residual: f64,
}

/// Cholesky factorization of the stiffness matrix restricted to the
/// unknowns of a set of constraints.
struct ReducedFactor {
    unknowns: Vec<Vec<(usize, f64)>>,
    llt: Llt<usize, f64>,
}

impl ReducedFactor {
    fn new(matrix: &CsrMatrix, cons: &Constraints) -> Result<Self> {
        let unknowns = cons.unknowns();
        let m = unknowns.len();
        let mut touch: Vec<Vec<(usize, f64)>> = vec![Vec::new(); matrix.size()];
        for (u, list) in unknowns.iter().enumerate() {
            for &(i, w) in list {
                touch[i].push((u, w));
            }
        }
        let mut reduced = Vec::new();
        for (u, list) in unknowns.iter().enumerate() {
            for &(i, wi) in list {
                for (j, v) in matrix.row(i) {
                    for &(u2, wj) in &touch[j] {
                        reduced.push((u, u2, wi * v * wj));
                    }
                }
            }
        }
        let reduced = CsrMatrix::from_triplets(m, reduced);
        let triplets: Vec<Triplet<usize, usize, f64>> =
            (0..m).flat_map(|i| reduced.row(i).map(move |(j, v)| Triplet::new(i, j, v))).collect();
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(m, m, &triplets)
            .map_err(|e| Error::Dimension(format!("sparse matrix construction failed: {e:?}")))?;
        let llt = a.sp_cholesky(Side::Lower).map_err(|e| Error::Indefinite(format!("{e:?}")))?;
        Ok(Self { unknowns, llt })
    }

    /// Projects a residual of the full system onto the unknowns.
    fn reduce(&self, full: &[f64]) -> Vec<f64> {
        self.unknowns.iter().map(|list| list.iter().map(|&(i, w)| w * full[i]).sum()).collect()
    }

    fn solve(&self, r: &[f64]) -> Vec<f64> {
        let mut d = Mat::<f64>::from_fn(r.len(), 1, |i, _| r[i]);
        self.llt.solve_in_place(d.as_mut());
        (0..r.len()).map(|i| d[(i, 0)]).collect()
    }
}

/// Solves the constrained system by iterative refinement. `residual` maps
/// full coefficient vectors to `b - A c`; its accuracy bounds the accuracy
/// of the result.
fn refine(
    factor: &ReducedFactor,
    cons: &Constraints,
    residual: impl Fn(&[f64]) -> Vec<f64>,
) -> Result<Solution> {
    let m = factor.unknowns.len();
    let mut coeffs: Vec<f64> = cons.fixed.iter().map(|c| c.unwrap_or(0.0)).collect();
    let mut r = factor.reduce(&residual(&coeffs));
    let bnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut best = f64::INFINITY;
    for _ in 0..10 {
        let d = factor.solve(&r);
        for (c, dc) in coeffs.iter_mut().zip(cons.expand(&d)) {
            *c += dc;
        }
        r = factor.reduce(&residual(&coeffs));
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rn = if bnorm > 0.0 { rn / bnorm } else { rn };
        if !rn.is_finite() {
            return Err(Error::Indefinite("solution is not finite".into()));
        }
        let stalled = rn >= 0.5 * best;
        best = best.min(rn);
        if stalled || rn < 1e-15 {
            break;
        }
    }
    Ok(Solution { coeffs, free: m, residual: best })
}

/// Eliminates the constrained unknowns and solves the remaining symmetric
/// positive definite system.
pub fn solve(system: &LinearSystem) -> Result<Solution> {
    let cons = &system.constraints;
    if cons.unknowns().is_empty() {
        let coeffs = cons.fixed.iter().map(|c| c.unwrap_or(0.0)).collect();
        return Ok(Solution { coeffs, free: 0, residual: 0.0 });
    }
    let factor = ReducedFactor::new(&system.matrix, cons)?;
    refine(&factor, cons, |c| {
        (0..c.len())
            .into_par_iter()
            .map(|i| compensated_residual(system.load[i], system.matrix.row(i).map(|(j, v)| (v, c[j]))))
            .collect()
    })
}

/// `b - sum a_j x_j`, accumulated with error-free transformations.
fn compensated_residual(b: f64, terms: impl Iterator<Item = (f64, f64)>) -> f64 {
    let mut s = Compensated { hi: b, lo: 0.0 };
    for (a, x) in terms {
        s.add_product(-a, x);
    }
    s.value()
}

/// Assembles, constrains and solves in one call. Refinement residuals are
/// computed element by element from the basis function values, which avoids
/// the rounding of the assembled matrix entries and keeps the discretization
/// error visible on fine meshes.
pub fn solve_problem(space: &GlobalSpace<f64>, problem: &ProblemSpec) -> Result<Solution> {
    let system = assemble(space, problem);
    let cons = impose_dirichlet(space, problem)?;
    if cons.unknowns().is_empty() {
        return solve(&LinearSystem { constraints: cons, ..system });
    }
    let factor = ReducedFactor::new(&system.matrix, &cons)?;
    refine(&factor, &cons, |c| element_residual(space, problem, c))
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let z = s - a;
    (s, (a - (s - z)) + (b - z))
}

/// Unevaluated sum `hi + lo` accumulated without rounding loss.
#[derive(Clone, Copy, Default)]
struct Compensated {
    hi: f64,
    lo: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let (s, e) = two_sum(self.hi, v);
        self.hi = s;
        self.lo += e;
    }

    fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        self.add(p);
        self.lo += a.mul_add(b, -p);
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// `b - A c` computed element by element with compensated sums.
fn element_residual(space: &GlobalSpace<f64>, problem: &ProblemSpec, coeffs: &[f64]) -> Vec<f64> {
    let parts: Vec<Vec<(usize, Compensated)>> = (0..space.mesh().num_quads())
        .into_par_iter()
        .map(|q| {
            let (w, x, jets) = quad_samples(space, q);
            let l2g = &space.local_to_global(q).entries;
            let c: Vec<f64> = l2g.iter().map(|&(g, s)| f64::from(s) * coeffs[g]).collect();
            let mut acc = vec![Compensated::default(); l2g.len()];
            for ((&wt, &xp), jet) in w.iter().zip(&x).zip(&jets) {
                let g = problem.load(xp);
                let mut hess = [Compensated::default(); 3];
                for (ca, ja) in c.iter().zip(jet) {
                    for (h, d) in hess.iter_mut().zip(&ja[3..]) {
                        h.add_product(*ca, *d);
                    }
                }
                let [hxx, hxy, hyy] = hess.map(Compensated::value);
                for (r, ja) in acc.iter_mut().zip(jet) {
                    let v = match problem.weak_form {
                        WeakForm::Laplacian => (hxx + hyy) * (ja[3] + ja[5]),
                        WeakForm::Hessian => hxx * ja[3] + 2.0 * hxy * ja[4] + hyy * ja[5],
                    };
                    r.add(wt * g * ja[0]);
                    r.add(-wt * v);
                }
            }
            l2g.iter()
                .zip(acc)
                .map(|(&(g, s), r)| (g, Compensated { hi: f64::from(s) * r.hi, lo: f64::from(s) * r.lo }))
                .collect()
        })
        .collect();
    let mut r = vec![Compensated::default(); space.dim()];
    for (g, part) in parts.into_iter().flatten() {
        r[g].add(part.hi);
        r[g].lo += part.lo;
    }
    r.into_iter().map(Compensated::value).collect()
}

/// `L∞` error and relative `L²`, `H¹`-seminorm and `H²`-seminorm errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorNorms {
    pub linf: f64,
    pub l2_rel: f64,
    pub h1_rel: f64,
    pub h2_rel: f64,
}

impl ErrorNorms {
    pub fn as_array(&self) -> [f64; 4] {
        [self.linf, self.l2_rel, self.h1_rel, self.h2_rel]
    }
}

/// Compares the global function `coeffs` with `exact`. The maximum is taken
/// over a 10 x 10 grid on every polynomial piece, the integrals use the
/// Gauss rule of the assembly.
pub fn error_norms<F: SmoothFunction<f64> + ?Sized>(
    space: &GlobalSpace<f64>,
    coeffs: &[f64],
    exact: &F,
) -> Result<ErrorNorms> {
    let spec = space.spec();
    let k = spec.segments;
    let rule = split_square_rule::<f64>(spec.degree + 2, k);
    let grid: Vec<[f64; 2]> = (0..10 * k)
        .flat_map(|i| (0..10 * k).map(move |j| (i, j)))
        .map(|(i, j)| {
            let at = |m: usize| (m / 10) as f64 / k as f64 + (m % 10) as f64 / (9.0 * k as f64);
            [at(i), at(j)]
        })
        .collect();
    // [linf, e0, e1, e2, u0, u1, u2]
    let sums = (0..space.mesh().num_quads())
        .into_par_iter()
        .map(|q| {
            let basis = space.basis(q);
            let map = basis.map();
            let c = space.tensor_coeffs(q, coeffs);
            let mut s = [0.0f64; 7];
            for &(xi, w) in &rule {
                let wt = w * map.det_jacobian(xi).abs();
                let uh = basis.eval_tensor(&c, xi, [Limit::FromRight; 2]);
                let u = exact.jet(map.eval(xi));
                let e: Vec<f64> = u.iter().zip(&uh).map(|(a, b)| a - b).collect();
                s[1] += wt * e[0] * e[0];
                s[2] += wt * (e[1] * e[1] + e[2] * e[2]);
                s[3] += wt * (e[3] * e[3] + 2.0 * e[4] * e[4] + e[5] * e[5]);
                s[4] += wt * u[0] * u[0];
                s[5] += wt * (u[1] * u[1] + u[2] * u[2]);
                s[6] += wt * (u[3] * u[3] + 2.0 * u[4] * u[4] + u[5] * u[5]);
            }
            for &xi in &grid {
                let uh = basis.eval_tensor(&c, xi, [Limit::FromLeft; 2])[0];
                s[0] = s[0].max((exact.value(map.eval(xi)) - uh).abs());
            }
            s
        })
        .reduce(
            || [0.0; 7],
            |a, b| std::array::from_fn(|i| if i == 0 { a[0].max(b[0]) } else { a[i] + b[i] }),
        );
    let rel = |e: f64, u: f64, name: &'static str| {
        if u > 0.0 {
            Ok((e / u).sqrt())
        } else {
            Err(Error::ZeroNorm(name))
        }
    };
    Ok(ErrorNorms {
        linf: sums[0],
        l2_rel: rel(sums[1], sums[4], "L2")?,
        h1_rel: rel(sums[2], sums[5], "H1")?,
        h2_rel: rel(sums[3], sums[6], "H2")?,
    })
}

/// Observed convergence orders `log2(e_coarse / e_fine)` for one halving of `h`.
pub fn rates(coarse: &ErrorNorms, fine: &ErrorNorms) -> [f64; 4] {
    let (a, b) = (coarse.as_array(), fine.as_array());
    std::array::from_fn(|i| (a[i] / b[i]).log2())
}
