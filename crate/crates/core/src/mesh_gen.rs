//! Built-in mesh generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quad_mesh::QuadMesh;
use crate::scalar::Scalar;

fn build<T: Scalar>(vertices: Vec<[f64; 2]>, quads: Vec<[usize; 4]>) -> Result<QuadMesh<T>> {
    QuadMesh::new(vertices.into_iter().map(|v| [T::lit(v[0]), T::lit(v[1])]).collect(), quads)
}

fn grid_quads(nx: usize, ny: usize) -> Vec<[usize; 4]> {
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut quads = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            quads.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    quads
}

/// `n x n` grid of squares on the unit square.
pub fn unit_square_grid<T: Scalar>(n: usize) -> Result<QuadMesh<T>> {
    perturbed_grid(n, 0, 0.0)
}

/// Unit-square grid with interior vertices moved by up to `magnitude * h`
/// in each coordinate. `magnitude` must stay below 0.25 to keep quads convex.
pub fn perturbed_grid<T: Scalar>(n: usize, seed: u64, magnitude: f64) -> Result<QuadMesh<T>> {
    if n == 0 {
        return Err(Error::Unsupported("grid needs at least one cell per direction".into()));
    }
    if !(0.0..0.25).contains(&magnitude) {
        return Err(Error::Unsupported(format!("perturbation magnitude {magnitude} outside [0, 0.25)")));
    }
    let h = 1.0 / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let mut v = [i as f64 * h, j as f64 * h];
            if magnitude > 0.0 && i > 0 && i < n && j > 0 && j < n {
                v[0] += rng.gen_range(-magnitude..=magnitude) * h;
                v[1] += rng.gen_range(-magnitude..=magnitude) * h;
            }
            vertices.push(v);
        }
    }
    build(vertices, grid_quads(n, n))
}

/// Three unit squares forming an L, with the reentrant corner at `(1, 1)`.
pub fn l_shape<T: Scalar>() -> Result<QuadMesh<T>> {
    let vertices = vec![
        [0.0, 0.0],
        [1.0, 0.0],
        [2.0, 0.0],
        [0.0, 1.0],
        [1.0, 1.0],
        [2.0, 1.0],
        [0.0, 2.0],
        [1.0, 2.0],
    ];
    build(vertices, vec![[0, 1, 4, 3], [1, 2, 5, 4], [3, 4, 7, 6]])
}

/// Trapezoid mesh of the unit square with `2^(level+1)` columns and rows.
///
/// Interior horizontal lines zigzag by `h/4` with alternating sign, so every
/// element is a trapezoid with two vertical sides. Each level is generated
/// afresh: the family is not nested and the shapes do not approach
/// parallelograms.
pub fn trapezoid<T: Scalar>(level: usize) -> Result<QuadMesh<T>> {
    let n = 1usize << (level + 1);
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let shift = if j > 0 && j < n {
                if (i + j) % 2 == 0 {
                    0.25 * h
                } else {
                    -0.25 * h
                }
            } else {
                0.0
            };
            vertices.push([i as f64 * h, j as f64 * h + shift]);
        }
    }
    build(vertices, grid_quads(n, n))
}

/// Fan of `valence` kite-shaped quads around an interior vertex at the origin.
pub fn extraordinary_vertex<T: Scalar>(valence: usize) -> Result<QuadMesh<T>> {
    if valence < 3 {
        return Err(Error::Unsupported(format!("fan valence {valence} < 3")));
    }
    let step = std::f64::consts::TAU / valence as f64;
    let angles: Vec<f64> = (0..valence).map(|m| m as f64 * step).collect();
    fan(&angles, &vec![1.0; valence], [0.0, 0.0])
}

/// Five irregular quads around an interior vertex of valence five.
///
/// The domain is a convex pentagon with all corner angles below 121 degrees;
/// each spoke ends on a pentagon side, at an off-center position, so no
/// element is a parallelogram.
pub fn unstructured<T: Scalar>() -> Result<QuadMesh<T>> {
    let angles: [f64; 5] = [-0.35, 0.9, 2.15, 3.45, 4.7];
    let radii = [2.0, 2.2, 1.8, 2.1, 1.9];
    let split = [0.45, 0.58, 0.4, 0.62, 0.5];
    let corners: Vec<[f64; 2]> = angles.iter().zip(radii).map(|(a, r)| [r * a.cos(), r * a.sin()]).collect();
    let mut vertices = vec![[0.1, -0.06]];
    vertices.extend(&corners);
    for (m, t) in split.iter().enumerate() {
        let (a, b) = (corners[m], corners[(m + 1) % 5]);
        vertices.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
    }
    let quads = (0..5).map(|m| [0, 6 + m, 1 + (m + 1) % 5, 6 + (m + 1) % 5]).collect();
    build(vertices, quads)
}

/// Quads `(center, spoke_m, outer_m, spoke_{m+1})`; outer points sit on the
/// angle bisector where the kite would have right angles at the spokes.
fn fan<T: Scalar>(angles: &[f64], radii: &[f64], center: [f64; 2]) -> Result<QuadMesh<T>> {
    let v = angles.len();
    let mut vertices = vec![center];
    for (a, r) in angles.iter().zip(radii) {
        vertices.push([center[0] + r * a.cos(), center[1] + r * a.sin()]);
    }
    for m in 0..v {
        let a0 = angles[m];
        let mut a1 = angles[(m + 1) % v];
        if a1 <= a0 {
            a1 += std::f64::consts::TAU;
        }
        let half = 0.5 * (a1 - a0);
        let r = 0.5 * (radii[m] + radii[(m + 1) % v]) / half.cos();
        let mid = a0 + half;
        vertices.push([center[0] + r * mid.cos(), center[1] + r * mid.sin()]);
    }
    let quads = (0..v).map(|m| [0, 1 + m, 1 + v + m, 1 + (m + 1) % v]).collect();
    build(vertices, quads)
}

/// Generator by name with optional `:`-separated parameters, as used on the
/// command line: `unit-square-grid:N`, `l-shape`, `trapezoid:LEVEL`,
/// `perturbed-grid:N:SEED:MAGNITUDE`, `extraordinary-vertex:VALENCE`,
/// `unstructured`.
pub fn by_name<T: Scalar>(spec: &str) -> Result<QuadMesh<T>> {
    let mut parts = spec.split(':');
    let name = parts.next().unwrap_or_default();
    let args: Vec<&str> = parts.collect();
    let int = |i: usize, default: usize| -> Result<usize> {
        args.get(i)
            .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad integer parameter {s:?} for {name}"))))
            .unwrap_or(Ok(default))
    };
    match name {
        "unit-square-grid" => unit_square_grid(int(0, 1)?),
        "l-shape" => l_shape(),
        "trapezoid" => trapezoid(int(0, 0)?),
        "perturbed-grid" => {
            let magnitude = args
                .get(2)
                .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad magnitude {s:?}"))))
                .unwrap_or(Ok(0.1))?;
            perturbed_grid(int(0, 4)?, int(1, 0)? as u64, magnitude)
        }
        "extraordinary-vertex" => extraordinary_vertex(int(0, 3)?),
        "unstructured" => unstructured(),
        _ => Err(Error::Unsupported(format!("unknown mesh generator {name:?}"))),
    }
}
