use super::*;
use crate::linalg::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_square() -> BilinearMap<f64> {
    BilinearMap::new([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
}

/// Random convex quad with corner determinants bounded away from zero.
fn random_quad(rng: &mut ChaCha8Rng) -> BilinearMap<f64> {
    loop {
        let base = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let s = rng.gen_range(0.3..3.0);
        let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let (c, sn) = (th.cos(), th.sin());
        let off = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let corners = base.map(|v| {
            let x = v[0] + rng.gen_range(-0.3..0.3);
            let y = v[1] + rng.gen_range(-0.3..0.3);
            [off[0] + s * (c * x - sn * y), off[1] + s * (sn * x + c * y)]
        });
        let map = BilinearMap::new(corners);
        let dets = map.corner_dets();
        if dets.iter().all(|&a| a > 0.15 * s * s) {
            return map;
        }
    }
}

fn identity_error(m: &DenseMatrix<f64>) -> f64 {
    let mut err: f64 = 0.0;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let want = if i == j { 1.0 } else { 0.0 };
            err = err.max((m[(i, j)] - want).abs());
        }
    }
    err
}

#[test]
fn spec_counts() {
    for (p, k, dim) in [(5, 1, 32), (4, 2, 37), (3, 3, 44), (5, 2, 24 + 12 + 16), (6, 1, 24 + 12 + 9)] {
        let s = ElementSpec::new(p, k).unwrap();
        assert_eq!(s.dim(), dim, "p={p} k={k}");
        assert_eq!(s.local_dofs().len(), dim);
    }
    for p in 3..=5 {
        let s = ElementSpec::default_for(p).unwrap();
        assert_eq!(s.dim(), 28 + (7 - p) * (7 - p));
        assert_eq!(s.n(), if p == 5 { 6 } else { 11 - p });
    }
    assert_eq!(ElementSpec::new(5, 2).unwrap().per_edge(), 3);
    assert!(ElementSpec::new(3, 2).is_err());
    assert!(ElementSpec::new(2, 4).is_err());
}

#[test]
fn anchor_points() {
    let s = ElementSpec::default_for(3).unwrap();
    let f: Vec<f64> = s.face_params();
    let want = [2.0, 4.0, 5.0, 7.0].map(|v| v / 9.0);
    assert!(f.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-15));
    for p in 3..=5 {
        let s = ElementSpec::default_for(p).unwrap();
        let e: Vec<f64> = s.edge_normal_params();
        assert_eq!(e.len(), 1);
        assert!((e[0] - 0.5).abs() < 1e-15);
        assert!(s.edge_point_params::<f64>().is_empty());
    }
    let s = ElementSpec::new(5, 2).unwrap();
    let pts: Vec<f64> = s.edge_point_params();
    assert_eq!(pts.len(), 1);
    assert!((pts[0] - 0.5).abs() < 1e-15);
    assert_eq!(s.edge_normal_params::<f64>().len(), 2);
}

#[test]
fn geometry_of_unit_square() {
    let g = ElementGeometry::new(&unit_square());
    assert_eq!(g.t, [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]);
    assert_eq!(g.a, [1.0; 4]);
    assert_eq!(g.q, [[0.0, 0.0]; 4]);
    assert_eq!(g.b0(1), 0.0);
    assert_eq!(g.b1(1), 0.0);
    assert_eq!(g.t(0), g.t(4));
    assert_eq!(g.n(1), [0.0, 1.0]);
    let g = ElementGeometry::new(&BilinearMap::new([[0.0, 0.0], [2.0, 0.0], [3.0, 2.0], [0.0, 1.0]]));
    assert_eq!(g.q(1), [1.0, 1.0]);
}

#[test]
fn table_rotation_and_display() {
    let rows: Vec<Vec<f64>> = (0..6)
        .map(|r| (0..6).map(|c| if r == 3 && c == 2 { 1.0 } else { 0.0 }).collect())
        .collect();
    let b22 = CoeffTable::from_display_rows(&rows).unwrap();
    assert_eq!(b22, CoeffTable::unit(6, 2, 2));
    assert_eq!(b22.display_rows(), rows);
    assert_eq!(b22.rotate(1), b22);
    assert_eq!(b22.rotate(2), CoeffTable::unit(6, 3, 2));
    let t = CoeffTable::from_coefficients(4, (0..16).map(|v| v as f64).collect()).unwrap();
    let mut r = t.clone();
    for _ in 0..4 {
        r = r.rotate(2);
    }
    assert_eq!(r, t);
    assert_eq!(t.rotate(2).rotate(3), t.rotate(4));
    assert_eq!(t.rotate(3).rotate(3), t);
    assert!(CoeffTable::from_display_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    // corner pattern moves to the corner of vertex k
    let c = CoeffTable::<f64>::unit(5, 0, 0);
    assert_eq!(c.rotate(2), CoeffTable::unit(5, 4, 0));
    assert_eq!(c.rotate(3), CoeffTable::unit(5, 4, 4));
    assert_eq!(c.rotate(4), CoeffTable::unit(5, 0, 4));
}

#[test]
fn explicit_p5_unit_square_entries() {
    let b = build_basis_explicit(&unit_square(), 5).unwrap();
    let e1 = b.table(24);
    let nz: Vec<(usize, usize, f64)> = (0..6)
        .flat_map(|j2| (0..6).map(move |j1| (j1, j2)))
        .map(|(j1, j2)| (j1, j2, e1.get(j1, j2)))
        .filter(|t| t.2 != 0.0)
        .collect();
    assert_eq!(nz.len(), 2);
    assert!(nz.iter().all(|&(_, j2, v)| j2 == 1 && (v - 0.32).abs() < 1e-15));
    assert_eq!(b.table(0).get(0, 0), 1.0);
}

#[test]
fn explicit_matches_numeric() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for p in 3..=5 {
        for trial in 0..20 {
            let map = if trial == 0 { unit_square() } else { random_quad(&mut rng) };
            let spec = ElementSpec::default_for(p).unwrap();
            let ex = build_basis_explicit(&map, p).unwrap();
            let nu = build_basis_numeric(&map, spec, InteriorConvention::Coefficients).unwrap();
            let mut worst = (0.0f64, 0usize);
            for f in 0..spec.dim() {
                let d = ex.table(f).max_abs_diff(&nu.table(f));
                if d > worst.0 {
                    worst = (d, f);
                }
            }
            assert!(worst.0 < 1e-10, "p={p} trial={trial}: function {} differs by {:e}", worst.1, worst.0);
        }
    }
}

#[test]
fn numeric_duality() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (p, k) in [(3, 3), (4, 2), (5, 1), (5, 2), (6, 1), (4, 3)] {
        let spec = ElementSpec::new(p, k).unwrap();
        for _ in 0..3 {
            let map = random_quad(&mut rng);
            for conv in [InteriorConvention::Coefficients, InteriorConvention::FacePoints] {
                let b = build_basis_numeric(&map, spec, conv).unwrap();
                let err = identity_error(&b.duality_matrix());
                assert!(err < 1e-10, "p={p} k={k} {conv:?}: {err:e}");
            }
        }
    }
}

#[test]
fn eval_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for p in 3..=5 {
        let map = random_quad(&mut rng);
        let b = build_basis_explicit(&map, p).unwrap().to_face_points().unwrap();
        for xi in [[0.3, 0.8], [0.0, 0.5], [0.91, 0.07]] {
            let jets = b.eval(xi);
            let value_like: Vec<bool> = b
                .dofs()
                .iter()
                .map(|d| {
                    matches!(
                        d,
                        LocalDof::Vertex { data: VertexData::Value, .. } | LocalDof::EdgePoint { .. } | LocalDof::Interior { .. }
                    )
                })
                .collect();
            for c in 0..6 {
                let s: f64 = jets.iter().zip(&value_like).filter(|(_, &v)| v).map(|(j, _)| j[c]).sum();
                let want = if c == 0 { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-9, "p={p} component {c}: {s}");
            }
        }
        let at_v1 = b.eval([0.0, 0.0]);
        assert!((at_v1[0][0] - 1.0).abs() < 1e-12);
        assert!(at_v1[0][1..].iter().all(|v| v.abs() < 1e-9));
        let off = b.spec().edge_offset(0);
        let mid = b.eval([0.5, 0.0]);
        let n = ElementGeometry::new(&map).n[0];
        let dn = mid[off][1] * n[0] + mid[off][2] * n[1];
        assert!((dn - 1.0).abs() < 1e-11, "p={p}: {dn}");
    }
}

fn lagrange_residual(nodes: &[f64], vals: &[f64], x: f64, fx: f64) -> f64 {
    let mut s = 0.0;
    for (i, (&xi, &vi)) in nodes.iter().zip(vals).enumerate() {
        let mut l = 1.0;
        for (j, &xj) in nodes.iter().enumerate() {
            if j != i {
                l *= (x - xj) / (xi - xj);
            }
        }
        s += vi * l;
    }
    (s - fx).abs()
}

#[test]
fn normal_derivatives_have_reduced_degree() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (p, k) in [(3, 3), (4, 2), (5, 1), (5, 2)] {
        let spec = ElementSpec::new(p, k).unwrap();
        let map = random_quad(&mut rng);
        let b = build_basis_numeric(&map, spec, InteriorConvention::FacePoints).unwrap();
        let g = ElementGeometry::new(&map);
        for e in 0..4 {
            let nv = g.n[e];
            for seg in 0..k {
                let at = |s: f64| -> Vec<f64> {
                    b.eval(edge_param(e, s)).iter().map(|j| j[1] * nv[0] + j[2] * nv[1]).collect()
                };
                let lo = seg as f64 / k as f64;
                let w = 1.0 / k as f64;
                let nodes: Vec<f64> = (0..p).map(|i| lo + w * (0.05 + 0.9 * i as f64 / (p - 1) as f64)).collect();
                let vals: Vec<Vec<f64>> = nodes.iter().map(|&s| at(s)).collect();
                for probe in [0.13, 0.58, 0.97] {
                    let x = lo + w * probe;
                    let fx = at(x);
                    for f in 0..b.dim() {
                        let v: Vec<f64> = vals.iter().map(|r| r[f]).collect();
                        let scale = 1.0 + v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
                        let res = lagrange_residual(&nodes, &v, x, fx[f]);
                        assert!(res < 1e-10 * scale, "p={p} k={k} edge {e} fn {f}: {res:e}");
                    }
                }
            }
        }
    }
}

#[test]
fn macro_elements_are_smooth_across_inner_lines() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (p, orders) in [(3, 3usize), (4, 6usize)] {
        // compare value+gradient (3 entries) or the full jet (6 entries)
        let map = random_quad(&mut rng);
        let b = build_basis_explicit(&map, p).unwrap();
        let k = b.spec().segments;
        for m in 1..k {
            let x = m as f64 / k as f64;
            for s in [0.1, 0.45, 0.8] {
                for dir in 0..2 {
                    let xi = if dir == 0 { [x, s] } else { [s, x] };
                    let mut lim_l = [Limit::FromRight; 2];
                    lim_l[dir] = Limit::FromLeft;
                    let l = b.eval_with(xi, lim_l);
                    let r = b.eval_with(xi, [Limit::FromRight; 2]);
                    for f in 0..b.dim() {
                        for c in 0..orders {
                            assert!((l[f][c] - r[f][c]).abs() < 1e-10 * (1.0 + r[f][c].abs()), "p={p} f={f} c={c}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn face_point_conversion_matches_direct_build() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for p in 3..=5 {
        let map = random_quad(&mut rng);
        let a = build_basis_explicit(&map, p).unwrap().to_face_points().unwrap();
        let b = build_basis_numeric(&map, ElementSpec::default_for(p).unwrap(), InteriorConvention::FacePoints).unwrap();
        for f in 0..a.dim() {
            assert!(a.table(f).max_abs_diff(&b.table(f)) < 1e-10, "p={p} f={f}");
        }
        assert!(identity_error(&a.duality_matrix()) < 1e-10);
    }
}

#[test]
fn unsupported_explicit_degree() {
    assert!(build_basis_explicit(&unit_square(), 6).is_err());
    assert!(build_basis_explicit(&unit_square(), 2).is_err());
}

#[test]
fn single_precision_build() {
    let map = BilinearMap::<f32>::new([[0.0, 0.0], [1.2, 0.1], [1.0, 1.1], [-0.1, 0.9]]);
    let b = build_basis_explicit(&map, 5).unwrap();
    let nu = build_basis_numeric(&map, ElementSpec::default_for(5).unwrap(), InteriorConvention::Coefficients).unwrap();
    for f in 0..b.dim() {
        assert!(b.table(f).max_abs_diff(&nu.table(f)) < 1e-3);
    }
}
