//! Gauss-Legendre rules on `[0, 1]`.

use crate::scalar::Scalar;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[0, 1]`.
pub fn gauss_legendre<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n > 0, "quadrature needs at least one node");
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes.into_iter().map(T::lit).collect(), weights.into_iter().map(T::lit).collect())
}

/// Tensor rule with `n` nodes per direction on every cell of a uniform
/// `cells x cells` split of the unit square. Returns `(point, weight)`.
pub fn split_square_rule<T: Scalar>(n: usize, cells: usize) -> Vec<([T; 2], T)> {
    let (x, w) = gauss_legendre::<T>(n);
    let h = T::one() / T::from_usize_lossy(cells);
    let mut out = Vec::with_capacity(n * n * cells * cells);
    for c2 in 0..cells {
        for c1 in 0..cells {
            let (o1, o2) = (T::from_usize_lossy(c1) * h, T::from_usize_lossy(c2) * h);
            for (b, &wb) in x.iter().zip(&w) {
                for (a, &wa) in x.iter().zip(&w) {
                    out.push(([o1 + h * *a, o2 + h * *b], wa * wb * h * h));
                }
            }
        }
    }
    out
}
