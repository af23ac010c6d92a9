//! Finite-difference weights by Fornberg's recursion.

/// Default accuracy order of central stencils used for derivatives at the origin.
pub const DEFAULT_ACCURACY: usize = 12;

/// Weights `w[k]` with `f^(m)(0) ~ sum_k w[k] f(x[k])` for unit-spaced
/// or arbitrary nodes `x`.
pub fn fornberg_weights(m: usize, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert!(n > m, "need more nodes than the derivative order");
    // c[i][k]: weight of node i for derivative k, built node by node
    let mut c = vec![vec![0.0; m + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0];
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i];
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Half-width of the central stencil for derivative order `m` at the given
/// (even) accuracy order.
pub fn central_half_width(m: usize, accuracy: usize) -> usize {
    if m == 0 {
        return 0;
    }
    let points = 2 * m.div_ceil(2) - 1 + accuracy;
    (points - 1) / 2
}

/// Central weights on offsets `-r..=r` (unit spacing).
pub fn central_weights(m: usize, accuracy: usize) -> Vec<f64> {
    let r = central_half_width(m, accuracy) as i64;
    let x: Vec<f64> = (-r..=r).map(|k| k as f64).collect();
    fornberg_weights(m, &x)
}
