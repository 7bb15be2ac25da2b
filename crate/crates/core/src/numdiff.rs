//! Finite-difference stencils shared by the curve, planar, and Frenet
//! modules.
//!
//! Stencils are exposed as (offset, weight) tables; the caller combines
//! values of whatever type it differentiates and divides by the step raised
//! to the derivative order. `fornberg_weights` covers non-uniform grids
//! (sampled CSV input).

/// Central stencil for the first derivative, O(h^2).
pub const D1_ORDER2: &[(isize, f64)] = &[(-1, -0.5), (1, 0.5)];

/// Central stencil for the first derivative, O(h^4).
pub const D1_ORDER4: &[(isize, f64)] = &[
    (-2, 1.0 / 12.0),
    (-1, -8.0 / 12.0),
    (1, 8.0 / 12.0),
    (2, -1.0 / 12.0),
];

/// Central stencil for the second derivative, O(h^2).
pub const D2_ORDER2: &[(isize, f64)] = &[(-1, 1.0), (0, -2.0), (1, 1.0)];

/// Central stencil for the second derivative, O(h^4).
pub const D2_ORDER4: &[(isize, f64)] = &[
    (-2, -1.0 / 12.0),
    (-1, 16.0 / 12.0),
    (0, -30.0 / 12.0),
    (1, 16.0 / 12.0),
    (2, -1.0 / 12.0),
];

/// Central stencil for the third derivative, O(h^2).
pub const D3_ORDER2: &[(isize, f64)] = &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)];

/// One Richardson extrapolation level for an O(h^p) estimate: combines the
/// full-step and half-step values into an O(h^{p+2}) one.
pub fn richardson(coarse_h: f64, fine_half_h: f64, p: i32) -> f64 {
    let factor = 2f64.powi(p);
    (factor * fine_half_h - coarse_h) / (factor - 1.0)
}

/// Fornberg weights for the m-th derivative at `x0` from arbitrary nodes.
///
/// Returns `weights[k][i]`: the weight of `f(nodes[i])` in the k-th
/// derivative, for k = 0..=m. Nodes need not be uniformly spaced.
pub fn fornberg_weights(x0: f64, nodes: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    assert!(n > m, "need more nodes than the derivative order");
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}
