//! Finite-difference weights on arbitrary nodes.

/// Weights `w[k][j]` such that `Σ_j w[k][j] f(nodes[j])` approximates the
/// `k`-th derivative of `f` at `x0`, for `k = 0..=max_order`.
///
/// Fornberg's recursion; exact for polynomials of degree `< nodes.len()`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    if n == 0 {
        return c;
    }
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(max_order);
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

/// Derivative of order `order` of sampled data at node `i`, using the
/// `width` nearest nodes (shifted inward at the ends).
pub fn derivative_at(xs: &[f64], ys: &[f64], i: usize, order: usize, width: usize) -> f64 {
    let n = xs.len();
    let width = width.min(n);
    let start = i.saturating_sub(width / 2).min(n - width);
    let nodes = &xs[start..start + width];
    let w = fornberg_weights(xs[i], nodes, order);
    w[order].iter().zip(&ys[start..start + width]).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_central_weights() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[1], vec![-0.5, 0.0, 0.5]);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
    }

    #[test]
    fn exact_on_polynomials_with_uneven_nodes() {
        let xs = [0.0, 0.13, 0.4, 0.55, 0.9, 1.2];
        let p = |x: f64| 2.0 - x + 3.0 * x.powi(3) - 0.5 * x.powi(5);
        let dp = |x: f64| -1.0 + 9.0 * x * x - 2.5 * x.powi(4);
        let ys: Vec<f64> = xs.iter().map(|&x| p(x)).collect();
        for i in 0..xs.len() {
            let d = derivative_at(&xs, &ys, i, 1, 6);
            assert!((d - dp(xs[i])).abs() < 1e-10, "node {i}");
        }
    }
}
