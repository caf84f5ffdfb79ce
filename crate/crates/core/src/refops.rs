//! Reference-element machinery: Legendre-Gauss-Lobatto nodes and weights,
//! the Lagrange differentiation matrix, and nodal basis evaluation.
//!
//! Everything here is built once per polynomial degree and shared immutably
//! across the whole solver.

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 16;

/// LGL nodes, quadrature weights and the differentiation matrix
/// `D[i][j] = phi_j'(xi_i)` for a fixed degree.
#[derive(Debug, Clone)]
pub struct ReferenceOperators {
    pub degree: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    diff: Vec<f64>,
}

impl ReferenceOperators {
    pub fn new(degree: usize) -> Result<Self> {
        let (nodes, weights) = lgl_nodes_weights(degree)?;
        let diff = differentiation_matrix(&nodes)?;
        Ok(ReferenceOperators {
            degree,
            nodes,
            weights,
            diff,
        })
    }

    /// Number of nodes per direction, N + 1.
    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.degree + 1
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.diff[i * (self.degree + 1) + j]
    }

    /// Differentiates nodal samples of a 1D function.
    pub fn apply_d(&self, values: &[f64], out: &mut [f64]) {
        let n = self.n_nodes();
        debug_assert_eq!(values.len(), n);
        debug_assert_eq!(out.len(), n);
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += self.d(i, j) * values[j];
            }
            out[i] = acc;
        }
    }
}

/// Evaluates the Legendre polynomial `P_n` and its derivative at `x`.
pub fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    let mut dp_prev = 0.0;
    let mut dp = 1.0;
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        let dp_next = dp_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp)
}

/// Legendre-Gauss-Lobatto nodes and weights on [-1, 1].
///
/// Interior nodes are the roots of `P_N'`, found by Newton iteration from
/// Chebyshev-Gauss-Lobatto starting guesses; weights use the closed form
/// `w_i = 2 / (N (N+1) P_N(xi_i)^2)`.
pub fn lgl_nodes_weights(degree: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if degree < 1 || degree > MAX_DEGREE {
        return Err(Error::config(format!(
            "polynomial degree must be in [1, {}], got {}",
            MAX_DEGREE, degree
        )));
    }
    let n = degree;
    let nf = n as f64;
    let mut nodes = vec![0.0; n + 1];
    nodes[0] = -1.0;
    nodes[n] = 1.0;
    for i in 1..n {
        // Chebyshev-Gauss-Lobatto initial guess, ascending order.
        let mut x = -(std::f64::consts::PI * i as f64 / nf).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pair(n, x);
            // q(x) = (1 - x^2) P_N'(x), q'(x) = -N(N+1) P_N(x)
            let q = (1.0 - x * x) * dp;
            let dq = -nf * (nf + 1.0) * p;
            let dx = q / dq;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
    }
    // Odd-length node sets have an exact middle root.
    if n % 2 == 0 {
        nodes[n / 2] = 0.0;
    }
    let mut weights = vec![0.0; n + 1];
    for i in 0..=n {
        let (p, _) = legendre_pair(n, nodes[i]);
        weights[i] = 2.0 / (nf * (nf + 1.0) * p * p);
    }
    Ok((nodes, weights))
}

/// Differentiation matrix `D[i][j] = phi_j'(xi_i)` via barycentric weights,
/// with the diagonal from the negative-sum trick so row sums vanish exactly.
pub fn differentiation_matrix(nodes: &[f64]) -> Result<Vec<f64>> {
    let n = nodes.len();
    for w in nodes.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::geometry(
                "differentiation matrix requires strictly increasing nodes",
            ));
        }
    }
    let mut bary = vec![1.0; n];
    for j in 0..n {
        for m in 0..n {
            if m != j {
                bary[j] *= nodes[j] - nodes[m];
            }
        }
        bary[j] = 1.0 / bary[j];
    }
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = bary[j] / (bary[i] * (nodes[i] - nodes[j]));
                d[i * n + j] = v;
                diag -= v;
            }
        }
        d[i * n + i] = diag;
    }
    Ok(d)
}

/// Evaluates the j-th Lagrange basis polynomial for `nodes` at `x`.
pub fn lagrange_eval(nodes: &[f64], j: usize, x: f64) -> f64 {
    let mut value = 1.0;
    for (i, &xi) in nodes.iter().enumerate() {
        if i != j {
            value *= (x - xi) / (nodes[j] - xi);
        }
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn degree_out_of_range_is_config_error() {
        assert!(matches!(lgl_nodes_weights(0), Err(Error::Config(_))));
        assert!(matches!(lgl_nodes_weights(17), Err(Error::Config(_))));
    }

    #[test]
    fn n1_nodes_and_weights_are_endpoints() {
        let (nodes, weights) = lgl_nodes_weights(1).unwrap();
        assert_eq!(nodes, vec![-1.0, 1.0]);
        assert_eq!(weights, vec![1.0, 1.0]);
    }

    #[test]
    fn n2_matches_exactness_conditions() {
        // Oracle: with symmetric nodes (-1, m, 1) and weights (a, b, a),
        // exactness for 1, xi^2 forces a = 1/3, b = 4/3, m = 0.
        let (nodes, weights) = lgl_nodes_weights(2).unwrap();
        assert!((nodes[0] + 1.0).abs() < 1e-15);
        assert!(nodes[1].abs() < 1e-15);
        assert!((nodes[2] - 1.0).abs() < 1e-15);
        assert!((weights[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((weights[1] - 4.0 / 3.0).abs() < 1e-15);
        assert!((weights[2] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_two() {
        for n in 1..=MAX_DEGREE {
            let (_, weights) = lgl_nodes_weights(n).unwrap();
            let sum: f64 = weights.iter().sum();
            assert!((sum - 2.0).abs() < 1e-13, "N={} sum={}", n, sum);
        }
    }

    #[test]
    fn nodes_sorted_with_unit_endpoints() {
        for n in 1..=MAX_DEGREE {
            let (nodes, weights) = lgl_nodes_weights(n).unwrap();
            assert_eq!(nodes[0], -1.0);
            assert_eq!(nodes[n], 1.0);
            for w in nodes.windows(2) {
                assert!(w[1] > w[0]);
            }
            assert!(weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn quadrature_exact_for_monomials() {
        for n in 1..=8 {
            let (nodes, weights) = lgl_nodes_weights(n).unwrap();
            for k in 0..=(2 * n - 1) {
                let quad: f64 = nodes
                    .iter()
                    .zip(&weights)
                    .map(|(x, w)| w * x.powi(k as i32))
                    .sum();
                let exact = if k % 2 == 0 {
                    2.0 / (k as f64 + 1.0)
                } else {
                    0.0
                };
                assert!(
                    (quad - exact).abs() <= 1e-12,
                    "N={} k={} quad={} exact={}",
                    n,
                    k,
                    quad,
                    exact
                );
            }
        }
    }

    #[test]
    fn diff_matrix_n1_by_hand() {
        // phi_0 = (1 - x)/2, phi_1 = (1 + x)/2 differentiated by hand.
        let ops = ReferenceOperators::new(1).unwrap();
        assert!((ops.d(0, 0) + 0.5).abs() < 1e-15);
        assert!((ops.d(0, 1) - 0.5).abs() < 1e-15);
        assert!((ops.d(1, 0) + 0.5).abs() < 1e-15);
        assert!((ops.d(1, 1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn diff_matrix_row_sums_vanish() {
        for n in 1..=8 {
            let ops = ReferenceOperators::new(n).unwrap();
            for i in 0..=n {
                let sum: f64 = (0..=n).map(|j| ops.d(i, j)).sum();
                assert!(sum.abs() <= 1e-13, "N={} row={} sum={}", n, i, sum);
            }
        }
    }

    #[test]
    fn diff_matrix_exact_on_square() {
        for n in 2..=8 {
            let ops = ReferenceOperators::new(n).unwrap();
            let values: Vec<f64> = ops.nodes.iter().map(|x| x * x).collect();
            let mut deriv = vec![0.0; n + 1];
            ops.apply_d(&values, &mut deriv);
            for (i, &x) in ops.nodes.iter().enumerate() {
                assert!((deriv[i] - 2.0 * x).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diff_matrix_exact_on_random_polynomials() {
        let mut rng = StdRng::seed_from_u64(7);
        for n in 1..=8 {
            let ops = ReferenceOperators::new(n).unwrap();
            for _ in 0..20 {
                let coeffs: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let eval = |x: f64| {
                    let mut acc = 0.0;
                    for &c in coeffs.iter().rev() {
                        acc = acc * x + c;
                    }
                    acc
                };
                let eval_deriv = |x: f64| {
                    let mut acc = 0.0;
                    for (k, &c) in coeffs.iter().enumerate().skip(1).rev() {
                        acc = acc * x + k as f64 * c;
                    }
                    acc
                };
                let values: Vec<f64> = ops.nodes.iter().map(|&x| eval(x)).collect();
                let mut deriv = vec![0.0; n + 1];
                ops.apply_d(&values, &mut deriv);
                let scale = ops
                    .nodes
                    .iter()
                    .map(|&x| eval_deriv(x).abs())
                    .fold(0.0_f64, f64::max)
                    .max(1.0);
                for (i, &x) in ops.nodes.iter().enumerate() {
                    assert!(
                        (deriv[i] - eval_deriv(x)).abs() <= 1e-11 * scale,
                        "N={} node {} err {}",
                        n,
                        i,
                        (deriv[i] - eval_deriv(x)).abs()
                    );
                }
            }
        }
    }

    #[test]
    fn sbp_identity_holds() {
        for n in 1..=8 {
            let ops = ReferenceOperators::new(n).unwrap();
            for i in 0..=n {
                for j in 0..=n {
                    let lhs = ops.weights[i] * ops.d(i, j) + ops.weights[j] * ops.d(j, i);
                    let rhs = if i == n && j == n {
                        1.0
                    } else if i == 0 && j == 0 {
                        -1.0
                    } else {
                        0.0
                    };
                    assert!(
                        (lhs - rhs).abs() <= 1e-13,
                        "N={} ({},{}) residual={}",
                        n,
                        i,
                        j,
                        (lhs - rhs).abs()
                    );
                }
            }
        }
    }

    #[test]
    fn duplicate_nodes_rejected() {
        assert!(matches!(
            differentiation_matrix(&[-1.0, 0.0, 0.0, 1.0]),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn lagrange_nodal_property() {
        let (nodes, _) = lgl_nodes_weights(4).unwrap();
        for j in 0..nodes.len() {
            for (i, &x) in nodes.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((lagrange_eval(&nodes, j, x) - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn lagrange_partition_of_unity() {
        let (nodes, _) = lgl_nodes_weights(5).unwrap();
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let x: f64 = rng.gen_range(-1.0..1.0);
            let sum: f64 = (0..nodes.len()).map(|j| lagrange_eval(&nodes, j, x)).sum();
            assert!((sum - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn lagrange_linear_midpoint() {
        // N=1, j=1: phi_1(x) = (x + 1)/2, so phi_1(0) = 1/2.
        let (nodes, _) = lgl_nodes_weights(1).unwrap();
        assert!((lagrange_eval(&nodes, 1, 0.0) - 0.5).abs() < 1e-15);
    }
}
