//! Chebyshev basis operations on `[-1, 1]`: Clenshaw evaluation, the
//! derivative-coefficient recurrences, Gauss nodes and the weighted
//! projection used for initial conditions and nonlinear terms.

use crate::error::{Error, Result};

/// Time-dependent Chebyshev coefficients `a_0 .. a_n` of a field snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebState {
    pub coeffs: Vec<f64>,
}

impl ChebState {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// Polynomial order n (one less than the coefficient count).
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// Evaluate `sum a_i T_i(x)` by the Clenshaw backward recurrence.
pub fn cheb_eval(coeffs: &[f64], x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange {
            t: x,
            start: -1.0,
            end: 1.0,
        });
    }
    Ok(cheb_eval_unchecked(coeffs, x))
}

pub(crate) fn cheb_eval_unchecked(coeffs: &[f64], x: f64) -> f64 {
    let n = coeffs.len();
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return coeffs[0];
    }
    let two_x = 2.0 * x;
    let mut b_k1 = 0.0;
    let mut b_k2 = 0.0;
    for &c in coeffs[1..].iter().rev() {
        let b_k = two_x * b_k1 - b_k2 + c;
        b_k2 = b_k1;
        b_k1 = b_k;
    }
    x * b_k1 - b_k2 + coeffs[0]
}

fn c_norm(i: usize) -> f64 {
    if i == 0 {
        2.0
    } else {
        1.0
    }
}

/// Coefficients of the first derivative in the same basis:
/// `a~_i = (2/c_i) sum_{p = i+1, p+i odd} p a_p`, with `a~_n = 0`.
pub fn derivative_coeffs_first(a: &[f64]) -> Vec<f64> {
    let n = a.len().saturating_sub(1);
    let mut out = vec![0.0; a.len()];
    for (i, o) in out.iter_mut().enumerate().take(n) {
        let mut acc = 0.0;
        let mut p = i + 1;
        while p <= n {
            acc += p as f64 * a[p];
            p += 2;
        }
        *o = 2.0 / c_norm(i) * acc;
    }
    out
}

/// Coefficients of the second derivative:
/// `a~~_i = (1/c_i) sum_{p = i+2, p+i even} p (p^2 - i^2) a_p`,
/// with `a~~_{n-1} = a~~_n = 0`.
pub fn derivative_coeffs_second(a: &[f64]) -> Vec<f64> {
    let n = a.len().saturating_sub(1);
    let mut out = vec![0.0; a.len()];
    for i in 0..n.saturating_sub(1) {
        let mut acc = 0.0;
        let mut p = i + 2;
        while p <= n {
            let pf = p as f64;
            acc += pf * (pf * pf - (i * i) as f64) * a[p];
            p += 2;
        }
        out[i] = acc / c_norm(i);
    }
    out
}

/// Chebyshev-Gauss quadrature nodes `X_q = cos(pi (2q+1) / (2m))` with the
/// uniform weight `pi / m` for the `1/sqrt(1-x^2)` measure.
#[derive(Debug, Clone)]
pub struct GaussGrid {
    pub nodes: Vec<f64>,
    /// cos(i * theta_q) table, row-major over i = 0..=order rows when built
    /// with a basis order; empty otherwise.
    cos_table: Vec<f64>,
    table_order: usize,
}

impl GaussGrid {
    pub fn new(m: usize) -> Self {
        let nodes = (0..m)
            .map(|q| (std::f64::consts::PI * (2 * q + 1) as f64 / (2 * m) as f64).cos())
            .collect();
        Self {
            nodes,
            cos_table: Vec::new(),
            table_order: 0,
        }
    }

    /// Grid with a precomputed `T_i(X_q)` table for orders `0..=order`.
    pub fn with_basis(m: usize, order: usize) -> Self {
        let mut g = Self::new(m);
        let m_len = g.nodes.len();
        let mut table = vec![0.0; (order + 1) * m_len];
        for q in 0..m_len {
            let theta = std::f64::consts::PI * (2 * q + 1) as f64 / (2 * m_len) as f64;
            for i in 0..=order {
                table[i * m_len + q] = (i as f64 * theta).cos();
            }
        }
        g.cos_table = table;
        g.table_order = order;
        g
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight(&self) -> f64 {
        std::f64::consts::PI / self.len() as f64
    }

    /// Values `sum_i a_i T_i(X_q)` at every node.
    pub fn synthesize(&self, coeffs: &[f64], out: &mut [f64]) {
        let m = self.len();
        debug_assert_eq!(out.len(), m);
        if !self.cos_table.is_empty() && coeffs.len() <= self.table_order + 1 {
            for (q, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (i, &a) in coeffs.iter().enumerate() {
                    acc += a * self.cos_table[i * m + q];
                }
                *o = acc;
            }
        } else {
            for (q, o) in out.iter_mut().enumerate() {
                *o = cheb_eval_unchecked(coeffs, self.nodes[q]);
            }
        }
    }

    /// Discrete weighted projection of nodal values onto `T_0 .. T_n`:
    /// `f_i = (2 / (c_i m)) sum_q F_q T_i(X_q)`.
    pub fn analyze(&self, values: &[f64], order: usize, out: &mut [f64]) {
        let m = self.len();
        debug_assert_eq!(values.len(), m);
        debug_assert_eq!(out.len(), order + 1);
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            if !self.cos_table.is_empty() && order <= self.table_order {
                for (q, &v) in values.iter().enumerate() {
                    acc += v * self.cos_table[i * m + q];
                }
            } else {
                let theta0 = std::f64::consts::PI / (2 * m) as f64;
                for (q, &v) in values.iter().enumerate() {
                    acc += v * (i as f64 * (2 * q + 1) as f64 * theta0).cos();
                }
            }
            *o = 2.0 / (c_norm(i) * m as f64) * acc;
        }
    }
}

/// Galerkin projection of a profile on `[-1, 1]` onto the first `n + 1`
/// Chebyshev modes via Gauss quadrature with `2(n + 1)` nodes; exact for
/// polynomial input up to the basis order.
pub fn project_initial(u0: impl Fn(f64) -> f64, n: usize) -> ChebState {
    let grid = GaussGrid::new(2 * (n + 1));
    let values: Vec<f64> = grid.nodes.iter().map(|&x| u0(x)).collect();
    let mut coeffs = vec![0.0; n + 1];
    grid.analyze(&values, n, &mut coeffs);
    ChebState::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eval_constant_and_linear() {
        for x in [-1.0, -0.3, 0.0, 0.3, 1.0] {
            assert_relative_eq!(cheb_eval(&[1.0], x).unwrap(), 1.0);
        }
        assert_relative_eq!(cheb_eval(&[0.0, 1.0], 0.3).unwrap(), 0.3);
    }

    #[test]
    fn eval_t2_by_hand() {
        // T_2(0.5) = 2 * 0.25 - 1 = -0.5
        assert_relative_eq!(cheb_eval(&[0.0, 0.0, 1.0], 0.5).unwrap(), -0.5);
    }

    #[test]
    fn eval_outside_domain_rejected() {
        assert!(matches!(
            cheb_eval(&[1.0], 1.5),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn first_derivative_of_t1_plus_t3() {
        // d/dx (T_1 + T_3) = d/dx (4x^3 - 2x) = 12x^2 - 2 = 4 T_0 + 6 T_2
        let d = derivative_coeffs_first(&[0.0, 1.0, 0.0, 1.0]);
        assert_eq!(d.len(), 4);
        assert_relative_eq!(d[0], 4.0);
        assert_relative_eq!(d[1], 0.0);
        assert_relative_eq!(d[2], 6.0);
        assert_relative_eq!(d[3], 0.0);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let d = derivative_coeffs_first(&[7.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(d.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn second_derivative_of_t2() {
        // T_2'' = 4 = 4 T_0
        let d = derivative_coeffs_second(&[0.0, 0.0, 1.0]);
        assert_relative_eq!(d[0], 4.0);
        assert_relative_eq!(d[1], 0.0);
        assert_relative_eq!(d[2], 0.0);
    }

    #[test]
    fn second_derivative_of_linear_vanishes() {
        let d = derivative_coeffs_second(&[0.3, 1.0]);
        assert!(d.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn first_derivative_matches_finite_differences() {
        // degree-7 coefficients; five-point central stencil as the
        // independent oracle at 20 interior points
        let a: Vec<f64> = (0..8).map(|i| ((i * i) as f64 * 0.37 + 0.2).sin()).collect();
        let d = derivative_coeffs_first(&a);
        let h = 1e-3;
        for k in 0..20 {
            let x = -0.9 + 1.8 * k as f64 / 19.0;
            let f = |z: f64| cheb_eval_unchecked(&a, z);
            let fd = (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h))
                / (12.0 * h);
            let exact = cheb_eval_unchecked(&d, x);
            assert!(
                (fd - exact).abs() < 1e-8,
                "x = {x}: fd {fd} vs series {exact}"
            );
        }
    }

    #[test]
    fn second_derivative_is_first_applied_twice() {
        let a: Vec<f64> = (0..11).map(|i| (1.7 * i as f64 + 0.3).cos()).collect();
        let twice = derivative_coeffs_first(&derivative_coeffs_first(&a));
        let direct = derivative_coeffs_second(&a);
        for (x, y) in twice.iter().zip(&direct) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn gauss_nodes_symmetric_interior() {
        let g = GaussGrid::new(12);
        assert_eq!(g.len(), 12);
        for (q, &x) in g.nodes.iter().enumerate() {
            assert!(x > -1.0 && x < 1.0);
            assert_relative_eq!(x, -g.nodes[11 - q], epsilon = 1e-14);
        }
    }

    #[test]
    fn projection_of_constant() {
        let s = project_initial(|_| 1.0, 6);
        assert_relative_eq!(s.coeffs[0], 1.0, epsilon = 1e-14);
        for &c in &s.coeffs[1..] {
            assert!(c.abs() < 1e-14);
        }
    }

    #[test]
    fn projection_of_x() {
        let s = project_initial(|x| x, 6);
        assert_relative_eq!(s.coeffs[1], 1.0, epsilon = 1e-14);
        for (i, &c) in s.coeffs.iter().enumerate() {
            if i != 1 {
                assert!(c.abs() < 1e-14, "coeff {i} = {c}");
            }
        }
    }

    #[test]
    fn projection_of_x_squared() {
        // x^2 = (T_0 + T_2) / 2
        let s = project_initial(|x| x * x, 6);
        assert_relative_eq!(s.coeffs[0], 0.5, epsilon = 1e-14);
        assert_relative_eq!(s.coeffs[2], 0.5, epsilon = 1e-14);
        for i in [1, 3, 4, 5, 6] {
            assert!(s.coeffs[i].abs() < 1e-14);
        }
    }

    #[test]
    fn synthesize_matches_clenshaw() {
        let a: Vec<f64> = (0..9).map(|i| (0.9 * i as f64).sin()).collect();
        let g = GaussGrid::with_basis(16, 8);
        let mut vals = vec![0.0; 16];
        g.synthesize(&a, &mut vals);
        for (q, &x) in g.nodes.iter().enumerate() {
            assert_relative_eq!(vals[q], cheb_eval_unchecked(&a, x), epsilon = 1e-13);
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // analyze(synthesize(a)) = a for coefficients within the basis
            #[test]
            fn projection_idempotent(seed in 0u64..500, n in 2usize..12) {
                let a: Vec<f64> = (0..=n)
                    .map(|i| ((i as f64 + 1.1) * (seed as f64 + 0.37)).sin())
                    .collect();
                let g = GaussGrid::with_basis(2 * (n + 1), n);
                let mut vals = vec![0.0; g.len()];
                g.synthesize(&a, &mut vals);
                let mut back = vec![0.0; n + 1];
                g.analyze(&vals, n, &mut back);
                for (x, y) in a.iter().zip(&back) {
                    prop_assert!((x - y).abs() < 1e-12);
                }
            }

            // derivative recurrence against the finite-difference oracle;
            // step chosen so the stencil truncation stays below 1e-8 for the
            // high-degree polynomial derivatives near the domain edges
            #[test]
            fn derivative_vs_fd(seed in 0u64..200, n in 3usize..10) {
                let a: Vec<f64> = (0..=n)
                    .map(|i| ((i as f64 * 2.3 + seed as f64) * 0.71).cos())
                    .collect();
                let d = derivative_coeffs_first(&a);
                let h = 5e-4;
                for k in 0..20 {
                    let x = -0.85 + 1.7 * k as f64 / 19.0;
                    let f = |z: f64| cheb_eval_unchecked(&a, z);
                    let fd = (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h)
                        + f(x - 2.0 * h)) / (12.0 * h);
                    prop_assert!((fd - cheb_eval_unchecked(&d, x)).abs() < 1e-8);
                }
            }
        }
    }
}
