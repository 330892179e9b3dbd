//! Small dense LU factorization with partial pivoting, sized for the Newton
//! systems of the stiff integrator (dimension tens, not thousands).

use crate::error::{Error, Result};

pub(crate) struct Lu {
    n: usize,
    /// Row-major factored matrix.
    a: Vec<f64>,
    piv: Vec<usize>,
}

impl Lu {
    pub fn factor(mut a: Vec<f64>, n: usize) -> Result<Self> {
        debug_assert_eq!(a.len(), n * n);
        let mut piv: Vec<usize> = (0..n).collect();
        for col in 0..n {
            // pivot search
            let mut p = col;
            let mut best = a[col * n + col].abs();
            for r in (col + 1)..n {
                let v = a[r * n + col].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 {
                return Err(Error::Contract("singular Newton matrix".into()));
            }
            if p != col {
                for c in 0..n {
                    a.swap(col * n + c, p * n + c);
                }
                piv.swap(col, p);
            }
            let inv = 1.0 / a[col * n + col];
            for r in (col + 1)..n {
                let f = a[r * n + col] * inv;
                a[r * n + col] = f;
                if f != 0.0 {
                    for c in (col + 1)..n {
                        a[r * n + c] -= f * a[col * n + c];
                    }
                }
            }
        }
        Ok(Self { n, a, piv })
    }

    pub fn solve(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            x[i] = b[self.piv[i]];
        }
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.a[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.a[i * n + j] * x[j];
            }
            x[i] = acc / self.a[i * n + i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn solves_small_system() {
        // [[2, 1], [1, 3]] x = [3, 5]  =>  x = [0.8, 1.4]
        let lu = Lu::factor(vec![2.0, 1.0, 1.0, 3.0], 2).unwrap();
        let mut x = [0.0; 2];
        lu.solve(&[3.0, 5.0], &mut x);
        assert_relative_eq!(x[0], 0.8, max_relative = 1e-14);
        assert_relative_eq!(x[1], 1.4, max_relative = 1e-14);
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let lu = Lu::factor(vec![0.0, 1.0, 1.0, 0.0], 2).unwrap();
        let mut x = [0.0; 2];
        lu.solve(&[2.0, 3.0], &mut x);
        assert_relative_eq!(x[0], 3.0);
        assert_relative_eq!(x[1], 2.0);
    }

    #[test]
    fn rejects_singular() {
        assert!(Lu::factor(vec![1.0, 2.0, 2.0, 4.0], 2).is_err());
    }
}
