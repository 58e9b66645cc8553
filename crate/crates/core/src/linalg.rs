//! Small dense linear algebra.

use crate::error::{Result, SsmError};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// `V[i][j] = nodes[j]^i`, the Vandermonde matrix mapping coefficients on
    /// the nodes to the first `n` powers.
    pub fn vandermonde(nodes: &[f64]) -> Self {
        let n = nodes.len();
        let mut m = Self {
            n,
            data: vec![0.0; n * n],
        };
        for (j, &x) in nodes.iter().enumerate() {
            let mut p = 1.0;
            for i in 0..n {
                m.data[i * n + j] = p;
                p *= x;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Solves `self · x = rhs` by Gaussian elimination with partial pivoting.
    ///
    /// A pivot that is zero, non-finite, or below `1e-15 · max|entry|` is
    /// reported as [`SsmError::SingularSystem`].
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if rhs.len() != n {
            return Err(SsmError::DimensionMismatch {
                what: "rhs",
                got: rhs.len(),
                expected: n,
            });
        }
        let scale = self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let tiny = 1e-15 * scale;
        let mut a = self.data.clone();
        let mut x = rhs.to_vec();

        for col in 0..n {
            let (piv_row, piv_abs) = (col..n)
                .map(|r| (r, a[r * n + col].abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !piv_abs.is_finite() || piv_abs <= tiny || piv_abs == 0.0 {
                return Err(SsmError::SingularSystem {
                    column: col,
                    pivot: piv_abs,
                });
            }
            if piv_row != col {
                for k in 0..n {
                    a.swap(col * n + k, piv_row * n + k);
                }
                x.swap(col, piv_row);
            }
            let pivot = a[col * n + col];
            for r in col + 1..n {
                let factor = a[r * n + col] / pivot;
                if factor == 0.0 {
                    continue;
                }
                a[r * n + col] = 0.0;
                for k in col + 1..n {
                    a[r * n + k] -= factor * a[col * n + k];
                }
                x[r] -= factor * x[col];
            }
        }

        for col in (0..n).rev() {
            let mut acc = x[col];
            for k in col + 1..n {
                acc -= a[col * n + k] * x[k];
            }
            x[col] = acc / a[col * n + col];
        }
        Ok(x)
    }
}
