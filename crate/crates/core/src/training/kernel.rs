//! Loss and gradient of `‖IR - target‖₂²` with respect to the realized
//! diagonal `a` and the per-mode couplings `w = b c`.
//!
//! With `r_k = IR_k - target_k` and 0-indexed `k`:
//!
//! ```text
//! G_j = Σ_k 2 r_k a_j^k              (∂ℓ/∂w_j)
//! H_j = w_j Σ_k 2 r_k k a_j^{k-1}    (∂ℓ/∂a_j)
//! ```
//!
//! For complex parameters these are holomorphic derivatives of the complex
//! expression whose real part is taken; the gradient with respect to
//! `(Re p, Im p)` is `conj(∂ℓ/∂p)`.
//!
//! The kernel is generic over real and complex scalars so both modes run
//! the same code; the real instantiation avoids paying for complex
//! arithmetic on 1024-mode systems.

use std::ops::{Add, AddAssign, Mul};

use num_complex::Complex64;

pub trait Scalar:
    Copy + Add<Output = Self> + AddAssign + Mul<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    const ZERO: Self;
    const ONE: Self;
    fn re(self) -> f64;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    #[inline]
    fn re(self) -> f64 {
        self
    }
}

impl Scalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    const ONE: Self = Complex64::new(1.0, 0.0);
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
}

/// Reusable buffers for one system size.
#[derive(Debug, Clone)]
pub struct Workspace<S> {
    n: usize,
    t: usize,
    /// `a^{k-1}` and `a^k` for the row being processed.
    prev: Vec<S>,
    cur: Vec<S>,
    pub ir: Vec<f64>,
    pub residual: Vec<f64>,
    pub g: Vec<S>,
    pub h: Vec<S>,
}

impl<S: Scalar> Workspace<S> {
    pub fn new(n: usize, t: usize) -> Self {
        Self {
            n,
            t,
            prev: vec![S::ZERO; n],
            cur: vec![S::ZERO; n],
            ir: vec![0.0; t],
            residual: vec![0.0; t],
            g: vec![S::ZERO; n],
            h: vec![S::ZERO; n],
        }
    }

    /// Fills `ir`, `residual`, `g`, `h` for the given system and returns the
    /// loss. `with_grad = false` skips the gradient accumulation.
    ///
    /// Row `k` of the power table only depends on row `k - 1`, and its
    /// residual is known as soon as the row is formed, so everything is
    /// accumulated in a single sweep over two rolling rows.
    pub fn evaluate(&mut self, a: &[S], w: &[S], target: &[f64], with_grad: bool) -> f64 {
        let (n, t) = (self.n, self.t);
        debug_assert_eq!(a.len(), n);
        debug_assert_eq!(w.len(), n);
        debug_assert_eq!(target.len(), t);

        if with_grad {
            self.g.fill(S::ZERO);
            self.h.fill(S::ZERO);
        }
        self.cur.fill(S::ONE);
        let mut loss = 0.0;
        for k in 0..t {
            if k > 0 {
                std::mem::swap(&mut self.prev, &mut self.cur);
                for ((c, p), aj) in self.cur.iter_mut().zip(&self.prev).zip(a) {
                    *c = *p * *aj;
                }
            }
            let y = dot_re(&self.cur, w);
            self.ir[k] = y;
            let r = y - target[k];
            self.residual[k] = r;
            loss += r * r;

            let r2 = 2.0 * r;
            if !with_grad || r2 == 0.0 {
                continue;
            }
            if k == 0 {
                for (g, c) in self.g.iter_mut().zip(&self.cur) {
                    *g += *c * r2;
                }
            } else {
                let coef = r2 * k as f64;
                for ((g, h), (c, p)) in self.g.iter_mut().zip(self.h.iter_mut()).zip(self.cur.iter().zip(&self.prev)) {
                    *g += *c * r2;
                    *h += *p * coef;
                }
            }
        }
        if with_grad {
            for (h, wj) in self.h.iter_mut().zip(w) {
                *h = *h * *wj;
            }
        }
        loss
    }
}

/// `Re(Σ_j x_j y_j)` with eight independent accumulators; fixed order, so
/// results do not depend on the platform.
fn dot_re<S: Scalar>(x: &[S], y: &[S]) -> f64 {
    let mut acc = [0.0_f64; 8];
    let xs = x.chunks_exact(8);
    let ys = y.chunks_exact(8);
    let (xr, yr) = (xs.remainder(), ys.remainder());
    for (cx, cy) in xs.zip(ys) {
        for ((a, u), v) in acc.iter_mut().zip(cx).zip(cy) {
            *a += (*u * *v).re();
        }
    }
    let mut total = ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
    for (u, v) in xr.iter().zip(yr) {
        total += (*u * *v).re();
    }
    total
}
