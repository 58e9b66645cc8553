//! Diagonal state space models over the real or complex field.
//!
//! A system of dimension `n` is the triple `(a, b, c)` with `a` the diagonal
//! of the state transition matrix. It maps a real input series `u` to
//!
//! ```text
//! x(t) = a ⊙ x(t-1) + b u(t),   y(t) = Re(c · x(t)),   x(0) = 0
//! ```
//!
//! and has impulse response `Re(Σ_j c_j a_j^{k-1} b_j)` for `k = 1, 2, ...`.
//! Real systems use the same complex storage with zero imaginary parts.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SsmError};
use crate::series::ScalarSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Real,
    Complex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSsm {
    mode: Mode,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    c: Vec<Complex64>,
}

impl DiagonalSsm {
    /// Builds a system, checking that `a`, `b`, `c` share one length `n >= 1`,
    /// that every entry is finite, and that real systems are purely real.
    pub fn new(mode: Mode, a: Vec<Complex64>, b: Vec<Complex64>, c: Vec<Complex64>) -> Result<Self> {
        let n = a.len();
        if n == 0 {
            return Err(SsmError::InvalidArgument("state dimension must be positive".into()));
        }
        for (name, v) in [("b", &b), ("c", &c)] {
            if v.len() != n {
                return Err(SsmError::DimensionMismatch {
                    what: name,
                    got: v.len(),
                    expected: n,
                });
            }
        }
        for (name, v) in [("a", &a), ("b", &b), ("c", &c)] {
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(SsmError::NonFiniteParameter { name });
            }
            if mode == Mode::Real && v.iter().any(|z| z.im != 0.0) {
                return Err(SsmError::ImaginaryInRealMode { name });
            }
        }
        Ok(Self { mode, a, b, c })
    }

    pub fn real(a: &[f64], b: &[f64], c: &[f64]) -> Result<Self> {
        let lift = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(Mode::Real, lift(a), lift(b), lift(c))
    }

    pub fn complex(a: Vec<Complex64>, b: Vec<Complex64>, c: Vec<Complex64>) -> Result<Self> {
        Self::new(Mode::Complex, a, b, c)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[Complex64] {
        &self.a
    }

    pub fn b(&self) -> &[Complex64] {
        &self.b
    }

    pub fn c(&self) -> &[Complex64] {
        &self.c
    }

    /// Real parts of `a`; only meaningful for real systems.
    pub fn a_re(&self) -> Vec<f64> {
        self.a.iter().map(|z| z.re).collect()
    }

    pub fn is_stable(&self) -> bool {
        self.spectral_radius() < 1.0
    }

    pub fn spectral_radius(&self) -> f64 {
        self.a.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `‖c ⊙ b‖∞`, the quantity all the real-system lower bounds are about.
    pub fn coupling_inf_norm(&self) -> f64 {
        self.b
            .iter()
            .zip(&self.c)
            .fold(0.0, |m, (b, c)| m.max((b * c).norm()))
    }

    pub fn b_norm2(&self) -> f64 {
        self.b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn c_norm2(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn b_inf_norm(&self) -> f64 {
        self.b.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn c_inf_norm(&self) -> f64 {
        self.c.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// The first `t` entries of the impulse response.
    ///
    /// Powers of `a` are accumulated multiplicatively, so the cost is
    /// `O(n t)`.
    pub fn impulse_response(&self, t: usize) -> Result<ScalarSeries> {
        if t == 0 {
            return Err(SsmError::InvalidArgument(
                "impulse response length must be at least 1".into(),
            ));
        }
        let mut out = vec![0.0; t];
        for ((a, b), c) in self.a.iter().zip(&self.b).zip(&self.c) {
            let mut p = c * b;
            for slot in out.iter_mut() {
                *slot += p.re;
                p *= a;
            }
        }
        ScalarSeries::new(out).map_err(|_| SsmError::NonFiniteParameter { name: "impulse response" })
    }

    /// Runs the recursion on `input`, returning the output series and the
    /// state trajectory `x(0), x(1), ..., x(len)`.
    pub fn apply(&self, input: &ScalarSeries) -> Result<(ScalarSeries, StateTrace)> {
        if input.is_empty() {
            return Err(SsmError::InvalidArgument("input series is empty".into()));
        }
        let n = self.dim();
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        let mut states = Vec::with_capacity(input.len() + 1);
        states.push(x.clone());
        let mut out = Vec::with_capacity(input.len());
        for &u in input.values() {
            let mut y = 0.0;
            for j in 0..n {
                x[j] = self.a[j] * x[j] + self.b[j] * u;
                y += (self.c[j] * x[j]).re;
            }
            out.push(y);
            states.push(x.clone());
        }
        let output = ScalarSeries::new(out)
            .map_err(|_| SsmError::NonFiniteParameter { name: "output" })?;
        Ok((
            output,
            StateTrace {
                states,
                mode: self.mode,
            },
        ))
    }

    /// Multiplies every entry of `a`, `b`, `c` by the corresponding real
    /// factor. Used by the quantization model.
    pub fn scaled(&self, qa: &[f64], qb: &[f64], qc: &[f64]) -> Self {
        let mul = |v: &[Complex64], q: &[f64]| v.iter().zip(q).map(|(z, s)| z * s).collect();
        Self {
            mode: self.mode,
            a: mul(&self.a, qa),
            b: mul(&self.b, qb),
            c: mul(&self.c, qc),
        }
    }
}

/// States `x(0), x(1), ...` visited by [`DiagonalSsm::apply`]; `states[0]`
/// is always the zero vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTrace {
    pub states: Vec<Vec<Complex64>>,
    pub mode: Mode,
}

/// Bilinear (Tustin) discretization of a continuous diagonal system:
/// `ā = (1 + Δ/2·a)/(1 - Δ/2·a)`, `b̄ = Δ·b/(1 - Δ/2·a)`, `c̄ = c`.
///
/// Every continuous pole must have negative real part, which maps it inside
/// the unit disk. The result is real when all inputs are real.
pub fn bilinear_discretize(
    a_cont: &[Complex64],
    b_cont: &[Complex64],
    c_cont: &[Complex64],
    delta: f64,
) -> Result<DiagonalSsm> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(SsmError::InvalidArgument(format!(
            "discretization step must be positive, got {delta}"
        )));
    }
    if let Some(z) = a_cont.iter().find(|z| !(z.re < 0.0)) {
        return Err(SsmError::InvalidArgument(format!(
            "continuous pole {z} does not have negative real part"
        )));
    }
    if b_cont.len() != a_cont.len() {
        return Err(SsmError::DimensionMismatch {
            what: "b",
            got: b_cont.len(),
            expected: a_cont.len(),
        });
    }
    let half = delta / 2.0;
    let mut a = Vec::with_capacity(a_cont.len());
    let mut b = Vec::with_capacity(a_cont.len());
    for (ac, bc) in a_cont.iter().zip(b_cont) {
        let denom = 1.0 - half * ac;
        a.push((1.0 + half * ac) / denom);
        b.push(delta * bc / denom);
    }
    let is_real = a_cont
        .iter()
        .chain(b_cont)
        .chain(c_cont)
        .all(|z| z.im == 0.0);
    let mode = if is_real { Mode::Real } else { Mode::Complex };
    DiagonalSsm::new(mode, a, b, c_cont.to_vec())
}
