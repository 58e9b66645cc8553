//! Unconstrained parameterizations of diagonal systems.
//!
//! [`StableParams`] maps free reals onto stable systems:
//! `a_j = sign_j exp(-exp(ν_j))` for real systems and
//! `a_j = exp(-exp(ν_j)) exp(i θ_j)` for complex ones, so `|a_j| < 1`
//! whatever values the optimizer produces. [`RawParams`] exposes the real
//! `(a, b, c)` directly, which is the setting of the parameter-growth
//! ceiling for plain gradient descent.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::Workspace;
use crate::error::{Result, SsmError};
use crate::rng::{self, SsmRng};
use crate::ssm::{DiagonalSsm, Mode};

/// Largest double below one. Realized magnitudes are capped here because
/// `exp(-exp(ν))` rounds to exactly 1 once `exp(ν)` drops below an ulp.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;
const MIN_MAGNITUDE: f64 = 1e-12;
/// Upper clamp for ring initialization.
pub const RING_MAX_MAGNITUDE: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// Real: `a ~ U[-1, 1]`. Complex: `|a| ~ U[0, 1)`, phase `~ U[0, 2π)`.
    UniformFull,
    /// `|a| ~ U[0.99, 1)` (clamped to `1 - 1e-6`); random sign for real
    /// systems, phase `~ U[0, 2π)` for complex ones.
    UniformRing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameterization {
    Stable,
    /// Real systems only.
    Raw,
}

fn magnitude_to_nu(mag: f64) -> f64 {
    (-mag.clamp(MIN_MAGNITUDE, BELOW_ONE).ln()).ln()
}

fn nu_to_magnitude(nu: f64) -> f64 {
    (-nu.exp()).exp().min(BELOW_ONE)
}

/// Initial diagonal entries (as magnitude, sign-or-phase) and couplings.
struct Draw {
    magnitude: Vec<f64>,
    /// Real: ±1. Complex: phase.
    angle: Vec<f64>,
    b: Vec<[f64; 2]>,
    c: Vec<[f64; 2]>,
}

fn draw(mode: Mode, dim: usize, init: Init, rng: &mut SsmRng) -> Draw {
    let mut magnitude = Vec::with_capacity(dim);
    let mut angle = Vec::with_capacity(dim);
    for _ in 0..dim {
        match (mode, init) {
            (Mode::Real, Init::UniformFull) => {
                let a = rng::uniform(rng, -1.0, 1.0);
                magnitude.push(a.abs().clamp(MIN_MAGNITUDE, RING_MAX_MAGNITUDE));
                angle.push(if a < 0.0 { -1.0 } else { 1.0 });
            }
            (Mode::Real, Init::UniformRing) => {
                magnitude.push(rng::uniform(rng, 0.99, 1.0).min(RING_MAX_MAGNITUDE));
                angle.push(if rng::uniform(rng, 0.0, 1.0) < 0.5 { -1.0 } else { 1.0 });
            }
            (Mode::Complex, Init::UniformFull) => {
                magnitude.push(rng::uniform(rng, 0.0, 1.0).clamp(MIN_MAGNITUDE, RING_MAX_MAGNITUDE));
                angle.push(rng::uniform(rng, 0.0, TAU));
            }
            (Mode::Complex, Init::UniformRing) => {
                magnitude.push(rng::uniform(rng, 0.99, 1.0).min(RING_MAX_MAGNITUDE));
                angle.push(rng::uniform(rng, 0.0, TAU));
            }
        }
    }
    let scale = 1.0 / (dim as f64).sqrt();
    let mut coupling = || -> Vec<[f64; 2]> {
        (0..dim)
            .map(|_| {
                let re = rng::uniform(rng, -scale, scale);
                let im = match mode {
                    Mode::Real => 0.0,
                    Mode::Complex => rng::uniform(rng, -scale, scale),
                };
                [re, im]
            })
            .collect()
    };
    let b = coupling();
    let c = coupling();
    Draw {
        magnitude,
        angle,
        b,
        c,
    }
}

/// Stable reparameterization.
///
/// Flat layout, each block of length `n`:
/// real `[ν | b | c]`, complex `[ν | θ | Re b | Im b | Re c | Im c]`.
/// The real-mode signs are fixed at initialization.
#[derive(Debug, Clone, PartialEq)]
pub struct StableParams {
    mode: Mode,
    dim: usize,
    signs: Vec<f64>,
    flat: Vec<f64>,
}

impl StableParams {
    pub fn init(mode: Mode, dim: usize, init: Init, rng: &mut SsmRng) -> Self {
        let d = draw(mode, dim, init, rng);
        let nu = d.magnitude.iter().map(|&m| magnitude_to_nu(m));
        let mut flat = Vec::with_capacity(dim * 6);
        flat.extend(nu);
        let signs = match mode {
            Mode::Real => {
                flat.extend(d.b.iter().map(|z| z[0]));
                flat.extend(d.c.iter().map(|z| z[0]));
                d.angle
            }
            Mode::Complex => {
                flat.extend(&d.angle);
                flat.extend(d.b.iter().map(|z| z[0]));
                flat.extend(d.b.iter().map(|z| z[1]));
                flat.extend(d.c.iter().map(|z| z[0]));
                flat.extend(d.c.iter().map(|z| z[1]));
                Vec::new()
            }
        };
        Self {
            mode,
            dim,
            signs,
            flat,
        }
    }

    /// Re-expresses a system whose diagonal entries satisfy `0 < |a_j| < 1`.
    pub fn from_ssm(ssm: &DiagonalSsm) -> Result<Self> {
        let n = ssm.dim();
        if let Some(z) = ssm.a().iter().find(|z| !(z.norm() > 0.0 && z.norm() < 1.0)) {
            return Err(SsmError::InvalidArgument(format!(
                "diagonal entry {z} is outside the stable parameterization's range"
            )));
        }
        let nu = ssm.a().iter().map(|z| magnitude_to_nu(z.norm()));
        let mut flat = Vec::with_capacity(6 * n);
        flat.extend(nu);
        let signs = match ssm.mode() {
            Mode::Real => {
                flat.extend(ssm.b().iter().map(|z| z.re));
                flat.extend(ssm.c().iter().map(|z| z.re));
                ssm.a().iter().map(|z| z.re.signum()).collect()
            }
            Mode::Complex => {
                flat.extend(ssm.a().iter().map(|z| z.arg()));
                flat.extend(ssm.b().iter().map(|z| z.re));
                flat.extend(ssm.b().iter().map(|z| z.im));
                flat.extend(ssm.c().iter().map(|z| z.re));
                flat.extend(ssm.c().iter().map(|z| z.im));
                Vec::new()
            }
        };
        Ok(Self {
            mode: ssm.mode(),
            dim: n,
            signs,
            flat,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn flat(&self) -> &[f64] {
        &self.flat
    }

    pub fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.flat
    }

    fn block(&self, i: usize) -> &[f64] {
        &self.flat[i * self.dim..(i + 1) * self.dim]
    }

    pub fn realize(&self) -> DiagonalSsm {
        let built = match self.mode {
            Mode::Real => {
                let a: Vec<f64> = self
                    .block(0)
                    .iter()
                    .zip(&self.signs)
                    .map(|(&nu, s)| s * nu_to_magnitude(nu))
                    .collect();
                DiagonalSsm::real(&a, self.block(1), self.block(2))
            }
            Mode::Complex => {
                let a = self
                    .block(0)
                    .iter()
                    .zip(self.block(1))
                    .map(|(&nu, &th)| Complex64::from_polar(nu_to_magnitude(nu), th))
                    .collect();
                let pair = |re: &[f64], im: &[f64]| {
                    re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect()
                };
                DiagonalSsm::complex(a, pair(self.block(2), self.block(3)), pair(self.block(4), self.block(5)))
            }
        };
        built.expect("stable parameters always realize a well-formed system")
    }
}

/// Real `(a, b, c)` trained directly. Flat layout `[a | b | c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawParams {
    dim: usize,
    flat: Vec<f64>,
}

impl RawParams {
    pub fn init(dim: usize, init: Init, rng: &mut SsmRng) -> Self {
        let d = draw(Mode::Real, dim, init, rng);
        let mut flat = Vec::with_capacity(3 * dim);
        flat.extend(d.magnitude.iter().zip(&d.angle).map(|(m, s)| m * s));
        flat.extend(d.b.iter().map(|z| z[0]));
        flat.extend(d.c.iter().map(|z| z[0]));
        Self { dim, flat }
    }

    pub fn from_ssm(ssm: &DiagonalSsm) -> Result<Self> {
        if ssm.mode() != Mode::Real {
            return Err(SsmError::InvalidArgument(
                "raw parameterization is only defined for real systems".into(),
            ));
        }
        let mut flat = ssm.a_re();
        flat.extend(ssm.b().iter().map(|z| z.re));
        flat.extend(ssm.c().iter().map(|z| z.re));
        Ok(Self {
            dim: ssm.dim(),
            flat,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn flat(&self) -> &[f64] {
        &self.flat
    }

    pub fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.flat
    }

    pub fn realize(&self) -> Result<DiagonalSsm> {
        let n = self.dim;
        DiagonalSsm::real(&self.flat[..n], &self.flat[n..2 * n], &self.flat[2 * n..])
    }
}

/// A trainable parameter vector of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamSet {
    Stable(StableParams),
    Raw(RawParams),
}

impl ParamSet {
    pub fn flat(&self) -> &[f64] {
        match self {
            ParamSet::Stable(p) => p.flat(),
            ParamSet::Raw(p) => p.flat(),
        }
    }

    pub fn flat_mut(&mut self) -> &mut [f64] {
        match self {
            ParamSet::Stable(p) => p.flat_mut(),
            ParamSet::Raw(p) => p.flat_mut(),
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            ParamSet::Stable(p) => p.mode(),
            ParamSet::Raw(_) => Mode::Real,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ParamSet::Stable(p) => p.dim(),
            ParamSet::Raw(p) => p.dim(),
        }
    }

    pub fn realize(&self) -> Result<DiagonalSsm> {
        match self {
            ParamSet::Stable(p) => Ok(p.realize()),
            ParamSet::Raw(p) => p.realize(),
        }
    }
}

/// Buffers for repeated loss/gradient evaluation of one parameter shape.
#[derive(Debug, Clone)]
pub enum Evaluator {
    Real {
        ws: Workspace<f64>,
        a: Vec<f64>,
        w: Vec<f64>,
        exp_nu: Vec<f64>,
    },
    Complex {
        ws: Workspace<Complex64>,
        a: Vec<Complex64>,
        w: Vec<Complex64>,
    },
}

impl Evaluator {
    pub fn new(mode: Mode, dim: usize, horizon: usize) -> Self {
        match mode {
            Mode::Real => Evaluator::Real {
                ws: Workspace::new(dim, horizon),
                a: vec![0.0; dim],
                w: vec![0.0; dim],
                exp_nu: vec![0.0; dim],
            },
            Mode::Complex => Evaluator::Complex {
                ws: Workspace::new(dim, horizon),
                a: vec![Complex64::new(0.0, 0.0); dim],
                w: vec![Complex64::new(0.0, 0.0); dim],
            },
        }
    }

    /// Impulse response from the most recent evaluation.
    pub fn impulse_response(&self) -> &[f64] {
        match self {
            Evaluator::Real { ws, .. } => &ws.ir,
            Evaluator::Complex { ws, .. } => &ws.ir,
        }
    }

    /// Loss at `params`; writes the gradient into `grad` when given.
    pub fn evaluate(&mut self, params: &ParamSet, target: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let with_grad = grad.is_some();
        match (self, params) {
            (Evaluator::Real { ws, a, w, exp_nu }, ParamSet::Stable(p)) => {
                let n = p.dim;
                let (nu, b, c) = (p.block(0), p.block(1), p.block(2));
                for j in 0..n {
                    let e = nu[j].exp();
                    a[j] = p.signs[j] * (-e).exp().min(BELOW_ONE);
                    w[j] = b[j] * c[j];
                    exp_nu[j] = e;
                }
                let loss = ws.evaluate(a, w, target, with_grad);
                if let Some(grad) = grad {
                    for j in 0..n {
                        // da/dν = -exp(ν) a
                        grad[j] = -exp_nu[j] * a[j] * ws.h[j];
                        grad[n + j] = c[j] * ws.g[j];
                        grad[2 * n + j] = b[j] * ws.g[j];
                    }
                }
                loss
            }
            (Evaluator::Real { ws, a, w, .. }, ParamSet::Raw(p)) => {
                let n = p.dim;
                let (ra, b, c) = (&p.flat[..n], &p.flat[n..2 * n], &p.flat[2 * n..]);
                a.copy_from_slice(ra);
                for j in 0..n {
                    w[j] = b[j] * c[j];
                }
                let loss = ws.evaluate(a, w, target, with_grad);
                if let Some(grad) = grad {
                    grad[..n].copy_from_slice(&ws.h);
                    for j in 0..n {
                        grad[n + j] = c[j] * ws.g[j];
                        grad[2 * n + j] = b[j] * ws.g[j];
                    }
                }
                loss
            }
            (Evaluator::Complex { ws, a, w }, ParamSet::Stable(p)) => {
                let n = p.dim;
                let (nu, th) = (p.block(0), p.block(1));
                let (br, bi, cr, ci) = (p.block(2), p.block(3), p.block(4), p.block(5));
                for j in 0..n {
                    a[j] = Complex64::from_polar(nu_to_magnitude(nu[j]), th[j]);
                    w[j] = Complex64::new(br[j], bi[j]) * Complex64::new(cr[j], ci[j]);
                }
                let loss = ws.evaluate(a, w, target, with_grad);
                if let Some(grad) = grad {
                    for j in 0..n {
                        // d a = a dλ with λ = -exp(ν) + iθ
                        let ha = ws.h[j] * a[j];
                        grad[j] = -nu[j].exp() * ha.re;
                        grad[n + j] = -ha.im;
                        let gb = (ws.g[j] * Complex64::new(cr[j], ci[j])).conj();
                        let gc = (ws.g[j] * Complex64::new(br[j], bi[j])).conj();
                        grad[2 * n + j] = gb.re;
                        grad[3 * n + j] = gb.im;
                        grad[4 * n + j] = gc.re;
                        grad[5 * n + j] = gc.im;
                    }
                }
                loss
            }
            (Evaluator::Complex { .. }, ParamSet::Raw(_)) => {
                unreachable!("raw parameterization is real-only")
            }
        }
    }
}
