#![allow(dead_code)]

use ssm_core::rng::{self, SsmRng};
use ssm_core::training::{loss_and_gradient, ParamSet};
use ssm_core::{Complex64, DiagonalSsm, ScalarSeries};

pub fn random_series(r: &mut SsmRng, len: usize) -> ScalarSeries {
    ScalarSeries::new((0..len).map(|_| rng::uniform(r, -1.0, 1.0)).collect()).unwrap()
}

/// Real system with `|a| < 1` and couplings in `[-1, 1]`.
pub fn random_real_stable(r: &mut SsmRng, n: usize) -> DiagonalSsm {
    let a: Vec<f64> = (0..n).map(|_| rng::uniform(r, -0.999, 0.999)).collect();
    let b: Vec<f64> = (0..n).map(|_| rng::uniform(r, -1.0, 1.0)).collect();
    let c: Vec<f64> = (0..n).map(|_| rng::uniform(r, -1.0, 1.0)).collect();
    DiagonalSsm::real(&a, &b, &c).unwrap()
}

pub fn random_complex_stable(r: &mut SsmRng, n: usize) -> DiagonalSsm {
    let mut z = |scale: f64| -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::from_polar(scale * rng::uniform(r, 0.0, 1.0), rng::uniform(r, 0.0, std::f64::consts::TAU)))
            .collect()
    };
    let a = z(0.999);
    let b = z(1.0);
    let c = z(1.0);
    DiagonalSsm::complex(a, b, c).unwrap()
}

/// `Re(Σ_j c_j a_j^k b_j)` by explicit exponentiation.
pub fn ir_by_powers(ssm: &DiagonalSsm, t: usize) -> Vec<f64> {
    (0..t)
        .map(|k| {
            ssm.a()
                .iter()
                .zip(ssm.b())
                .zip(ssm.c())
                .map(|((a, b), c)| (c * a.powu(k as u32) * b).re)
                .sum()
        })
        .collect()
}

pub fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Largest componentwise relative error between the analytic gradient and
/// central differences with step `h`. Components far below the gradient's
/// scale are compared against `1e-3 · ‖g‖∞` instead of their own size.
pub fn fd_relative_error(params: &ParamSet, target: &ScalarSeries, h: f64) -> f64 {
    let (_, g) = loss_and_gradient(params, target).unwrap();
    let scale = g.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let mut worst: f64 = 0.0;
    for i in 0..g.len() {
        let mut plus = params.clone();
        plus.flat_mut()[i] += h;
        let mut minus = params.clone();
        minus.flat_mut()[i] -= h;
        let lp = loss_and_gradient(&plus, target).unwrap().0;
        let lm = loss_and_gradient(&minus, target).unwrap().0;
        let fd = (lp - lm) / (2.0 * h);
        let denom = g[i].abs().max(fd.abs()).max(1e-3 * scale);
        if denom > 0.0 {
            worst = worst.max((g[i] - fd).abs() / denom);
        }
    }
    worst
}

