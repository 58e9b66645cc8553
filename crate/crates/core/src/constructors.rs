//! Exact parameter assignments that reproduce a prescribed impulse response.
//!
//! Two routes are provided. The real route places `t` distinct real poles and
//! solves a Vandermonde system for `b` with `c = 1`; it is exact in exact
//! arithmetic but its coefficients blow up with `t`. The complex route puts
//! the poles on a shrunken circle at the `t`-th roots of unity and reads `b`
//! off a discrete Fourier transform, which keeps `‖b‖₂ ≤ 2‖target‖₂` and
//! `‖c‖₂ = 1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SsmError};
use crate::linalg::DenseMatrix;
use crate::series::{approximation_error, ScalarSeries};
use crate::ssm::DiagonalSsm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionResult {
    pub ssm: DiagonalSsm,
    /// `‖b‖₂`
    pub b_norm2: f64,
    /// `‖c‖₂`
    pub c_norm2: f64,
    /// ℓ1 distance between the realized impulse response and the target.
    pub residual_l1: f64,
}

impl ConstructionResult {
    fn certify(ssm: DiagonalSsm, target: &ScalarSeries) -> Result<Self> {
        let ir = ssm.impulse_response(target.len())?;
        Ok(Self {
            b_norm2: ssm.b_norm2(),
            c_norm2: ssm.c_norm2(),
            residual_l1: approximation_error(&ir, target)?,
            ssm,
        })
    }
}

/// `n` equispaced points on `[-0.95, 0.95]` (the single point `0` for `n = 1`).
pub fn default_nodes(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|j| -0.95 + 1.9 * j as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Real system with `a = nodes`, `c = 1` and `b` solving `V(a) b = target`.
///
/// Uses [`default_nodes`] when `nodes` is `None`. The residual is measured on
/// the realized system, so ill-conditioning shows up there instead of being
/// hidden.
pub fn construct_real_vandermonde(
    target: &ScalarSeries,
    nodes: Option<&[f64]>,
) -> Result<ConstructionResult> {
    let t = target.len();
    if t == 0 {
        return Err(SsmError::InvalidArgument("target is empty".into()));
    }
    let nodes = match nodes {
        Some(n) => n.to_vec(),
        None => default_nodes(t),
    };
    if nodes.len() != t {
        return Err(SsmError::DimensionMismatch {
            what: "nodes",
            got: nodes.len(),
            expected: t,
        });
    }
    if let Some(bad) = nodes.iter().find(|x| !(x.abs() < 1.0)) {
        return Err(SsmError::InvalidArgument(format!(
            "Vandermonde node {bad} is not inside (-1, 1)"
        )));
    }
    for i in 0..t {
        for j in i + 1..t {
            if nodes[i] == nodes[j] {
                return Err(SsmError::DuplicateNode {
                    value: nodes[i],
                    first: i,
                    second: j,
                });
            }
        }
    }

    let b = DenseMatrix::vandermonde(&nodes).solve(target.values())?;
    if b.iter().any(|v| !v.is_finite()) {
        return Err(SsmError::NonFiniteParameter { name: "b" });
    }
    let ssm = DiagonalSsm::real(&nodes, &b, &vec![1.0; t])?;
    ConstructionResult::certify(ssm, target)
}

/// Pole radius used by the DFT construction: `(1/2)^{1/(t-1)}`, and `1/2`
/// for `t = 1` where only the zeroth power matters.
pub fn dft_radius(t: usize) -> f64 {
    if t <= 1 {
        0.5
    } else {
        0.5_f64.powf(1.0 / (t - 1) as f64)
    }
}

/// Complex system of dimension `t` matching `target` exactly.
///
/// `a_j = α e^{2πi (j-1)/t}`, `c_j = 1/√t` and `b_j = X_j/√t`, where `X` is
/// the forward DFT (kernel `e^{-2πi jk/t}`) of the target with entry `k`
/// divided by `α^{k-1}`. Equivalently `b` is the conjugate of the DFT taken
/// with the positive kernel. The DFT is summed directly in a fixed order.
pub fn construct_complex_dft(target: &ScalarSeries) -> Result<ConstructionResult> {
    let t = target.len();
    if t == 0 {
        return Err(SsmError::InvalidArgument("target is empty".into()));
    }
    let alpha = dft_radius(t);
    let mut descaled = Vec::with_capacity(t);
    let mut scale = 1.0;
    for &v in target.values() {
        descaled.push(v / scale);
        scale *= alpha;
    }

    let sqrt_t = (t as f64).sqrt();
    let roots: Vec<Complex64> = (0..t)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / t as f64))
        .collect();
    let a: Vec<Complex64> = roots.iter().map(|w| w * alpha).collect();
    let c = vec![Complex64::new(1.0 / sqrt_t, 0.0); t];
    let b: Vec<Complex64> = (0..t)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &x) in descaled.iter().enumerate() {
                // e^{-2πi jk/t} = conj(root[(j k) mod t])
                acc += roots[(j * k) % t].conj() * x;
            }
            acc / sqrt_t
        })
        .collect();

    let ssm = DiagonalSsm::complex(a, b, c)?;
    ConstructionResult::certify(ssm, target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vandermonde_zero_target() {
        let r = construct_real_vandermonde(&ScalarSeries::zeros(5), None).unwrap();
        assert!(r.ssm.b().iter().all(|z| z.re == 0.0));
        assert_eq!(r.residual_l1, 0.0);
    }

    #[test]
    fn vandermonde_rejects_duplicates() {
        let target = ScalarSeries::zeros(3);
        assert!(matches!(
            construct_real_vandermonde(&target, Some(&[0.1, 0.5, 0.1])),
            Err(SsmError::DuplicateNode { first: 0, second: 2, .. })
        ));
    }

    #[test]
    fn vandermonde_rejects_node_outside_disk() {
        let target = ScalarSeries::zeros(2);
        assert!(construct_real_vandermonde(&target, Some(&[0.1, 1.0])).is_err());
        assert!(construct_real_vandermonde(&target, Some(&[0.1])).is_err());
    }

    #[test]
    fn default_nodes_are_equispaced() {
        let n = default_nodes(5);
        assert_eq!(n[0], -0.95);
        assert_eq!(n[4], 0.95);
        assert!((n[2]).abs() < 1e-15);
    }

    #[test]
    fn dft_impulse_target() {
        let target = ScalarSeries::impulse(4);
        let r = construct_complex_dft(&target).unwrap();
        assert!(r.residual_l1 <= 1e-10);
        assert!((r.c_norm2 - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn dft_zero_target() {
        let r = construct_complex_dft(&ScalarSeries::zeros(8)).unwrap();
        assert!(r.ssm.b().iter().all(|z| z.norm() == 0.0));
        assert_eq!(r.residual_l1, 0.0);
    }

    #[test]
    fn dft_single_entry() {
        let target = ScalarSeries::new(vec![-2.5]).unwrap();
        let r = construct_complex_dft(&target).unwrap();
        assert!(r.residual_l1 < 1e-15);
        assert_eq!(r.ssm.a()[0].re, 0.5);
    }

    #[test]
    fn dft_radius_is_half_at_last_power() {
        for t in [2, 5, 64] {
            assert!((dft_radius(t).powi(t as i32 - 1) - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn empty_targets_rejected() {
        assert!(construct_complex_dft(&ScalarSeries::zeros(0)).is_err());
        assert!(construct_real_vandermonde(&ScalarSeries::zeros(0), None).is_err());
    }
}
