//! Monte-Carlo robustness of an ε-approximation to multiplicative parameter
//! noise.
//!
//! Every entry of `a`, `b` and `c` is multiplied by an independent draw from
//! `U[1 - q/2, 1 + q/2]`; robustness is the probability that the perturbed
//! system still ε-approximates the target. For real systems this is compared
//! against the ceiling `min(1, 2ε / (q ‖c ⊙ b‖∞))`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SsmError};
use crate::rng;
use crate::series::{approximation_error, ScalarSeries};
use crate::ssm::{DiagonalSsm, Mode};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959964;
/// Samples per generator substream.
pub const CHUNK: usize = 4096;
pub const DEFAULT_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizationSpec {
    pub q: f64,
    pub epsilon: f64,
    pub target: ScalarSeries,
    pub samples: usize,
    pub seed: u64,
}

impl QuantizationSpec {
    pub fn new(q: f64, epsilon: f64, target: ScalarSeries, samples: usize, seed: u64) -> Result<Self> {
        let spec = Self {
            q,
            epsilon,
            target,
            samples,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.q) {
            return Err(SsmError::InvalidArgument(format!("q must lie in [0, 1], got {}", self.q)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(SsmError::InvalidArgument(format!(
                "epsilon must be nonnegative, got {}",
                self.epsilon
            )));
        }
        if self.samples == 0 {
            return Err(SsmError::InvalidArgument("samples must be at least 1".into()));
        }
        if self.target.is_empty() {
            return Err(SsmError::InvalidArgument("target is empty".into()));
        }
        Ok(())
    }
}

/// Fraction of perturbed systems that stay within ε, with its 95% Wilson
/// interval half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustnessEstimate {
    pub empirical_robustness: f64,
    pub wilson_halfwidth: f64,
    pub samples: usize,
    pub successes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizationReport {
    pub q: f64,
    pub epsilon: f64,
    pub empirical_robustness: f64,
    pub wilson_halfwidth: f64,
    pub theoretical_ceiling: f64,
    pub samples: usize,
    pub successes: usize,
}

impl QuantizationReport {
    /// `empirical ≤ ceiling + k · halfwidth`
    pub fn within_ceiling(&self, k: f64) -> bool {
        self.empirical_robustness <= self.theoretical_ceiling + k * self.wilson_halfwidth
    }
}

/// Half-width of the 95% Wilson score interval for `successes / samples`.
pub fn wilson_halfwidth(successes: usize, samples: usize) -> f64 {
    let n = samples as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    Z95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

/// `min(1, 2ε / (q ‖c ⊙ b‖∞))`, taken as 1 when the denominator vanishes.
pub fn theoretical_ceiling(ssm: &DiagonalSsm, q: f64, epsilon: f64) -> f64 {
    let denom = q * ssm.coupling_inf_norm();
    if denom == 0.0 {
        1.0
    } else {
        (2.0 * epsilon / denom).min(1.0)
    }
}

fn check_approximates(ssm: &DiagonalSsm, spec: &QuantizationSpec) -> Result<()> {
    spec.validate()?;
    let ir = ssm.impulse_response(spec.target.len())?;
    let error = approximation_error(&ir, &spec.target)?;
    if error > spec.epsilon {
        return Err(SsmError::NotApproximating {
            epsilon: spec.epsilon,
            error,
        });
    }
    Ok(())
}

fn count_chunk(ssm: &DiagonalSsm, spec: &QuantizationSpec, chunk: usize) -> usize {
    let n = ssm.dim();
    let t = spec.target.len();
    let lo = 1.0 - spec.q / 2.0;
    let hi = 1.0 + spec.q / 2.0;
    let start = chunk * CHUNK;
    let count = CHUNK.min(spec.samples - start);
    let mut r = rng::substream(spec.seed, chunk as u64);
    let mut qa = vec![0.0; n];
    let mut qb = vec![0.0; n];
    let mut qc = vec![0.0; n];
    let mut ok = 0;
    for _ in 0..count {
        for buf in [&mut qa, &mut qb, &mut qc] {
            for x in buf.iter_mut() {
                *x = rng::uniform(&mut r, lo, hi);
            }
        }
        let err = match ssm.mode() {
            Mode::Real => real_error(ssm, &qa, &qb, &qc, spec.target.values()),
            Mode::Complex => {
                let ir = ssm
                    .scaled(&qa, &qb, &qc)
                    .impulse_response(t)
                    .expect("horizon is positive");
                approximation_error(&ir, &spec.target).expect("lengths agree")
            }
        };
        if err <= spec.epsilon {
            ok += 1;
        }
    }
    ok
}

/// ℓ1 error of the perturbed real system, without allocating a new one.
fn real_error(ssm: &DiagonalSsm, qa: &[f64], qb: &[f64], qc: &[f64], target: &[f64]) -> f64 {
    let n = ssm.dim();
    let mut pow = vec![0.0; n];
    let mut w = vec![0.0; n];
    for j in 0..n {
        pow[j] = 1.0;
        w[j] = ssm.b()[j].re * qb[j] * ssm.c()[j].re * qc[j];
    }
    let mut err = 0.0;
    for &x in target {
        let mut y = 0.0;
        for j in 0..n {
            y += w[j] * pow[j];
            pow[j] *= ssm.a()[j].re * qa[j];
        }
        err += (y - x).abs();
    }
    err
}

fn count_successes(ssm: &DiagonalSsm, spec: &QuantizationSpec) -> usize {
    let chunks = spec.samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| count_chunk(ssm, spec, c))
        .sum()
}

fn estimate(ssm: &DiagonalSsm, spec: &QuantizationSpec) -> RobustnessEstimate {
    let successes = count_successes(ssm, spec);
    RobustnessEstimate {
        empirical_robustness: successes as f64 / spec.samples as f64,
        wilson_halfwidth: wilson_halfwidth(successes, spec.samples),
        samples: spec.samples,
        successes,
    }
}

/// Robustness of a real system, with the analytic ceiling.
///
/// Fails with [`SsmError::NotApproximating`] if the unperturbed system is
/// not within ε of the target, and rejects complex systems.
pub fn estimate_robustness(ssm: &DiagonalSsm, spec: &QuantizationSpec) -> Result<QuantizationReport> {
    if ssm.mode() != Mode::Real {
        return Err(SsmError::InvalidArgument(
            "the robustness ceiling is only defined for real systems; use estimate_robustness_diagnostic".into(),
        ));
    }
    check_approximates(ssm, spec)?;
    let e = estimate(ssm, spec);
    Ok(QuantizationReport {
        q: spec.q,
        epsilon: spec.epsilon,
        empirical_robustness: e.empirical_robustness,
        wilson_halfwidth: e.wilson_halfwidth,
        theoretical_ceiling: theoretical_ceiling(ssm, spec.q, spec.epsilon),
        samples: e.samples,
        successes: e.successes,
    })
}

/// Robustness estimate for either mode, without a ceiling comparison.
/// Complex entries are scaled by one real factor each.
pub fn estimate_robustness_diagnostic(ssm: &DiagonalSsm, spec: &QuantizationSpec) -> Result<RobustnessEstimate> {
    check_approximates(ssm, spec)?;
    Ok(estimate(ssm, spec))
}
