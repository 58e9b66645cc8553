//! Lower bounds on `n ‖c ⊙ b‖∞` for real diagonal systems, and the
//! oscillation counts that separate real from complex systems.
//!
//! The general bound searches over forward differences of the odd and even
//! restrictions of the target impulse response:
//!
//! ```text
//! n ‖c ⊙ b‖∞ ≥ max_{d, m ≥ 1, d + m ≤ ⌊t/2⌋, σ}  2^{d + 2 min(d, m)} (2^{-d} |(φ|σ)^{(d)}_m| - ε)
//! ```
//!
//! for every real stable system whose impulse response is within ℓ1
//! distance `ε` of the target. The closed-form bounds specialize it at
//! particular `(d, m, σ)`. As written the exponent overshoots on small
//! systems; [`BoundConvention::Shifted`] uses `min(d, m - 1)` and is sound.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SsmError};
use crate::series::ScalarSeries;
use crate::ssm::DiagonalSsm;

/// Above this order forward differences are computed by repeated
/// differencing instead of the binomial closed form.
pub const CLOSED_FORM_MAX_ORDER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Odd,
    Even,
}

/// Exact `binom(n, k)`; `None` if it does not fit in 128 bits.
pub fn binomial(n: u32, k: u32) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// The `order`-th forward difference, of length `series.len() - order`.
///
/// Entry `m` (0-indexed) is `Σ_j (-1)^{order-j} binom(order, j) S_{m+j}`
/// with exact integer binomials for `order ≤ 64`; higher orders fall back to
/// repeated first differences.
pub fn forward_difference(series: &ScalarSeries, order: usize) -> Result<ScalarSeries> {
    let len = series.len();
    if order == 0 || order >= len {
        return Err(SsmError::InvalidArgument(format!(
            "forward difference order {order} must be in 1..{len}"
        )));
    }
    let s = series.values();
    let out = if order <= CLOSED_FORM_MAX_ORDER {
        let coeffs: Vec<f64> = (0..=order)
            .map(|j| {
                let c = binomial(order as u32, j as u32).expect("binomial fits for order <= 64") as f64;
                if (order - j).is_multiple_of(2) {
                    c
                } else {
                    -c
                }
            })
            .collect();
        (0..len - order)
            .map(|m| coeffs.iter().zip(&s[m..]).map(|(c, v)| c * v).sum())
            .collect()
    } else {
        iterated_difference(s, order)
    };
    ScalarSeries::new(out).map_err(|_| SsmError::NonFiniteParameter { name: "forward difference" })
}

fn iterated_difference(s: &[f64], order: usize) -> Vec<f64> {
    let mut cur = s.to_vec();
    for _ in 0..order {
        cur = cur.windows(2).map(|w| w[1] - w[0]).collect();
    }
    cur
}

/// Odd keeps 1-indexed entries 1, 3, 5, ...; Even keeps 2, 4, 6, ...
pub fn restrict_parity(series: &ScalarSeries, parity: Parity) -> ScalarSeries {
    let skip = match parity {
        Parity::Odd => 0,
        Parity::Even => 1,
    };
    ScalarSeries::from_finite(series.values().iter().skip(skip).step_by(2).copied().collect())
}

/// Exponent convention for the general bound.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundConvention {
    /// `2^{d + 2 min(d, m)}` with 1-indexed `m`, as the inequality is usually
    /// written. It can overshoot: `a = 0.5, b = c = 1` has
    /// `n ‖c ⊙ b‖∞ = 1` but scores 3 at `d = m = 1`, `ε = 0`.
    #[default]
    Stated,
    /// `2^{d + 2 min(d, m - 1)}`. Entry `m` of the `d`-th difference of
    /// `Σ w_j x_j^{i-1}` (`0 ≤ x_j ≤ 1`) is at most
    /// `n ‖w‖∞ max_x x^{m-1} (1-x)^d ≤ n ‖w‖∞ 4^{-min(d, m-1)}`, so this form
    /// is a valid lower bound for every real system.
    Shifted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub target: ScalarSeries,
    pub epsilon: f64,
    #[serde(default)]
    pub convention: BoundConvention,
}

impl BoundQuery {
    pub fn new(target: ScalarSeries, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) {
            return Err(SsmError::InvalidArgument(format!(
                "epsilon must be non-negative, got {epsilon}"
            )));
        }
        Ok(Self {
            target,
            epsilon,
            convention: BoundConvention::Stated,
        })
    }

    pub fn with_convention(mut self, convention: BoundConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn horizon(&self) -> usize {
        self.target.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Lower bound on `n ‖c ⊙ b‖∞`; non-positive means vacuous.
    pub bound: f64,
    pub best_d: usize,
    pub best_m: usize,
    pub best_parity: Parity,
    /// `|(φ|σ)^{(d)}_m|` at the maximizer.
    pub witness_difference: f64,
    /// Set when a power of two overflowed to infinity during the search.
    pub saturated: bool,
    pub convention: BoundConvention,
}

impl BoundReport {
    pub fn is_vacuous(&self) -> bool {
        self.bound <= 0.0
    }
}

/// Exhaustive search of the forward-difference bound over
/// `d, m ≥ 1, d + m ≤ ⌊t/2⌋` and both parities.
///
/// Ties keep the smallest `d`, then the smallest `m`, then odd before even.
pub fn lower_bound_general(query: &BoundQuery) -> Result<BoundReport> {
    let t = query.horizon();
    if t < 4 {
        return Err(SsmError::InvalidArgument(format!(
            "lower bound search needs horizon >= 4, got {t}"
        )));
    }
    let half = t / 2;
    let eps = query.epsilon;
    let odd = restrict_parity(&query.target, Parity::Odd);
    let even = restrict_parity(&query.target, Parity::Even);

    let mut best: Option<BoundReport> = None;
    let mut saturated = false;
    for d in 1..half {
        let diffs = [
            (Parity::Odd, forward_difference(&odd, d)?),
            (Parity::Even, forward_difference(&even, d)?),
        ];
        let inv_scale = (-(d as f64)).exp2();
        for m in 1..=half - d {
            let tail = match query.convention {
                BoundConvention::Stated => m,
                BoundConvention::Shifted => m - 1,
            };
            let factor = ((d + 2 * d.min(tail)) as f64).exp2();
            if factor.is_infinite() {
                saturated = true;
            }
            for (parity, diff) in &diffs {
                let Some(&value) = diff.values().get(m - 1) else {
                    continue;
                };
                let inner = inv_scale * value.abs() - eps;
                let candidate = if inner == 0.0 { 0.0 } else { factor * inner };
                if best.as_ref().is_none_or(|b| candidate > b.bound) {
                    best = Some(BoundReport {
                        bound: candidate,
                        best_d: d,
                        best_m: m,
                        best_parity: *parity,
                        witness_difference: value.abs(),
                        saturated: false,
                        convention: query.convention,
                    });
                }
            }
        }
    }
    let mut report = best.expect("horizon >= 4 admits d = m = 1");
    report.saturated = saturated;
    Ok(report)
}

/// Copy (delay by `⌊(t-1)/2⌋`) bound `2^{t/2} / (32 √t)`.
///
/// Returns `None` (not applicable) unless `t ≥ 9` and `ε ≤ 1/(8√t)`.
pub fn lower_bound_copy(t: usize, epsilon: f64) -> Option<f64> {
    let tf = t as f64;
    if t < 9 || !(epsilon <= 1.0 / (8.0 * tf.sqrt())) {
        return None;
    }
    Some((tf / 2.0).exp2() / (32.0 * tf.sqrt()))
}

/// Random-target bound `2^{t/2} α √p / (8 √t)`, holding with probability at
/// least `1 - p` over the draw of the target.
pub fn lower_bound_random(t: usize, alpha: f64, p: f64) -> Result<f64> {
    if t < 8 {
        return Err(SsmError::InvalidArgument(format!(
            "random-target bound needs t >= 8, got {t}"
        )));
    }
    if !(alpha >= 0.0) || !(p > 0.0 && p <= 1.0) {
        return Err(SsmError::InvalidArgument(format!(
            "random-target bound needs alpha >= 0 and p in (0, 1], got alpha={alpha}, p={p}"
        )));
    }
    let tf = t as f64;
    Ok((tf / 2.0).exp2() * alpha * p.sqrt() / (8.0 * tf.sqrt()))
}

/// Oscillatory-target bound `2^{3t/4 - 4}`, valid for `ε ≤ 1/2`.
pub fn lower_bound_oscillatory(t: usize) -> f64 {
    (3.0 * t as f64 / 4.0 - 4.0).exp2()
}

/// Counts completed transitions between the bands `≥ +threshold` and
/// `≤ -threshold`; entries strictly inside the band are skipped.
pub fn count_alternations(series: &ScalarSeries, threshold: f64) -> usize {
    let mut state: Option<bool> = None;
    let mut count = 0;
    for &v in series.values() {
        let band = if v >= threshold {
            Some(true)
        } else if v <= -threshold {
            Some(false)
        } else {
            None
        };
        if let Some(up) = band {
            if state.is_some_and(|s| s != up) {
                count += 1;
            }
            state = Some(up);
        }
    }
    count
}

/// Sign flips between consecutive entries with `|value| > deadband`.
pub fn sign_changes(series: &ScalarSeries, deadband: f64) -> usize {
    let mut last: Option<bool> = None;
    let mut count = 0;
    for &v in series.values() {
        if v.abs() > deadband {
            let positive = v > 0.0;
            if last.is_some_and(|l| l != positive) {
                count += 1;
            }
            last = Some(positive);
        }
    }
    count
}

/// One-mode real system that ε-approximates the alternating target
/// `(+1, -1, ...)` up to time `t` with `b c = 1`, so the alternating target
/// needs no large coefficients.
pub fn alternating_witness(t: usize, epsilon: f64) -> Result<DiagonalSsm> {
    let tf = t as f64;
    let a = (-1.0 + epsilon / (tf * tf)).min(0.0);
    DiagonalSsm::real(&[a], &[1.0], &[1.0])
}
