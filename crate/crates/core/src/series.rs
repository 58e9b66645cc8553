//! Finite real scalar series and the elementary operations on them.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SsmError};

/// A finite series of real, finite scalars.
///
/// Used for impulse responses, inputs, outputs and targets alike. Elements
/// are stored 0-indexed; the mathematical 1-indexed element `k` lives at
/// `values()[k - 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ScalarSeries(Vec<f64>);

impl ScalarSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SsmError::NonFiniteSeries { index });
        }
        Ok(Self(values))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    /// The impulse `(1, 0, 0, ...)` truncated to `len` entries.
    pub fn impulse(len: usize) -> Self {
        let mut v = vec![0.0; len];
        if let Some(first) = v.first_mut() {
            *first = 1.0;
        }
        Self(v)
    }

    /// Wraps values the caller has already checked to be finite.
    pub(crate) fn from_finite(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn norm_l1(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_all_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    /// First `len` entries (or the whole series if shorter).
    pub fn truncate(&self, len: usize) -> Self {
        Self(self.0[..len.min(self.0.len())].to_vec())
    }

    /// `alpha * self + other`, elementwise.
    pub fn axpy(&self, alpha: f64, other: &Self) -> Result<Self> {
        check_same_len(self, other)?;
        Self::new(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(x, y)| alpha * x + y)
                .collect(),
        )
    }

    /// Prepends `k` zeros and keeps the original length (the delay operator
    /// restricted to a finite window).
    pub fn delay(&self, k: usize) -> Self {
        let n = self.0.len();
        let mut out = vec![0.0; n];
        if k < n {
            out[k..].copy_from_slice(&self.0[..n - k]);
        }
        Self(out)
    }
}

impl TryFrom<Vec<f64>> for ScalarSeries {
    type Error = SsmError;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<ScalarSeries> for Vec<f64> {
    fn from(s: ScalarSeries) -> Self {
        s.0
    }
}

impl AsRef<[f64]> for ScalarSeries {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

fn check_same_len(a: &ScalarSeries, b: &ScalarSeries) -> Result<()> {
    if a.len() != b.len() {
        return Err(SsmError::DimensionMismatch {
            what: "series",
            got: a.len(),
            expected: b.len(),
        });
    }
    Ok(())
}

/// ℓ1 distance between two series of equal length.
pub fn approximation_error(candidate: &ScalarSeries, target: &ScalarSeries) -> Result<f64> {
    check_same_len(candidate, target)?;
    Ok(candidate
        .0
        .iter()
        .zip(&target.0)
        .map(|(c, t)| (c - t).abs())
        .sum())
}

/// First `input.len()` entries of the full convolution `input * kernel`,
/// by direct summation.
pub fn convolve_truncated(input: &ScalarSeries, kernel: &ScalarSeries) -> ScalarSeries {
    let n = input.len();
    let mut out = vec![0.0; n];
    for (m, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for t in 0..=m {
            if let Some(k) = kernel.0.get(m - t) {
                acc += input.0[t] * k;
            }
        }
        *slot = acc;
    }
    ScalarSeries::from_finite(out)
}
