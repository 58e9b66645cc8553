//! Target impulse responses: delays (copy), random, oscillatory and
//! alternating patterns.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SsmError};
use crate::rng;
use crate::series::{approximation_error, ScalarSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TargetKind {
    /// Unit spike at 1-indexed position `k + 1`. `k` defaults to
    /// `⌊(t - 1)/2⌋`, the copy task.
    Delay {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
    },
    /// I.i.d. uniform entries on `[-alpha, alpha]`.
    RandomUniform { alpha: f64, seed: u64 },
    /// `(+1, 0, -1, 0, ...)`
    Oscillatory,
    /// `(+1, -1, +1, -1, ...)`
    Alternating,
    Custom { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    #[serde(flatten)]
    pub kind: TargetKind,
    pub horizon: usize,
}

impl TargetSpec {
    pub fn new(kind: TargetKind, horizon: usize) -> Self {
        Self { kind, horizon }
    }

    /// Copy task: delay by `⌊(t - 1)/2⌋`.
    pub fn copy(horizon: usize) -> Self {
        Self::new(TargetKind::Delay { k: None }, horizon)
    }

    pub fn delay(k: usize, horizon: usize) -> Self {
        Self::new(TargetKind::Delay { k: Some(k) }, horizon)
    }

    pub fn random(alpha: f64, seed: u64, horizon: usize) -> Self {
        Self::new(TargetKind::RandomUniform { alpha, seed }, horizon)
    }

    pub fn oscillatory(horizon: usize) -> Self {
        Self::new(TargetKind::Oscillatory, horizon)
    }

    pub fn alternating(horizon: usize) -> Self {
        Self::new(TargetKind::Alternating, horizon)
    }

    /// Effective delay for [`TargetKind::Delay`].
    pub fn delay_index(&self) -> Option<usize> {
        match self.kind {
            TargetKind::Delay { k } => Some(k.unwrap_or(self.horizon.saturating_sub(1) / 2)),
            _ => None,
        }
    }

    /// True for a delay that falls outside the window, whose truncated
    /// response is all zeros.
    pub fn is_degenerate(&self) -> bool {
        self.delay_index().is_some_and(|k| k >= self.horizon)
    }

    /// Short label used in reports: `copy`, `random`, `oscillatory`, ...
    pub fn label(&self) -> &'static str {
        match self.kind {
            TargetKind::Delay { k: None } => "copy",
            TargetKind::Delay { k: Some(k) } if k == self.horizon.saturating_sub(1) / 2 => "copy",
            TargetKind::Delay { .. } => "delay",
            TargetKind::RandomUniform { .. } => "random",
            TargetKind::Oscillatory => "oscillatory",
            TargetKind::Alternating => "alternating",
            TargetKind::Custom { .. } => "custom",
        }
    }

    pub fn generate(&self) -> Result<ScalarSeries> {
        let t = self.horizon;
        if t == 0 {
            return Err(SsmError::InvalidArgument("target horizon must be at least 1".into()));
        }
        let values = match &self.kind {
            TargetKind::Delay { .. } => {
                let k = self.delay_index().unwrap_or_default();
                let mut v = vec![0.0; t];
                if k < t {
                    v[k] = 1.0;
                }
                v
            }
            TargetKind::RandomUniform { alpha, seed } => {
                if !(*alpha >= 0.0) || !alpha.is_finite() {
                    return Err(SsmError::InvalidArgument(format!(
                        "random target amplitude must be non-negative, got {alpha}"
                    )));
                }
                let mut r = rng::seeded(*seed);
                (0..t).map(|_| rng::uniform(&mut r, -alpha, *alpha)).collect()
            }
            TargetKind::Oscillatory => (0..t)
                .map(|m| match m % 4 {
                    0 => 1.0,
                    2 => -1.0,
                    _ => 0.0,
                })
                .collect(),
            TargetKind::Alternating => (0..t)
                .map(|m| if m % 2 == 0 { 1.0 } else { -1.0 })
                .collect(),
            TargetKind::Custom { values } => {
                if values.len() != t {
                    return Err(SsmError::DimensionMismatch {
                        what: "custom target",
                        got: values.len(),
                        expected: t,
                    });
                }
                values.clone()
            }
        };
        ScalarSeries::new(values)
    }
}

/// `‖candidate - target‖₁ / ‖target‖₁`; the zero mapping scores exactly 1.
pub fn normalized_error(candidate: &ScalarSeries, target: &ScalarSeries) -> Result<f64> {
    let denom = target.norm_l1();
    if denom == 0.0 {
        return Err(SsmError::InvalidArgument(
            "normalized error is undefined for an all-zero target".into(),
        ));
    }
    Ok(approximation_error(candidate, target)? / denom)
}
