//! JSON experiment configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use ssm_core::training::{Init, OptimizerKind, Parameterization, Schedule};
use ssm_core::{BoundConvention, Mode, TargetKind, TargetSpec, TrainConfig};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Which seed aggregate a report cell shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    Min,
    Max,
    Mean,
}

impl Aggregate {
    pub fn label(self) -> &'static str {
        match self {
            Aggregate::Min => "min over seeds (best)",
            Aggregate::Max => "max over seeds (worst)",
            Aggregate::Mean => "mean over seeds",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub job: Job,
    pub output_dir: PathBuf,
    pub seeds: Vec<u64>,
    #[serde(default = "default_format")]
    pub format: Format,
    /// Overrides the job's default report convention.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<Aggregate>,
}

fn default_format() -> Format {
    Format::Json
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Job {
    Construct(ConstructJob),
    Train(TrainJob),
    Bound(BoundJob),
    Quantize(QuantizeJob),
    Oscillation(OscillationJob),
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Construct(_) => "construct",
            Job::Train(_) => "train",
            Job::Bound(_) => "bound",
            Job::Quantize(_) => "quantize",
            Job::Oscillation(_) => "oscillation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Vandermonde,
    Dft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructJob {
    pub method: Method,
    pub target: TargetSpec,
    /// Vandermonde nodes; equispaced in `[-0.95, 0.95]` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<f64>>,
    #[serde(default = "yes")]
    pub reseed_target: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainJob {
    pub mode: Mode,
    /// State dimension; defaults to the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub target: TargetSpec,
    #[serde(default = "default_optimizer")]
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    #[serde(default)]
    pub weight_decay: f64,
    pub steps: usize,
    #[serde(default = "default_schedule")]
    pub schedule: Schedule,
    #[serde(default = "default_init")]
    pub init: Init,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_parameterization")]
    pub parameterization: Parameterization,
    #[serde(default = "yes")]
    pub reseed_target: bool,
}

impl TrainJob {
    pub fn to_train_config(&self, seed: u64) -> TrainConfig {
        let target = reseeded(&self.target, self.reseed_target, seed);
        TrainConfig {
            mode: self.mode,
            dim: self.dim.unwrap_or(target.horizon),
            horizon: target.horizon,
            target,
            optimizer: self.optimizer,
            learning_rate: self.learning_rate,
            weight_decay: self.weight_decay,
            steps: self.steps,
            schedule: self.schedule,
            seed,
            init: self.init,
            record_every: self.record_every,
            parameterization: self.parameterization,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundJob {
    pub target: TargetSpec,
    pub epsilon: f64,
    #[serde(default)]
    pub convention: BoundConvention,
    /// Success probability for the random-target closed form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default = "yes")]
    pub reseed_target: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantizeJob {
    /// Approximated by a real Vandermonde construction.
    pub target: TargetSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<f64>>,
    /// `ε = residual + epsilon_margin`
    #[serde(default = "default_margin")]
    pub epsilon_margin: f64,
    pub q: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "yes")]
    pub reseed_target: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillationJob {
    pub system: SystemSpec,
    pub horizon: usize,
    /// Alternation threshold on odd entries.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Entries with magnitude at most this are skipped when counting sign
    /// changes.
    #[serde(default)]
    pub deadband: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// `n = 1` complex system `a = magnitude · e^{i angle}`, `b = c = 1`.
    Rotation { magnitude: f64, angle: f64 },
    /// Seeded real stable system with `a ∈ (-1, 1)`, `b, c ∈ [-1, 1]`.
    RandomReal { dim: usize },
}

fn yes() -> bool {
    true
}
fn default_optimizer() -> OptimizerKind {
    OptimizerKind::Adam
}
fn default_schedule() -> Schedule {
    Schedule::Cosine
}
fn default_init() -> Init {
    Init::UniformRing
}
fn default_record_every() -> usize {
    1000
}
fn default_parameterization() -> Parameterization {
    Parameterization::Stable
}
fn default_margin() -> f64 {
    0.5
}
fn default_samples() -> usize {
    ssm_core::quantization::DEFAULT_SAMPLES
}
fn default_threshold() -> f64 {
    0.25
}

/// Replaces the seed of a random target with the run seed.
pub fn reseeded(target: &TargetSpec, reseed: bool, seed: u64) -> TargetSpec {
    match target.kind {
        TargetKind::RandomUniform { alpha, .. } if reseed => TargetSpec::random(alpha, seed, target.horizon),
        _ => target.clone(),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: Self = serde_json::from_str(text).map_err(|e| CliError::schema(e.to_string()))?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.seeds.is_empty() {
            return Err(CliError::schema("seeds must be non-empty"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(CliError::schema("seeds must be distinct"));
        }
        let first = self.seeds[0];
        let check_target = |t: &TargetSpec| -> Result<(), CliError> {
            if t.horizon == 0 {
                return Err(CliError::schema("target horizon must be at least 1"));
            }
            t.generate().map(|_| ()).map_err(|e| CliError::schema(e.to_string()))
        };
        match &self.job {
            Job::Construct(j) => check_target(&j.target)?,
            Job::Train(j) => {
                check_target(&j.target)?;
                j.to_train_config(first).validate().map_err(|e| CliError::schema(e.to_string()))?;
            }
            Job::Bound(j) => {
                check_target(&j.target)?;
                if !(j.epsilon >= 0.0 && j.epsilon.is_finite()) {
                    return Err(CliError::schema("epsilon must be finite and non-negative"));
                }
                if let Some(p) = j.p {
                    if !(p > 0.0 && p <= 1.0) {
                        return Err(CliError::schema("p must lie in (0, 1]"));
                    }
                }
            }
            Job::Quantize(j) => {
                check_target(&j.target)?;
                if j.q.is_empty() {
                    return Err(CliError::schema("q must be non-empty"));
                }
                if let Some(q) = j.q.iter().find(|q| !(0.0..=1.0).contains(*q)) {
                    return Err(CliError::schema(format!("q must lie in [0, 1], got {q}")));
                }
                if j.samples == 0 {
                    return Err(CliError::schema("samples must be at least 1"));
                }
                if !(j.epsilon_margin >= 0.0 && j.epsilon_margin.is_finite()) {
                    return Err(CliError::schema("epsilon_margin must be finite and non-negative"));
                }
            }
            Job::Oscillation(j) => {
                if j.horizon == 0 {
                    return Err(CliError::schema("horizon must be at least 1"));
                }
                match j.system {
                    SystemSpec::Rotation { magnitude, angle } => {
                        if !(magnitude.is_finite() && angle.is_finite()) {
                            return Err(CliError::schema("rotation parameters must be finite"));
                        }
                    }
                    SystemSpec::RandomReal { dim } => {
                        if dim == 0 {
                            return Err(CliError::schema("dim must be at least 1"));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Default report convention: best seed for real training, worst seed
    /// otherwise.
    pub fn aggregate(&self) -> Aggregate {
        self.aggregate.unwrap_or(match &self.job {
            Job::Train(j) if j.mode == Mode::Real => Aggregate::Min,
            _ => Aggregate::Max,
        })
    }
}
