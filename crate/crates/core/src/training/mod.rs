//! Gradient-based fitting of diagonal systems to a target impulse response.
//!
//! The loss is the closed form `‖IR_{:t} - target‖₂²` of the expected
//! squared output error under white-noise inputs, so training is
//! deterministic full-batch descent.

pub mod kernel;
pub mod optim;
pub mod params;

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SsmError};
use crate::rng;
use crate::series::{approximation_error, ScalarSeries};
use crate::ssm::{DiagonalSsm, Mode};
use crate::targets::TargetSpec;

pub use optim::{Optimizer, OptimizerKind};
pub use params::{Evaluator, Init, ParamSet, Parameterization, RawParams, StableParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    Constant,
    /// `lr_i = lr · (1 + cos(π i / steps)) / 2`
    Cosine,
}

impl Schedule {
    pub fn rate(self, base: f64, step: usize, steps: usize) -> f64 {
        match self {
            Schedule::Constant => base,
            Schedule::Cosine => base * 0.5 * (1.0 + (PI * step as f64 / steps as f64).cos()),
        }
    }
}

fn default_record_every() -> usize {
    1000
}

fn default_parameterization() -> Parameterization {
    Parameterization::Stable
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub mode: Mode,
    pub dim: usize,
    pub horizon: usize,
    pub target: TargetSpec,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    #[serde(default)]
    pub weight_decay: f64,
    pub steps: usize,
    pub schedule: Schedule,
    pub seed: u64,
    pub init: Init,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_parameterization")]
    pub parameterization: Parameterization,
}

impl TrainConfig {
    /// Adam, cosine schedule, stable parameterization, no weight decay.
    pub fn new(mode: Mode, dim: usize, target: TargetSpec, learning_rate: f64, steps: usize, seed: u64) -> Self {
        Self {
            mode,
            dim,
            horizon: target.horizon,
            target,
            optimizer: OptimizerKind::Adam,
            learning_rate,
            weight_decay: 0.0,
            steps,
            schedule: Schedule::Cosine,
            seed,
            init: Init::UniformRing,
            record_every: default_record_every(),
            parameterization: Parameterization::Stable,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SsmError::InvalidArgument(msg));
        if self.dim == 0 {
            return bad("dim must be at least 1".into());
        }
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if self.target.horizon != self.horizon {
            return Err(SsmError::DimensionMismatch {
                what: "target horizon",
                got: self.target.horizon,
                expected: self.horizon,
            });
        }
        if self.steps == 0 {
            return bad("steps must be at least 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad(format!("weight_decay must be nonnegative, got {}", self.weight_decay));
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        if self.parameterization == Parameterization::Raw && self.mode != Mode::Real {
            return bad("raw parameterization requires real mode".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub loss: f64,
    pub norm_err_l1: f64,
    pub max_abs_b: f64,
    pub max_abs_c: f64,
    pub max_abs_a: f64,
}

impl TraceRecord {
    fn capture(step: usize, loss: f64, ir: &[f64], target: &ScalarSeries, ssm: &DiagonalSsm) -> Self {
        let err: f64 = ir.iter().zip(target.values()).map(|(y, x)| (y - x).abs()).sum();
        Self {
            step,
            loss,
            norm_err_l1: err / target.norm_l1(),
            max_abs_b: ssm.b_inf_norm(),
            max_abs_c: ssm.c_inf_norm(),
            max_abs_a: ssm.spectral_radius(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub mode: Mode,
    pub optimizer: OptimizerKind,
    pub parameterization: Parameterization,
    pub schedule: Schedule,
    pub learning_rate: f64,
    pub records: Vec<TraceRecord>,
}

impl TrainTrace {
    pub const CSV_HEADER: &'static str = "step,loss,norm_err_l1,max_abs_b,max_abs_c,max_abs_a";

    pub fn first(&self) -> Option<&TraceRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// Keeps records with `step <= last_step`.
    pub fn truncated(&self, last_step: usize) -> Self {
        let mut out = self.clone();
        out.records.retain(|r| r.step <= last_step);
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for r in &self.records {
            writeln!(
                w,
                "{},{:?},{:?},{:?},{:?},{:?}",
                r.step, r.loss, r.norm_err_l1, r.max_abs_b, r.max_abs_c, r.max_abs_a
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

/// `‖IR_{:t} - target‖₂²` with `t = target.len()`.
pub fn loss(ssm: &DiagonalSsm, target: &ScalarSeries) -> Result<f64> {
    let ir = ssm.impulse_response(target.len())?;
    Ok(ir
        .values()
        .iter()
        .zip(target.values())
        .map(|(y, x)| (y - x) * (y - x))
        .sum())
}

/// Loss and analytic gradient at `params`, in the layout of `params.flat()`.
pub fn loss_and_gradient(params: &ParamSet, target: &ScalarSeries) -> Result<(f64, Vec<f64>)> {
    if target.is_empty() {
        return Err(SsmError::InvalidArgument("target is empty".into()));
    }
    let mut eval = Evaluator::new(params.mode(), params.dim(), target.len());
    let mut grad = vec![0.0; params.flat().len()];
    let l = eval.evaluate(params, target.values(), Some(&mut grad));
    Ok((l, grad))
}

pub fn gradient(params: &ParamSet, target: &ScalarSeries) -> Result<Vec<f64>> {
    loss_and_gradient(params, target).map(|(_, g)| g)
}

/// Initial parameters drawn from `config.seed`.
pub fn initial_params(config: &TrainConfig) -> Result<ParamSet> {
    config.validate()?;
    let mut r = rng::seeded(config.seed);
    Ok(match config.parameterization {
        Parameterization::Stable => ParamSet::Stable(StableParams::init(config.mode, config.dim, config.init, &mut r)),
        Parameterization::Raw => ParamSet::Raw(RawParams::init(config.dim, config.init, &mut r)),
    })
}

pub fn train(config: &TrainConfig) -> Result<(DiagonalSsm, TrainTrace)> {
    let params = initial_params(config)?;
    train_from(config, params)
}

/// Runs `config` starting from `params` instead of a fresh initialization.
pub fn train_from(config: &TrainConfig, mut params: ParamSet) -> Result<(DiagonalSsm, TrainTrace)> {
    config.validate()?;
    if params.dim() != config.dim {
        return Err(SsmError::DimensionMismatch {
            what: "parameter dimension",
            got: params.dim(),
            expected: config.dim,
        });
    }
    let target = config.target.generate()?;
    if target.is_all_zero() {
        return Err(SsmError::InvalidArgument(
            "target is identically zero; normalized error is undefined".into(),
        ));
    }

    let mut eval = Evaluator::new(params.mode(), params.dim(), config.horizon);
    let mut opt = Optimizer::new(config.optimizer, config.weight_decay, params.flat().len());
    let mut grad = vec![0.0; params.flat().len()];
    let mut trace = TrainTrace {
        mode: params.mode(),
        optimizer: config.optimizer,
        parameterization: config.parameterization,
        schedule: config.schedule,
        learning_rate: config.learning_rate,
        records: Vec::with_capacity(config.steps / config.record_every + 2),
    };

    for i in 0..=config.steps {
        let last = i == config.steps;
        let l = eval.evaluate(&params, target.values(), (!last).then_some(&mut grad[..]));
        if !l.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(SsmError::NonFiniteLoss { step: i });
        }
        if i % config.record_every == 0 || last {
            let ssm = params.realize()?;
            trace
                .records
                .push(TraceRecord::capture(i, l, eval.impulse_response(), &target, &ssm));
        }
        if last {
            break;
        }
        let lr = config.schedule.rate(config.learning_rate, i, config.steps);
        opt.step(params.flat_mut(), &mut grad, lr);
    }

    let ssm = params.realize()?;
    Ok((ssm, trace))
}

/// Final normalized ℓ1 error of a trained system against its config target.
pub fn final_normalized_error(ssm: &DiagonalSsm, config: &TrainConfig) -> Result<f64> {
    let target = config.target.generate()?;
    let ir = ssm.impulse_response(target.len())?;
    Ok(approximation_error(&ir, &target)? / target.norm_l1())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub step: usize,
    /// `max(‖b‖∞, ‖c‖∞)`
    pub observed: f64,
    pub ceiling: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub c1: f64,
    /// `max_i ℓ_i / ℓ_0` over the recorded steps.
    pub c2: f64,
    pub intercept: f64,
    /// Ceiling increment per iteration, `sqrt(4 c1 c2 t ℓ_0)`.
    pub slope: f64,
    pub rows: Vec<GrowthRow>,
    pub all_within: bool,
    /// Whether the run satisfies the premises of the linear ceiling: plain
    /// gradient descent on raw real couplings with steps at most `c1` and
    /// below the edge of stability.
    pub hypotheses_met: bool,
}

/// Compares coupling growth in `trace` against the linear ceiling
/// `M_0 + i · sqrt(4 c1 c2 t ℓ_0)`.
pub fn growth_check(trace: &TrainTrace, c1: f64, t: usize) -> Result<GrowthReport> {
    if !(c1 > 0.0 && c1.is_finite()) {
        return Err(SsmError::InvalidArgument(format!("c1 must be positive, got {c1}")));
    }
    if t == 0 {
        return Err(SsmError::InvalidArgument("t must be at least 1".into()));
    }
    let first = trace
        .first()
        .ok_or_else(|| SsmError::InvalidArgument("trace has no records".into()))?;
    if first.step != 0 {
        return Err(SsmError::InvalidArgument("trace does not start at step 0".into()));
    }
    let l0 = first.loss;
    let c2 = if l0 > 0.0 {
        trace.records.iter().map(|r| r.loss / l0).fold(1.0, f64::max)
    } else {
        1.0
    };
    let intercept = first.max_abs_b.max(first.max_abs_c);
    let slope = (4.0 * c1 * c2 * t as f64 * l0).sqrt();
    let rows: Vec<GrowthRow> = trace
        .records
        .iter()
        .map(|r| {
            let observed = r.max_abs_b.max(r.max_abs_c);
            let ceiling = intercept + r.step as f64 * slope;
            GrowthRow {
                step: r.step,
                observed,
                ceiling,
                within: observed <= ceiling,
            }
        })
        .collect();
    let all_within = rows.iter().all(|r| r.within);
    // The loss Hessian's top eigenvalue is at least 2 M² for couplings of
    // size M, so a step above 1/M² is past the edge of stability.
    let max_coupling = rows.iter().map(|r| r.observed).fold(0.0, f64::max);
    let hypotheses_met = trace.optimizer == OptimizerKind::Sgd
        && trace.parameterization == Parameterization::Raw
        && trace.mode == Mode::Real
        && trace.learning_rate <= c1
        && trace.learning_rate * max_coupling * max_coupling <= 1.0;
    Ok(GrowthReport {
        c1,
        c2,
        intercept,
        slope,
        rows,
        all_within,
        hypotheses_met,
    })
}
