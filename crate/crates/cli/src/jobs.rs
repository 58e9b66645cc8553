//! Per-seed job execution.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use ssm_core::bounds::{self, restrict_parity};
use ssm_core::quantization::{estimate_robustness, QuantizationSpec};
use ssm_core::{
    construct_complex_dft, construct_real_vandermonde, rng, training, BoundQuery, Complex64, DiagonalSsm, Parity,
    TargetKind, TrainTrace,
};

use crate::config::{
    reseeded, BoundJob, ConstructJob, Job, Method, OscillationJob, QuantizeJob, SystemSpec, TrainJob,
};
use crate::error::CliError;

/// Outcome of one seed. `metrics` feed the aggregate summary; `detail`
/// carries the job-specific report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub job: String,
    pub seed: u64,
    pub metrics: BTreeMap<String, f64>,
    pub detail: Value,
}

pub struct SeedOutput {
    pub result: SeedResult,
    pub trace: Option<TrainTrace>,
}

pub fn run_seed(job: &Job, seed: u64) -> Result<SeedOutput, CliError> {
    let (metrics, detail, trace) = match job {
        Job::Construct(j) => construct(j, seed)?,
        Job::Train(j) => train(j, seed)?,
        Job::Bound(j) => bound(j, seed)?,
        Job::Quantize(j) => quantize(j, seed)?,
        Job::Oscillation(j) => oscillation(j, seed)?,
    };
    Ok(SeedOutput {
        result: SeedResult {
            job: job.name().to_string(),
            seed,
            metrics,
            detail,
        },
        trace,
    })
}

type JobOutput = (BTreeMap<String, f64>, Value, Option<TrainTrace>);

fn metrics<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn construct(job: &ConstructJob, seed: u64) -> Result<JobOutput, CliError> {
    let spec = reseeded(&job.target, job.reseed_target, seed);
    let target = spec.generate()?;
    let built = match job.method {
        Method::Vandermonde => construct_real_vandermonde(&target, job.nodes.as_deref())?,
        Method::Dft => construct_complex_dft(&target)?,
    };
    let norm = target.norm_l1();
    let m = metrics([
        ("residual_l1", built.residual_l1),
        ("normalized_residual", if norm > 0.0 { built.residual_l1 / norm } else { built.residual_l1 }),
        ("b_norm2", built.b_norm2),
        ("c_norm2", built.c_norm2),
        ("target_norm2", target.norm_l2()),
        ("coupling_inf", built.ssm.coupling_inf_norm()),
    ]);
    let detail = json!({ "method": job.method, "target": spec, "system": built.ssm });
    Ok((m, detail, None))
}

fn train(job: &TrainJob, seed: u64) -> Result<JobOutput, CliError> {
    let config = job.to_train_config(seed);
    let (ssm, trace) = training::train(&config)?;
    let err = training::final_normalized_error(&ssm, &config)?;
    let last = trace.last().copied();
    let m = metrics([
        ("normalized_error", err),
        ("final_loss", last.map_or(f64::NAN, |r| r.loss)),
        ("max_abs_a", ssm.spectral_radius()),
        ("max_abs_b", ssm.b_inf_norm()),
        ("max_abs_c", ssm.c_inf_norm()),
    ]);
    let detail = json!({ "config": config, "system": ssm });
    Ok((m, detail, Some(trace)))
}

fn bound(job: &BoundJob, seed: u64) -> Result<JobOutput, CliError> {
    let spec = reseeded(&job.target, job.reseed_target, seed);
    let target = spec.generate()?;
    let t = target.len();
    let query = BoundQuery::new(target, job.epsilon)?.with_convention(job.convention);
    let report = bounds::lower_bound_general(&query)?;
    let mut m = metrics([
        ("bound", report.bound),
        ("best_d", report.best_d as f64),
        ("best_m", report.best_m as f64),
        ("witness_difference", report.witness_difference),
        ("saturated", f64::from(u8::from(report.saturated))),
    ]);
    let closed_form = match (&spec.kind, spec.label()) {
        (_, "copy") => bounds::lower_bound_copy(t, job.epsilon),
        (TargetKind::Oscillatory, _) if job.epsilon <= 0.5 => Some(bounds::lower_bound_oscillatory(t)),
        (TargetKind::RandomUniform { alpha, .. }, _) => match job.p {
            Some(p) if t >= 8 => Some(bounds::lower_bound_random(t, *alpha, p)?),
            _ => None,
        },
        _ => None,
    };
    if let Some(v) = closed_form {
        m.insert("closed_form".into(), v);
    }
    let detail = json!({ "target": spec, "epsilon": job.epsilon, "report": report });
    Ok((m, detail, None))
}

/// Metric key for a q value, e.g. `robustness_q0.5`.
pub fn q_key(prefix: &str, q: f64) -> String {
    format!("{prefix}_q{q}")
}

fn quantize(job: &QuantizeJob, seed: u64) -> Result<JobOutput, CliError> {
    let spec = reseeded(&job.target, job.reseed_target, seed);
    let target = spec.generate()?;
    let built = construct_real_vandermonde(&target, job.nodes.as_deref())?;
    let epsilon = built.residual_l1 + job.epsilon_margin;
    let mut m = metrics([("residual_l1", built.residual_l1), ("epsilon", epsilon)]);
    let mut reports = Vec::with_capacity(job.q.len());
    for &q in &job.q {
        let qspec = QuantizationSpec::new(q, epsilon, target.clone(), job.samples, seed)?;
        let r = estimate_robustness(&built.ssm, &qspec)?;
        m.insert(q_key("robustness", q), r.empirical_robustness);
        m.insert(q_key("ceiling", q), r.theoretical_ceiling);
        m.insert(q_key("halfwidth", q), r.wilson_halfwidth);
        reports.push(r);
    }
    let detail = json!({ "target": spec, "system": built.ssm, "reports": reports });
    Ok((m, detail, None))
}

pub fn random_real_system(dim: usize, seed: u64) -> DiagonalSsm {
    let mut r = rng::seeded(seed);
    let a: Vec<f64> = (0..dim).map(|_| rng::uniform(&mut r, -0.999, 0.999)).collect();
    let b: Vec<f64> = (0..dim).map(|_| rng::uniform(&mut r, -1.0, 1.0)).collect();
    let c: Vec<f64> = (0..dim).map(|_| rng::uniform(&mut r, -1.0, 1.0)).collect();
    DiagonalSsm::real(&a, &b, &c).expect("finite parameters of matching length")
}

fn oscillation(job: &OscillationJob, seed: u64) -> Result<JobOutput, CliError> {
    let ssm = match job.system {
        SystemSpec::Rotation { magnitude, angle } => DiagonalSsm::complex(
            vec![Complex64::from_polar(magnitude, angle)],
            vec![Complex64::new(1.0, 0.0)],
            vec![Complex64::new(1.0, 0.0)],
        )?,
        SystemSpec::RandomReal { dim } => random_real_system(dim, seed),
    };
    let ir = ssm.impulse_response(job.horizon)?;
    let odd = restrict_parity(&ir, Parity::Odd);
    let mut m = metrics([
        ("alternations_odd", bounds::count_alternations(&odd, job.threshold) as f64),
        ("sign_changes_odd", bounds::sign_changes(&odd, job.deadband) as f64),
    ]);
    if let SystemSpec::RandomReal { dim } = job.system {
        m.insert("sign_change_ceiling".into(), dim.saturating_sub(1) as f64);
    }
    let detail = json!({ "system": ssm, "horizon": job.horizon, "threshold": job.threshold });
    Ok((m, detail, None))
}
