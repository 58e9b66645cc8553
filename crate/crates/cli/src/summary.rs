//! Aggregation across seeds and the artifacts written by `run`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use ssm_core::Mode;

use crate::config::{Aggregate, ExperimentConfig, Format, Job, SystemSpec};
use crate::error::CliError;
use crate::jobs::{q_key, SeedOutput, SeedResult};

pub const RESOLVED_CONFIG: &str = "resolved_config.json";
pub const SUMMARY_JSON: &str = "summary.json";
pub const SUMMARY_CSV: &str = "summary.csv";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Stats {
    /// Non-finite values propagate into every statistic.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let any_nan = values.iter().any(|v| v.is_nan());
        let pick = |init: f64, f: fn(f64, f64) -> f64| {
            if any_nan {
                f64::NAN
            } else {
                values.iter().copied().fold(init, f)
            }
        };
        Self {
            min: pick(f64::INFINITY, f64::min),
            max: pick(f64::NEG_INFINITY, f64::max),
            mean: values.iter().sum::<f64>() / n,
        }
    }

    pub fn select(&self, aggregate: Aggregate) -> f64 {
        match aggregate {
            Aggregate::Min => self.min,
            Aggregate::Max => self.max,
            Aggregate::Mean => self.mean,
        }
    }
}

/// One cell of a report table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub table: String,
    pub row_header: String,
    pub row: String,
    pub column: String,
    pub metric: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub job: String,
    pub seeds: Vec<u64>,
    pub result_files: Vec<String>,
    pub aggregate: Aggregate,
    pub cells: Vec<Cell>,
    pub stats: BTreeMap<String, Stats>,
}

pub fn result_file_name(seed: u64, format: Format) -> String {
    match format {
        Format::Json => format!("seed_{seed}.json"),
        Format::Csv => format!("seed_{seed}.csv"),
    }
}

pub fn trace_file_name(seed: u64) -> String {
    format!("trace_seed_{seed}.csv")
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(&path.display().to_string(), e))
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn write_resolved_config(config: &ExperimentConfig) -> Result<(), CliError> {
    fs::create_dir_all(&config.output_dir)
        .map_err(|e| CliError::io(&config.output_dir.display().to_string(), e))?;
    write(&config.output_dir.join(RESOLVED_CONFIG), to_json_pretty(config).as_bytes())
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::io("csv", e)
}

pub fn result_to_csv(result: &SeedResult) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["seed".to_string()];
    header.extend(result.metrics.keys().cloned());
    w.write_record(&header).map_err(csv_error)?;
    let mut row = vec![result.seed.to_string()];
    row.extend(result.metrics.values().map(|v| format!("{v:?}")));
    w.write_record(&row).map_err(csv_error)?;
    let bytes = w.into_inner().map_err(|e| CliError::io("csv", e))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Parses a per-seed CSV back into its metrics.
pub fn result_from_csv(job: &str, text: &str) -> Result<SeedResult, String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| e.to_string())?.clone();
    let row = r
        .records()
        .next()
        .ok_or("missing value row")?
        .map_err(|e| e.to_string())?;
    if header.get(0) != Some("seed") || row.len() != header.len() {
        return Err("malformed header".into());
    }
    let seed = row[0].parse().map_err(|_| "bad seed".to_string())?;
    let mut metrics = BTreeMap::new();
    for (k, v) in header.iter().zip(row.iter()).skip(1) {
        metrics.insert(k.to_string(), v.parse().map_err(|_| format!("bad value for {k}"))?);
    }
    Ok(SeedResult {
        job: job.to_string(),
        seed,
        metrics,
        detail: serde_json::Value::Null,
    })
}

pub fn write_seed(config: &ExperimentConfig, out: &SeedOutput) -> Result<String, CliError> {
    let name = result_file_name(out.result.seed, config.format);
    let body = match config.format {
        Format::Json => to_json_pretty(&out.result),
        Format::Csv => result_to_csv(&out.result)?,
    };
    write(&config.output_dir.join(&name), body.as_bytes())?;
    if let Some(trace) = &out.trace {
        write(
            &config.output_dir.join(trace_file_name(out.result.seed)),
            trace.to_csv().as_bytes(),
        )?;
    }
    Ok(name)
}

fn cells(config: &ExperimentConfig) -> Vec<Cell> {
    let cell = |table: String, row_header: &str, row: String, column: String, metric: String| Cell {
        table,
        row_header: row_header.to_string(),
        row,
        column,
        metric,
    };
    match &config.job {
        Job::Train(j) => {
            let (row_header, row) = match j.mode {
                Mode::Real => ("optimizer", j.optimizer.label().to_string()),
                Mode::Complex => ("t", j.target.horizon.to_string()),
            };
            let mode = match j.mode {
                Mode::Real => "real",
                Mode::Complex => "complex",
            };
            vec![cell(
                format!("normalized error, {mode} training"),
                row_header,
                row,
                j.target.label().to_string(),
                "normalized_error".into(),
            )]
        }
        Job::Construct(j) => {
            let method = match j.method {
                crate::config::Method::Vandermonde => "vandermonde",
                crate::config::Method::Dft => "dft",
            };
            vec![cell(
                format!("construction residual, {method}"),
                "t",
                j.target.horizon.to_string(),
                j.target.label().to_string(),
                "residual_l1".into(),
            )]
        }
        Job::Bound(j) => vec![cell(
            format!("lower bound on n‖c⊙b‖∞, ε = {}", j.epsilon),
            "t",
            j.target.horizon.to_string(),
            j.target.label().to_string(),
            "bound".into(),
        )],
        Job::Quantize(j) => j
            .q
            .iter()
            .map(|&q| {
                cell(
                    format!("quantization robustness, t = {}", j.target.horizon),
                    "q",
                    q.to_string(),
                    j.target.label().to_string(),
                    q_key("robustness", q),
                )
            })
            .collect(),
        Job::Oscillation(j) => {
            let row = match j.system {
                SystemSpec::Rotation { .. } => "complex rotation".to_string(),
                SystemSpec::RandomReal { dim } => format!("real n={dim}"),
            };
            vec![
                cell(
                    format!("odd-entry alternations, threshold {}", j.threshold),
                    "system",
                    row.clone(),
                    format!("t={}", j.horizon),
                    "alternations_odd".into(),
                ),
                cell(
                    "odd-entry sign changes".into(),
                    "system",
                    row,
                    format!("t={}", j.horizon),
                    "sign_changes_odd".into(),
                ),
            ]
        }
    }
}

pub fn summarize(config: &ExperimentConfig, results: &[SeedResult], files: Vec<String>) -> Summary {
    let mut by_metric: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in results {
        for (k, v) in &r.metrics {
            by_metric.entry(k.clone()).or_default().push(*v);
        }
    }
    Summary {
        job: config.job.name().to_string(),
        seeds: results.iter().map(|r| r.seed).collect(),
        result_files: files,
        aggregate: config.aggregate(),
        cells: cells(config),
        stats: by_metric.into_iter().map(|(k, v)| (k, Stats::of(&v))).collect(),
    }
}

pub fn summary_to_csv(summary: &Summary) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["metric", "min", "max", "mean"]).map_err(csv_error)?;
    for (k, s) in &summary.stats {
        w.write_record([k.clone(), format!("{:?}", s.min), format!("{:?}", s.max), format!("{:?}", s.mean)])
            .map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io("csv", e))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_summary(dir: &Path, summary: &Summary) -> Result<(), CliError> {
    write(&dir.join(SUMMARY_JSON), to_json_pretty(summary).as_bytes())?;
    write(&dir.join(SUMMARY_CSV), summary_to_csv(summary)?.as_bytes())
}
