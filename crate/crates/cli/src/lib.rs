//! Experiment runner: JSON-configured jobs over a list of seeds, with
//! per-seed artifacts, seed aggregates and summary tables.

pub mod config;
pub mod error;
pub mod jobs;
pub mod report;
pub mod summary;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use config::{ExperimentConfig, Format, Job};
use error::CliError;
use jobs::{q_key, SeedOutput};
use summary::Summary;

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seeds: Option<Vec<u64>>,
    pub output_dir: Option<PathBuf>,
    pub format: Option<Format>,
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(&path.display().to_string(), e))?;
    let mut config = ExperimentConfig::parse(&text)?;
    if let Some(seeds) = &overrides.seeds {
        config.seeds = seeds.clone();
    }
    if let Some(dir) = &overrides.output_dir {
        config.output_dir = dir.clone();
    }
    if let Some(format) = overrides.format {
        config.format = format;
    }
    config.validate()?;
    Ok(config)
}

/// Runs every seed with at most `jobs` seeds in flight, writes the
/// artifacts, and returns the summary.
pub fn run(config: &ExperimentConfig, jobs: usize) -> Result<Summary, CliError> {
    summary::write_resolved_config(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::io("thread pool", e))?;
    let outputs: Vec<Result<SeedOutput, CliError>> = pool.install(|| {
        config
            .seeds
            .par_iter()
            .map(|&seed| jobs::run_seed(&config.job, seed).map_err(|e| e.with_seed(seed)))
            .collect()
    });
    let mut results = Vec::with_capacity(outputs.len());
    let mut files = Vec::with_capacity(outputs.len());
    let mut first_err = None;
    for out in outputs {
        match out {
            Ok(out) => {
                files.push(summary::write_seed(config, &out)?);
                results.push(out.result);
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if let Some(e) = first_err {
        return Err(e);
    }
    let summary = summary::summarize(config, &results, files);
    summary::write_summary(&config.output_dir, &summary)?;
    Ok(summary)
}

/// Aggregate table printed after a run; quantize jobs also get a q sweep.
pub fn render_run(config: &ExperimentConfig, summary: &Summary) -> String {
    let mut out = format!(
        "{} job, {} seed(s), output in {}\n",
        summary.job,
        summary.seeds.len(),
        config.output_dir.display()
    );
    let width = summary.stats.keys().map(|k| k.len()).max().unwrap_or(6).max(6);
    out.push_str(&format!("{:<width$}  {:>12}  {:>12}  {:>12}\n", "metric", "min", "max", "mean"));
    for (k, s) in &summary.stats {
        out.push_str(&format!(
            "{k:<width$}  {:>12}  {:>12}  {:>12}\n",
            fmt_value(s.min),
            fmt_value(s.max),
            fmt_value(s.mean)
        ));
    }
    if let Job::Quantize(j) = &config.job {
        out.push_str("\nq sweep (max over seeds)\n");
        out.push_str(&format!("{:>6}  {:>10}  {:>10}  {:>10}\n", "q", "robustness", "ceiling", "halfwidth"));
        for &q in &j.q {
            let get = |p: &str| summary.stats.get(&q_key(p, q)).map_or(f64::NAN, |s| s.max);
            out.push_str(&format!(
                "{q:>6}  {:>10.4}  {:>10.4}  {:>10.4}\n",
                get("robustness"),
                get("ceiling"),
                get("halfwidth")
            ));
        }
    }
    out
}

/// Integers print as such; everything else in 4-digit scientific form.
pub fn fmt_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e9 {
        format!("{v:.0}")
    } else {
        format!("{v:.4e}")
    }
}
