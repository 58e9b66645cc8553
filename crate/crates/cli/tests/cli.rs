use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use ssm_cli::config::ExperimentConfig;
use tempfile::TempDir;

fn ssm(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssm"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    fs::write(dir.join(name), body).unwrap();
    name.to_string()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn stderr_record(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|_| panic!("stderr is not a JSON record: {text}"))
}

#[test]
fn bound_job_oscillatory() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bound.json",
        r#"{"job": {"kind": "bound", "target": {"type": "oscillatory", "horizon": 32}, "epsilon": 0.5},
            "output_dir": "out", "seeds": [0]}"#,
    );
    let out = ssm(&["run", &cfg], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&tmp.path().join("out"));
    assert!(s["stats"]["bound"]["min"].as_f64().unwrap() >= 8388608.0);
    assert_eq!(s["stats"]["closed_form"]["max"].as_f64().unwrap(), 1048576.0);
}

#[test]
fn complex_copy_training_worst_seed() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "train.json",
        r#"{"job": {"kind": "train", "mode": "complex", "target": {"type": "delay", "horizon": 32},
                    "learning_rate": 1e-3, "steps": 20000},
            "output_dir": "out", "seeds": [0, 1, 2, 3, 4]}"#,
    );
    let out = ssm(&["run", &cfg, "--jobs", "5"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("out");
    let s = summary(&dir);
    assert!(s["stats"]["normalized_error"]["max"].as_f64().unwrap() <= 1e-2);
    assert_eq!(s["aggregate"], "max");
    for seed in 0..5 {
        let trace = fs::read_to_string(dir.join(format!("trace_seed_{seed}.csv"))).unwrap();
        assert!(trace.starts_with("step,loss,norm_err_l1,max_abs_b,max_abs_c,max_abs_a\n"));
    }
    let report = ssm(&["report", "out"], tmp.path());
    assert!(report.status.success());
    let text = String::from_utf8_lossy(&report.stdout);
    let data_rows: Vec<&str> = text.lines().skip(3).take_while(|l| !l.is_empty()).collect();
    assert_eq!(data_rows.len(), 1, "{text}");
    assert!(data_rows[0].starts_with("32"));
    assert!(dir.join("report.csv").exists());
}

#[test]
fn empty_seeds_is_a_schema_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"job": {"kind": "bound", "target": {"type": "oscillatory", "horizon": 8}, "epsilon": 0.5},
            "output_dir": "out", "seeds": []}"#,
    );
    let out = ssm(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let rec = stderr_record(&out);
    assert_eq!(rec["error"], "schema");
    assert_eq!(rec["exit_code"], 2);
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn unknown_fields_and_bad_values_are_schema_errors() {
    let tmp = TempDir::new().unwrap();
    for (i, body) in [
        r#"{"job": {"kind": "bound", "target": {"type": "oscillatory", "horizon": 8}, "epsilon": 0.5, "extra": 1}, "output_dir": "o", "seeds": [0]}"#,
        r#"{"job": {"kind": "bound", "target": {"type": "oscillatory", "horizon": 8}, "epsilon": -1}, "output_dir": "o", "seeds": [0]}"#,
        r#"{"job": {"kind": "teleport"}, "output_dir": "o", "seeds": [0]}"#,
        r#"{"job": {"kind": "train", "mode": "complex", "target": {"type": "delay", "horizon": 8}, "learning_rate": 0, "steps": 10}, "output_dir": "o", "seeds": [0]}"#,
        r#"{"job": {"kind": "quantize", "target": {"type": "delay", "horizon": 8}, "q": [1.5]}, "output_dir": "o", "seeds": [0]}"#,
        r#"{"job": {"kind": "bound", "target": {"type": "oscillatory", "horizon": 8}, "epsilon": 0.5}, "output_dir": "o", "seeds": [1, 1]}"#,
        "not json",
    ]
    .iter()
    .enumerate()
    {
        let cfg = write_config(tmp.path(), &format!("c{i}.json"), body);
        let out = ssm(&["run", &cfg], tmp.path());
        assert_eq!(out.status.code(), Some(2), "config {i}");
        assert_eq!(stderr_record(&out)["error"], "schema");
    }
}

#[test]
fn numeric_failure_exits_3() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"job": {"kind": "construct", "method": "vandermonde", "target": {"type": "delay", "horizon": 2},
                    "nodes": [0.5, 0.5]},
            "output_dir": "out", "seeds": [7]}"#,
    );
    let out = ssm(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(3));
    let rec = stderr_record(&out);
    assert_eq!(rec["error"], "numeric");
    assert_eq!(rec["seed"], 7);
}

#[test]
fn io_failures_exit_4() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("blocker"), "").unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"job": {"kind": "bound", "target": {"type": "oscillatory", "horizon": 8}, "epsilon": 0.5},
            "output_dir": "blocker/out", "seeds": [0]}"#,
    );
    let out = ssm(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(stderr_record(&out)["error"], "io");

    let out = ssm(&["run", "missing.json"], tmp.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn resolved_config_round_trips_with_overrides() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"job": {"kind": "quantize", "target": {"type": "random_uniform", "alpha": 1.0, "seed": 3, "horizon": 6},
                    "q": [0.1, 1.0], "samples": 2000},
            "output_dir": "ignored", "seeds": [0]}"#,
    );
    let out = ssm(
        &["run", &cfg, "--seeds", "4,5", "--output-dir", "elsewhere", "--format", "csv"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("q sweep"));
    let dir = tmp.path().join("elsewhere");
    assert!(!tmp.path().join("ignored").exists());
    assert!(dir.join("seed_4.csv").exists() && dir.join("seed_5.csv").exists());

    let text = fs::read_to_string(dir.join("resolved_config.json")).unwrap();
    let resolved = ExperimentConfig::parse(&text).unwrap();
    assert_eq!(resolved.seeds, vec![4, 5]);
    assert_eq!(serde_json::to_string_pretty(&resolved).unwrap() + "\n", text);

    // Running the resolved config reproduces the same artifacts.
    let again = ssm(&["run", "elsewhere/resolved_config.json", "--output-dir", "rerun"], tmp.path());
    assert!(again.status.success());
    for f in ["seed_4.csv", "seed_5.csv", "summary.json", "summary.csv"] {
        assert_eq!(
            fs::read(dir.join(f)).unwrap(),
            fs::read(tmp.path().join("rerun").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn per_seed_files_are_identical_across_reruns_and_job_counts() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"job": {"kind": "train", "mode": "real", "dim": 6, "target": {"type": "random_uniform", "alpha": 1.0, "seed": 0, "horizon": 12},
                    "learning_rate": 1e-2, "steps": 500, "record_every": 50},
            "output_dir": "a", "seeds": [0, 1, 2, 3]}"#,
    );
    assert!(ssm(&["run", &cfg, "--jobs", "1"], tmp.path()).status.success());
    assert!(ssm(&["run", &cfg, "--jobs", "4", "--output-dir", "b"], tmp.path()).status.success());
    for seed in 0..4 {
        for f in [format!("seed_{seed}.json"), format!("trace_seed_{seed}.csv")] {
            assert_eq!(
                fs::read(tmp.path().join("a").join(&f)).unwrap(),
                fs::read(tmp.path().join("b").join(&f)).unwrap(),
                "{f}"
            );
        }
    }
    // The random target follows the run seed.
    let r0: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("a/seed_0.json")).unwrap()).unwrap();
    let r1: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("a/seed_1.json")).unwrap()).unwrap();
    assert_eq!(r0["detail"]["config"]["target"]["seed"], 0);
    assert_eq!(r1["detail"]["config"]["target"]["seed"], 1);
}

fn real_grid(root: &Path, skip: Option<(&str, &str)>) {
    let targets = [
        ("copy", r#"{"type": "delay", "horizon": 8}"#),
        ("random", r#"{"type": "random_uniform", "alpha": 1.0, "seed": 0, "horizon": 8}"#),
        ("oscillatory", r#"{"type": "oscillatory", "horizon": 8}"#),
    ];
    for opt in ["Adam", "AdamW", "RAdam"] {
        for (label, target) in targets {
            if skip == Some((opt, label)) {
                continue;
            }
            let body = format!(
                r#"{{"job": {{"kind": "train", "mode": "real", "dim": 4, "target": {target}, "optimizer": "{opt}",
                           "learning_rate": 1e-3, "steps": 50, "record_every": 10}},
                    "output_dir": "results/{opt}_{label}", "seeds": [0, 1]}}"#
            );
            let cfg = write_config(root, &format!("{opt}_{label}.json"), &body);
            let out = ssm(&["run", &cfg], root);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        }
    }
}

#[test]
fn report_real_grid_is_three_by_three() {
    let tmp = TempDir::new().unwrap();
    real_grid(tmp.path(), None);
    let out = ssm(&["report", "results"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("normalized error, real training [min over seeds (best)]"));
    let header: Vec<&str> = lines[1].split_whitespace().collect();
    assert_eq!(header, ["optimizer", "copy", "random", "oscillatory"]);
    let rows: Vec<Vec<&str>> = lines[3..6].iter().map(|l| l.split_whitespace().collect()).collect();
    let mut names: Vec<&str> = rows.iter().map(|r| r[0]).collect();
    names.sort_unstable();
    assert_eq!(names, ["adam", "adamw", "radam"]);
    assert!(rows.iter().all(|r| r.len() == 4 && r[1..].iter().all(|c| c.parse::<f64>().is_ok())));

    let csv = fs::read_to_string(tmp.path().join("results/report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 10);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",ok")));
}

#[test]
fn report_marks_missing_cells() {
    let tmp = TempDir::new().unwrap();
    real_grid(tmp.path(), Some(("RAdam", "random")));
    let out = ssm(&["report", "results"], tmp.path());
    assert_eq!(out.status.code(), Some(5));
    assert_eq!(stderr_record(&out)["error"], "report");
    let text = String::from_utf8_lossy(&out.stdout);
    let radam = text.lines().find(|l| l.starts_with("radam")).unwrap();
    assert!(radam.contains("GAP"), "{radam}");
}

#[test]
fn report_marks_corrupted_results() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"job": {"kind": "bound", "target": {"type": "delay", "horizon": 16}, "epsilon": 0.01},
            "output_dir": "results/run", "seeds": [0, 1]}"#,
    );
    assert!(ssm(&["run", &cfg], tmp.path()).status.success());
    assert!(ssm(&["report", "results"], tmp.path()).status.success());

    fs::write(tmp.path().join("results/run/seed_1.json"), "{ truncated").unwrap();
    let out = ssm(&["report", "results"], tmp.path());
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stdout).contains("GAP(partial)"));

    fs::write(tmp.path().join("results/run/summary.json"), "garbage").unwrap();
    let out = ssm(&["report", "results"], tmp.path());
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stdout).contains("unreadable summary"));
}

#[test]
fn empty_results_directory_is_a_gap() {
    let tmp = TempDir::new().unwrap();
    let out = ssm(&["report", "."], tmp.path());
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn oscillation_jobs_respect_counts() {
    let tmp = TempDir::new().unwrap();
    let rot = write_config(
        tmp.path(),
        "rot.json",
        r#"{"job": {"kind": "oscillation", "system": {"type": "rotation", "magnitude": 0.999, "angle": 1.5707963267948966},
                    "horizon": 100, "threshold": 0.25},
            "output_dir": "rot", "seeds": [0]}"#,
    );
    assert!(ssm(&["run", &rot], tmp.path()).status.success());
    assert!(summary(&tmp.path().join("rot"))["stats"]["alternations_odd"]["min"].as_f64().unwrap() >= 10.0);

    let real = write_config(
        tmp.path(),
        "real.json",
        r#"{"job": {"kind": "oscillation", "system": {"type": "random_real", "dim": 4}, "horizon": 100},
            "output_dir": "real", "seeds": [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]}"#,
    );
    assert!(ssm(&["run", &real, "--jobs", "2"], tmp.path()).status.success());
    assert!(summary(&tmp.path().join("real"))["stats"]["sign_changes_odd"]["max"].as_f64().unwrap() <= 3.0);
}

#[test]
fn construct_dft_is_exact() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"job": {"kind": "construct", "method": "dft", "target": {"type": "random_uniform", "alpha": 1.0, "seed": 0, "horizon": 16}},
            "output_dir": "out", "seeds": [0, 1, 2]}"#,
    );
    assert!(ssm(&["run", &cfg], tmp.path()).status.success());
    let s = summary(&tmp.path().join("out"));
    assert!(s["stats"]["normalized_residual"]["max"].as_f64().unwrap() < 1e-9);
    assert!((s["stats"]["c_norm2"]["mean"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}
