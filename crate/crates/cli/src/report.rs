//! Tables assembled from the summaries found under a results directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::Aggregate;
use crate::error::CliError;
use crate::jobs::SeedResult;
use crate::summary::{result_from_csv, Summary, SUMMARY_JSON};

pub const GAP: &str = "GAP";

/// Columns that come first, in this order, when present.
const PREFERRED_COLUMNS: [&str; 3] = ["copy", "random", "oscillatory"];

#[derive(Debug, Clone, PartialEq)]
pub enum CellValue {
    Value(f64),
    /// The summary exists but one or more per-seed files are missing or
    /// unreadable.
    Partial,
    Missing,
}

impl CellValue {
    fn text(&self) -> String {
        match self {
            CellValue::Value(v) => crate::fmt_value(*v),
            CellValue::Partial => format!("{GAP}(partial)"),
            CellValue::Missing => GAP.to_string(),
        }
    }

    fn csv(&self) -> (String, &'static str) {
        match self {
            CellValue::Value(v) => (format!("{v:?}"), "ok"),
            CellValue::Partial => (String::new(), "partial"),
            CellValue::Missing => (String::new(), "missing"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub title: String,
    pub row_header: String,
    pub aggregate: Option<Aggregate>,
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub cells: BTreeMap<(String, String), CellValue>,
}

impl Table {
    pub fn get(&self, row: &str, column: &str) -> &CellValue {
        self.cells
            .get(&(row.to_string(), column.to_string()))
            .unwrap_or(&CellValue::Missing)
    }

    pub fn gaps(&self) -> usize {
        self.rows
            .iter()
            .flat_map(|r| self.columns.iter().map(move |c| (r, c)))
            .filter(|(r, c)| !matches!(self.get(r, c), CellValue::Value(_)))
            .count()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub tables: Vec<Table>,
    /// Summary files that could not be parsed.
    pub corrupted: Vec<PathBuf>,
}

impl Report {
    pub fn is_complete(&self) -> bool {
        self.corrupted.is_empty() && !self.tables.is_empty() && self.tables.iter().all(|t| t.gaps() == 0)
    }
}

fn find_summaries(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(&dir.display().to_string(), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for path in entries {
        if path.is_dir() {
            find_summaries(&path, out)?;
        } else if path.file_name().is_some_and(|n| n == SUMMARY_JSON) {
            out.push(path);
        }
    }
    Ok(())
}

fn seed_file_ok(dir: &Path, name: &str, job: &str, seed: u64) -> bool {
    let Ok(text) = fs::read_to_string(dir.join(name)) else {
        return false;
    };
    let parsed = if name.ends_with(".csv") {
        result_from_csv(job, &text).ok()
    } else {
        serde_json::from_str::<SeedResult>(&text).ok()
    };
    parsed.is_some_and(|r| r.seed == seed && r.job == job)
}

fn column_order(columns: &mut [String]) {
    columns.sort_by_key(|c| {
        let rank = PREFERRED_COLUMNS.iter().position(|p| p == c).unwrap_or(PREFERRED_COLUMNS.len());
        (rank, c.clone())
    });
}

pub fn build(dir: &Path) -> Result<Report, CliError> {
    if !dir.is_dir() {
        return Err(CliError::io(&dir.display().to_string(), "not a directory"));
    }
    let mut paths = Vec::new();
    find_summaries(dir, &mut paths)?;
    let mut report = Report::default();
    let mut tables: Vec<Table> = Vec::new();
    for path in paths {
        let parsed = fs::read_to_string(&path)
            .ok()
            .and_then(|t| serde_json::from_str::<Summary>(&t).ok());
        let Some(summary) = parsed else {
            report.corrupted.push(path);
            continue;
        };
        let run_dir = path.parent().unwrap_or(dir);
        let complete = summary.result_files.len() == summary.seeds.len()
            && summary
                .result_files
                .iter()
                .zip(&summary.seeds)
                .all(|(f, s)| seed_file_ok(run_dir, f, &summary.job, *s));
        for cell in &summary.cells {
            let idx = match tables.iter().position(|t| t.title == cell.table) {
                Some(i) => i,
                None => {
                    tables.push(Table {
                        title: cell.table.clone(),
                        row_header: cell.row_header.clone(),
                        aggregate: Some(summary.aggregate),
                        rows: Vec::new(),
                        columns: Vec::new(),
                        cells: BTreeMap::new(),
                    });
                    tables.len() - 1
                }
            };
            let table = &mut tables[idx];
            if table.aggregate != Some(summary.aggregate) {
                table.aggregate = None;
            }
            if !table.rows.contains(&cell.row) {
                table.rows.push(cell.row.clone());
            }
            if !table.columns.contains(&cell.column) {
                table.columns.push(cell.column.clone());
            }
            let value = match summary.stats.get(&cell.metric) {
                Some(s) if complete => CellValue::Value(s.select(summary.aggregate)),
                _ => CellValue::Partial,
            };
            table.cells.insert((cell.row.clone(), cell.column.clone()), value);
        }
    }
    for t in &mut tables {
        column_order(&mut t.columns);
    }
    report.tables = tables;
    Ok(report)
}

pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    for t in &report.tables {
        let conv = t.aggregate.map_or("mixed conventions", Aggregate::label);
        out.push_str(&format!("{} [{conv}]\n", t.title));
        let mut grid = vec![std::iter::once(t.row_header.clone()).chain(t.columns.iter().cloned()).collect::<Vec<_>>()];
        for r in &t.rows {
            let mut line = vec![r.clone()];
            line.extend(t.columns.iter().map(|c| t.get(r, c).text()));
            grid.push(line);
        }
        let widths: Vec<usize> = (0..grid[0].len())
            .map(|i| grid.iter().map(|l| l[i].chars().count()).max().unwrap_or(0))
            .collect();
        for (k, line) in grid.iter().enumerate() {
            let cells: Vec<String> = line.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
            if k == 0 {
                let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
                out.push_str(&rule.join("  "));
                out.push('\n');
            }
        }
        out.push('\n');
    }
    for p in &report.corrupted {
        out.push_str(&format!("{GAP}: unreadable summary {}\n", p.display()));
    }
    if report.tables.is_empty() && report.corrupted.is_empty() {
        out.push_str(&format!("{GAP}: no summaries found\n"));
    }
    out
}

/// Long-format CSV: one line per table cell.
pub fn render_csv(report: &Report) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::io("csv", e);
    w.write_record(["table", "aggregate", "row_header", "row", "column", "value", "status"])
        .map_err(err)?;
    for t in &report.tables {
        let agg = match t.aggregate {
            Some(Aggregate::Min) => "min",
            Some(Aggregate::Max) => "max",
            Some(Aggregate::Mean) => "mean",
            None => "mixed",
        };
        for r in &t.rows {
            for c in &t.columns {
                let (value, status) = t.get(r, c).csv();
                w.write_record([t.title.as_str(), agg, t.row_header.as_str(), r, c, &value, status])
                    .map_err(err)?;
            }
        }
    }
    for p in &report.corrupted {
        let path = p.display().to_string();
        w.write_record(["", "", "", "", "", path.as_str(), "corrupted"]).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io("csv", e))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
