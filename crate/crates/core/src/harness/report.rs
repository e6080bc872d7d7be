use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{median, BenchResult, Configuration};
use crate::category::TraceSelection;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Text,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "text" => Ok(ReportFormat::Text),
            other => Err(format!("unknown report format `{other}` (csv, json, text)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub configuration: Configuration,
    pub traces: TraceSelection,
    pub runs: usize,
    pub median_s: f64,
    pub mean_s: f64,
    pub stddev_s: f64,
    pub min_s: f64,
    pub max_s: f64,
    pub record_count: u64,
    /// Median relative to the reference median of the same trace set
    /// (all reference runs pooled when that cell is absent).
    pub overhead: Option<f64>,
}

pub fn summary_rows(result: &BenchResult) -> Vec<SummaryRow> {
    let pooled: Vec<f64> = result
        .cells
        .iter()
        .filter(|c| c.configuration == Configuration::Reference)
        .flat_map(|c| c.wall_s.iter().copied())
        .collect();
    let pooled_median = (!pooled.is_empty()).then(|| median(&pooled));

    result
        .cells
        .iter()
        .map(|cell| {
            let reference = result
                .cell(Configuration::Reference, cell.traces)
                .map(|r| r.summary.median)
                .or(pooled_median);
            SummaryRow {
                configuration: cell.configuration,
                traces: cell.traces,
                runs: cell.wall_s.len(),
                median_s: cell.summary.median,
                mean_s: cell.summary.mean,
                stddev_s: cell.summary.stddev,
                min_s: cell.summary.min,
                max_s: cell.summary.max,
                record_count: cell.record_count,
                overhead: reference.map(|r| cell.summary.median / r),
            }
        })
        .collect()
}

pub const RUNS_CSV_HEADER: &str = "configuration,traces,run,wall_s,record_count";

/// One row per measured run, for distribution plots.
pub fn runs_csv(result: &BenchResult) -> String {
    let mut out = format!("{RUNS_CSV_HEADER}\n");
    for cell in &result.cells {
        for (run, wall) in cell.wall_s.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},\"{}\",{},{:.6},{}",
                cell.configuration, cell.traces, run, wall, cell.record_count
            );
        }
    }
    out
}

pub fn summarize(result: &BenchResult, format: ReportFormat) -> String {
    let rows = summary_rows(result);
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(&rows).expect("rows serialize"),
        ReportFormat::Csv => {
            let mut out = String::from(
                "configuration,traces,runs,median_s,mean_s,stddev_s,min_s,max_s,record_count,overhead\n",
            );
            for r in &rows {
                // Trace lists contain commas.
                let _ = writeln!(
                    out,
                    "{},\"{}\",{},{:.6},{:.6},{:.6},{:.6},{:.6},{},{}",
                    r.configuration,
                    r.traces,
                    r.runs,
                    r.median_s,
                    r.mean_s,
                    r.stddev_s,
                    r.min_s,
                    r.max_s,
                    r.record_count,
                    r.overhead.map(|o| format!("{o:.4}")).unwrap_or_default()
                );
            }
            out
        }
        ReportFormat::Text => {
            let mut out = format!(
                "{:<20} {:<28} {:>4} {:>10} {:>10} {:>10} {:>10} {:>10} {:>9} {:>8}\n",
                "configuration", "traces", "runs", "median_s", "mean_s", "stddev_s", "min_s",
                "max_s", "records", "overhead"
            );
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{:<20} {:<28} {:>4} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>9} {:>8}",
                    r.configuration.name(),
                    r.traces.to_string(),
                    r.runs,
                    r.median_s,
                    r.mean_s,
                    r.stddev_s,
                    r.min_s,
                    r.max_s,
                    r.record_count,
                    r.overhead.map(|o| format!("{o:.2}")).unwrap_or_else(|| "-".into())
                );
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::TraceCategory;
    use crate::harness::{CellResult, Summary};

    fn cell(configuration: Configuration, traces: TraceSelection, wall: &[f64], records: u64) -> CellResult {
        CellResult {
            configuration,
            traces,
            wall_s: wall.to_vec(),
            summary: Summary::of(wall),
            record_count: records,
        }
    }

    #[test]
    fn reference_only_has_unit_overhead() {
        let result = BenchResult {
            cells: vec![cell(Configuration::Reference, TraceSelection::NONE, &[1.0, 1.2, 1.1], 0)],
            warnings: vec![],
        };
        let rows = summary_rows(&result);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].overhead, Some(1.0));
        assert!(summarize(&result, ReportFormat::Csv).contains(",0,1.0000\n"));
    }

    #[test]
    fn overhead_against_same_trace_set() {
        let q = TraceSelection::only(TraceCategory::Quantum);
        let result = BenchResult {
            cells: vec![
                cell(Configuration::Reference, q, &[2.0, 2.0, 2.0], 0),
                cell(Configuration::NonintrusiveShared, q, &[3.0, 3.0, 3.0], 10),
            ],
            warnings: vec![],
        };
        let rows = summary_rows(&result);
        assert_eq!(rows[1].overhead, Some(1.5));
        assert_eq!(rows[1].record_count, 10);
    }

    #[test]
    fn json_round_trips() {
        let result = BenchResult {
            cells: vec![
                cell(Configuration::Reference, TraceSelection::NONE, &[1.0, 1.5, 2.0], 0),
                cell(Configuration::IntrusiveShared, TraceSelection::ALL, &[2.0, 2.5, 3.0], 99),
            ],
            warnings: vec![],
        };
        let json = summarize(&result, ReportFormat::Json);
        let back: Vec<SummaryRow> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, summary_rows(&result));
    }

    #[test]
    fn runs_csv_has_one_row_per_run() {
        let result = BenchResult {
            cells: vec![
                cell(Configuration::Reference, TraceSelection::NONE, &[1.0, 1.5, 2.0], 0),
                cell(Configuration::NonintrusiveShared, TraceSelection::ALL, &[2.0, 2.5, 3.0], 7),
            ],
            warnings: vec![],
        };
        let csv = runs_csv(&result);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[0], RUNS_CSV_HEADER);
        assert_eq!(lines[1], "reference,\"none\",0,1.000000,0");
        assert_eq!(lines[6], "nonintrusive_shared,\"all\",2,3.000000,7");
    }

    #[test]
    fn text_lists_every_row() {
        let result = BenchResult {
            cells: vec![cell(Configuration::IntrusiveStatic, TraceSelection::ALL, &[1.0, 1.0, 1.0], 5)],
            warnings: vec![],
        };
        let text = summarize(&result, ReportFormat::Text);
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("intrusive_static"));
        assert!(text.lines().nth(1).unwrap().trim_end().ends_with('-'));
    }
}
