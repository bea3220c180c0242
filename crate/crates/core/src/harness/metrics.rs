//! Aggregate metrics over trial records and their text renderings.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::envs::AlfCategory;
use crate::orchestrator::{ErrorKind, Resolution, TrialRecord};

/// Placeholder for a rate or average over an empty set.
pub const UNDEFINED: &str = "–";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DifficultyBin {
    Rooms(usize),
    Category(AlfCategory),
}

impl fmt::Display for DifficultyBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DifficultyBin::Rooms(n) => write!(f, "{n} rooms"),
            DifficultyBin::Category(c) => f.write_str(c.label()),
        }
    }
}

/// `num / den` as an integer percent, rounded half up.
pub fn percent(num: usize, den: usize) -> Option<u32> {
    (den > 0).then(|| ((200 * num + den) / (2 * den)) as u32)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub trial_count: usize,
    pub succeed_count: usize,
    pub success_rate: Option<u32>,
    pub total_solver_errors: usize,
    pub total_solver_fixed: usize,
    pub solver_error_fix_rate: Option<u32>,
    pub total_simulation_errors: usize,
    pub total_simulation_fixed: usize,
    pub simulation_error_fix_rate: Option<u32>,
    pub total_abort_solver: usize,
    pub total_abort_simulation: usize,
    pub avg_steps_success: Option<f64>,
    pub avg_steps_failure: Option<f64>,
    /// Mean environment commands per trial.
    pub avg_actions: Option<f64>,
    pub total_superseded: usize,
    pub stalled_count: usize,
}

/// Column names, in field order.
pub const METRIC_NAMES: [&str; 16] = [
    "trial_count",
    "succeed_count",
    "success_rate",
    "total_solver_errors",
    "total_solver_fixed",
    "solver_error_fix_rate",
    "total_simulation_errors",
    "total_simulation_fixed",
    "simulation_error_fix_rate",
    "total_abort_solver",
    "total_abort_simulation",
    "avg_steps_success",
    "avg_steps_failure",
    "avg_actions",
    "total_superseded",
    "stalled_count",
];

fn mean(values: &[usize]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<usize>() as f64 / values.len() as f64)
}

fn fmt_rate(r: Option<u32>) -> String {
    r.map_or(UNDEFINED.to_string(), |v| format!("{v}%"))
}

fn fmt_avg(a: Option<f64>) -> String {
    a.map_or(UNDEFINED.to_string(), |v| format!("{v:.1}"))
}

impl AggregateMetrics {
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a TrialRecord>) -> Self {
        let mut m = AggregateMetrics::default();
        let mut steps_ok = Vec::new();
        let mut steps_fail = Vec::new();
        let mut actions = Vec::new();
        let mut solver_settled = 0;
        let mut sim_settled = 0;
        for r in records {
            m.trial_count += 1;
            if r.success {
                m.succeed_count += 1;
                steps_ok.push(r.steps_taken);
            } else {
                steps_fail.push(r.steps_taken);
            }
            actions.push(r.commands_used);
            m.stalled_count += r.stalled as usize;
            for e in &r.errors {
                let (total, fixed, aborted, settled) = match e.kind {
                    ErrorKind::Solver => (
                        &mut m.total_solver_errors,
                        &mut m.total_solver_fixed,
                        &mut m.total_abort_solver,
                        &mut solver_settled,
                    ),
                    ErrorKind::Simulation => (
                        &mut m.total_simulation_errors,
                        &mut m.total_simulation_fixed,
                        &mut m.total_abort_simulation,
                        &mut sim_settled,
                    ),
                };
                *total += 1;
                match e.resolution {
                    Resolution::Fixed => {
                        *fixed += 1;
                        *settled += 1;
                    }
                    Resolution::Aborted => {
                        *aborted += 1;
                        *settled += 1;
                    }
                    Resolution::Superseded => m.total_superseded += 1,
                }
            }
        }
        m.success_rate = percent(m.succeed_count, m.trial_count);
        m.solver_error_fix_rate = percent(m.total_solver_fixed, solver_settled);
        m.simulation_error_fix_rate = percent(m.total_simulation_fixed, sim_settled);
        m.avg_steps_success = mean(&steps_ok);
        m.avg_steps_failure = mean(&steps_fail);
        m.avg_actions = mean(&actions);
        m
    }

    /// Display strings in [`METRIC_NAMES`] order.
    pub fn cells(&self) -> Vec<String> {
        vec![
            self.trial_count.to_string(),
            self.succeed_count.to_string(),
            fmt_rate(self.success_rate),
            self.total_solver_errors.to_string(),
            self.total_solver_fixed.to_string(),
            fmt_rate(self.solver_error_fix_rate),
            self.total_simulation_errors.to_string(),
            self.total_simulation_fixed.to_string(),
            fmt_rate(self.simulation_error_fix_rate),
            self.total_abort_solver.to_string(),
            self.total_abort_simulation.to_string(),
            fmt_avg(self.avg_steps_success),
            fmt_avg(self.avg_steps_failure),
            fmt_avg(self.avg_actions),
            self.total_superseded.to_string(),
            self.stalled_count.to_string(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinMetrics {
    pub bin: String,
    pub metrics: AggregateMetrics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub overall: AggregateMetrics,
    pub bins: Vec<BinMetrics>,
}

fn record_bin(r: &TrialRecord) -> Option<DifficultyBin> {
    r.config.as_ref().map(|c| c.env.bin())
}

/// Overall metrics plus one entry per difficulty bin present in `records`.
pub fn aggregate(records: &[TrialRecord]) -> Report {
    let mut by_bin: BTreeMap<DifficultyBin, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        if let Some(b) = record_bin(r) {
            by_bin.entry(b).or_default().push(r);
        }
    }
    Report {
        overall: AggregateMetrics::from_records(records),
        bins: by_bin
            .into_iter()
            .map(|(bin, rs)| BinMetrics {
                bin: bin.to_string(),
                metrics: AggregateMetrics::from_records(rs),
            })
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Table,
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(format!("unknown report format '{s}'")),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn emit_report(report: &Report, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(report).expect("report serializes") + "\n",
        ReportFormat::Csv => {
            let mut out = format!("bin,{}\n", METRIC_NAMES.join(","));
            let rows = std::iter::once(("overall", &report.overall))
                .chain(report.bins.iter().map(|b| (b.bin.as_str(), &b.metrics)));
            for (label, m) in rows {
                let cells: Vec<String> = m.cells().iter().map(|c| csv_field(c)).collect();
                out.push_str(&format!("{},{}\n", csv_field(label), cells.join(",")));
            }
            out
        }
        ReportFormat::Table => {
            // Metrics as rows, one column per bin, like a results table.
            let mut columns: Vec<(String, Vec<String>)> = vec![("overall".to_string(), report.overall.cells())];
            columns.extend(report.bins.iter().map(|b| (b.bin.clone(), b.metrics.cells())));
            let name_width = METRIC_NAMES.iter().map(|n| n.len()).max().unwrap_or(0);
            let widths: Vec<usize> = columns
                .iter()
                .map(|(h, cells)| cells.iter().map(|c| c.chars().count()).chain([h.chars().count()]).max().unwrap_or(0))
                .collect();
            let mut out = format!("{:<name_width$}", "metric");
            for ((h, _), w) in columns.iter().zip(&widths) {
                out.push_str(&format!("  {h:>w$}"));
            }
            out.push('\n');
            for (row, name) in METRIC_NAMES.iter().enumerate() {
                out.push_str(&format!("{name:<name_width$}"));
                for ((_, cells), w) in columns.iter().zip(&widths) {
                    let pad = w - cells[row].chars().count();
                    out.push_str(&format!("  {}{}", " ".repeat(pad), cells[row]));
                }
                out.push('\n');
            }
            out
        }
    }
}
