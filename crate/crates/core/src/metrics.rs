//! Per-process and aggregate performance indices, comparison tables and the
//! ASCII Gantt chart.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::schedule::{dispatch_count, validate_schedule, AllocationKind, Algorithm, Schedule, SchedulerParams, ValidationReport};
use crate::workload::{Pid, Tick, Workload};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error(transparent)]
    InvalidSchedule(#[from] ValidationReport),
    #[error("reports were computed from different workloads")]
    MixedWorkloads,
    #[error("nothing to compare")]
    NoReports,
}

/// Exact mean `total / count`, rounded half-up to one decimal only for display.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Average {
    pub total: u64,
    pub count: u64,
}

impl Average {
    pub fn new(total: u64, count: u64) -> Self {
        assert!(count > 0, "average over zero items");
        Self { total, count }
    }

    /// Value in tenths, rounded half-up.
    pub fn tenths(&self) -> u64 {
        (20 * self.total + self.count) / (2 * self.count)
    }

    pub fn as_f64(&self) -> f64 {
        self.total as f64 / self.count as f64
    }
}

impl PartialOrd for Average {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Average {
    fn cmp(&self, other: &Self) -> Ordering {
        (u128::from(self.total) * u128::from(other.count)).cmp(&(u128::from(other.total) * u128::from(self.count)))
    }
}

/// One decimal place; a zero tenth is dropped (`48`, `32.6`).
impl fmt::Display for Average {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tenths = self.tenths();
        if tenths.is_multiple_of(10) {
            write!(f, "{}", tenths / 10)
        } else {
            write!(f, "{}.{}", tenths / 10, tenths % 10)
        }
    }
}

impl Serialize for Average {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Average", 3)?;
        s.serialize_field("total", &self.total)?;
        s.serialize_field("count", &self.count)?;
        s.serialize_field("rounded", &self.to_string())?;
        s.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProcessMetrics {
    pub pid: Pid,
    pub burst: Tick,
    pub turnaround: Tick,
    pub waiting: Tick,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetricsReport {
    pub algorithm: Algorithm,
    pub params: SchedulerParams,
    /// Sorted by pid.
    pub per_process: Vec<ProcessMetrics>,
    pub avg_turnaround: Average,
    pub avg_waiting: Average,
    pub context_switches: usize,
}

impl MetricsReport {
    pub fn process(&self, pid: Pid) -> Option<&ProcessMetrics> {
        self.per_process.iter().find(|m| m.pid == pid)
    }

    /// `P1  BT  TAT  WT` table followed by the aggregate lines.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let params = self.params.to_string();
        if params.is_empty() {
            out.push_str(&format!("{}\n", self.algorithm));
        } else {
            out.push_str(&format!("{} ({params})\n", self.algorithm));
        }
        out.push_str(&format!("{:<6}{:>6}{:>6}{:>6}\n", "PID", "BT", "TAT", "WT"));
        for m in &self.per_process {
            out.push_str(&format!("{:<6}{:>6}{:>6}{:>6}\n", m.pid.to_string(), m.burst, m.turnaround, m.waiting));
        }
        out.push_str(&format!("ATT {}\n", self.avg_turnaround));
        out.push_str(&format!("AWT {}\n", self.avg_waiting));
        out.push_str(&format!("CS  {}\n", self.context_switches));
        out
    }

    /// `pid,bt,tat,wt` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pid,bt,tat,wt\n");
        for m in &self.per_process {
            out.push_str(&format!("{},{},{},{}\n", m.pid.0, m.burst, m.turnaround, m.waiting));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Turnaround and waiting time per process (arrival is 0 for everyone), their
/// exact averages and the dispatch count.
pub fn compute_metrics(workload: &Workload, schedule: &Schedule) -> Result<MetricsReport, MetricsError> {
    let report = validate_schedule(workload, schedule);
    if !report.is_ok() {
        return Err(MetricsError::InvalidSchedule(report));
    }
    let mut per_process: Vec<ProcessMetrics> = workload
        .processes()
        .iter()
        .map(|p| {
            let turnaround = schedule.completions[&p.pid];
            ProcessMetrics {
                pid: p.pid,
                burst: p.burst,
                turnaround,
                waiting: turnaround - p.burst,
            }
        })
        .collect();
    per_process.sort_by_key(|m| m.pid);
    let n = per_process.len() as u64;
    Ok(MetricsReport {
        algorithm: schedule.algorithm,
        params: schedule.params,
        avg_turnaround: Average::new(per_process.iter().map(|m| m.turnaround).sum(), n),
        avg_waiting: Average::new(per_process.iter().map(|m| m.waiting).sum(), n),
        per_process,
        context_switches: dispatch_count(schedule),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    ContextSwitch,
    TurnaroundTime,
    WaitingTime,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [Criterion::ContextSwitch, Criterion::TurnaroundTime, Criterion::WaitingTime];

    pub fn label(self) -> &'static str {
        match self {
            Criterion::ContextSwitch => "CONTEXT SWITCH",
            Criterion::TurnaroundTime => "TURNAROUND TIME",
            Criterion::WaitingTime => "WAITING TIME",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComparisonCell {
    pub value: String,
    pub minimal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComparisonRow {
    pub criterion: Criterion,
    pub cells: Vec<ComparisonCell>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComparisonColumn {
    pub algorithm: Algorithm,
    pub params: SchedulerParams,
}

/// Criteria-by-algorithm matrix: rows CONTEXT SWITCH, TURNAROUND TIME,
/// WAITING TIME, one column per report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub columns: Vec<ComparisonColumn>,
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn cell(&self, criterion: Criterion, algorithm: Algorithm) -> Option<&ComparisonCell> {
        let col = self.columns.iter().position(|c| c.algorithm == algorithm)?;
        self.rows.iter().find(|r| r.criterion == criterion).map(|r| &r.cells[col])
    }

    /// Fixed-width table; minima are marked with `*`.
    pub fn render_table(&self) -> String {
        let mut header = vec!["SCH. CRITERIA".to_string()];
        header.extend(self.columns.iter().map(|c| c.algorithm.heading().to_string()));
        let mut lines = vec![header];
        for row in &self.rows {
            let mut line = vec![row.criterion.label().to_string()];
            line.extend(row.cells.iter().map(|c| if c.minimal { format!("{}*", c.value) } else { c.value.clone() }));
            lines.push(line);
        }
        let widths: Vec<usize> = (0..lines[0].len())
            .map(|i| lines.iter().map(|l| l[i].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for line in lines {
            let mut text = format!("{:<w$}", line[0], w = widths[0]);
            for (i, cell) in line.iter().enumerate().skip(1) {
                text.push_str(&format!("  {:>w$}", cell, w = widths[i]));
            }
            out.push_str(text.trim_end());
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("criterion");
        for c in &self.columns {
            out.push(',');
            out.push_str(c.algorithm.heading());
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(row.criterion.label());
            for c in &row.cells {
                out.push(',');
                out.push_str(&c.value);
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("comparison serializes")
    }
}

fn mark_minima<T: Ord + ToString>(values: Vec<T>) -> Vec<ComparisonCell> {
    let min = values.iter().min();
    let cells = values
        .iter()
        .map(|v| ComparisonCell {
            value: v.to_string(),
            minimal: Some(v) == min,
        })
        .collect();
    cells
}

/// Builds the comparison matrix. All reports must come from the same
/// workload (same pids with the same bursts).
pub fn compare(reports: &[MetricsReport]) -> Result<Comparison, MetricsError> {
    let first = reports.first().ok_or(MetricsError::NoReports)?;
    let fingerprint = |r: &MetricsReport| r.per_process.iter().map(|m| (m.pid, m.burst)).collect::<Vec<_>>();
    let expected = fingerprint(first);
    if reports.iter().any(|r| fingerprint(r) != expected) {
        return Err(MetricsError::MixedWorkloads);
    }
    let rows = Criterion::ALL
        .into_iter()
        .map(|criterion| {
            let cells = match criterion {
                Criterion::ContextSwitch => mark_minima(reports.iter().map(|r| r.context_switches).collect()),
                Criterion::TurnaroundTime => mark_minima(reports.iter().map(|r| r.avg_turnaround).collect()),
                Criterion::WaitingTime => mark_minima(reports.iter().map(|r| r.avg_waiting).collect()),
            };
            ComparisonRow { criterion, cells }
        })
        .collect();
    Ok(Comparison {
        columns: reports
            .iter()
            .map(|r| ComparisonColumn {
                algorithm: r.algorithm,
                params: r.params,
            })
            .collect(),
        rows,
    })
}

pub const MIN_GANTT_WIDTH: usize = 20;

/// One lane of the chart: a slice, or a quantum grant with its continuation.
struct Segment {
    pid: Pid,
    /// Start tick of every slice in the segment, then the end tick.
    ticks: Vec<Tick>,
}

fn segments(schedule: &Schedule) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    for s in &schedule.slices {
        match out.last_mut() {
            Some(seg) if s.kind == AllocationKind::ContinuationGrant && seg.pid == s.pid => {
                seg.ticks.push(s.end);
            }
            _ => out.push(Segment {
                pid: s.pid,
                ticks: vec![s.start, s.end],
            }),
        }
    }
    out
}

/// Renders a one-lane ASCII Gantt chart roughly `width` columns wide.
///
/// Each visual segment is one process's allocation; a continuation grant is
/// drawn inside its quantum grant's segment behind a `:` divider instead of a
/// `|`. The tick line below carries every slice boundary. Segments are never
/// narrower than their labels, so very dense traces overflow `width`.
pub fn render_gantt(schedule: &Schedule, width: usize) -> String {
    let width = width.max(MIN_GANTT_WIDTH);
    let total = schedule.makespan().max(1);
    let segs = segments(schedule);

    // Columns available for cell interiors, after one divider per slice plus the closing bar.
    let dividers = schedule.slices.len() + 1;
    let budget = width.saturating_sub(dividers) as u128;

    let mut bar = String::new();
    let mut axis = String::new();
    for seg in &segs {
        let label = seg.pid.to_string();
        let cells = seg.ticks.len() - 1;
        for i in 0..cells {
            let (start, end) = (seg.ticks[i], seg.ticks[i + 1]);
            let proportional = (u128::from(end - start) * budget / u128::from(total)) as usize;
            let tick_label = start.to_string();
            let mut min = tick_label.len();
            if i == 0 {
                min = min.max(label.len() + 2);
            }
            let inner = proportional.max(min).max(1);

            bar.push(if i == 0 { '|' } else { ':' });
            let text = if i == 0 { label.as_str() } else { "" };
            let pad = inner - text.len();
            bar.push_str(&" ".repeat(pad / 2));
            bar.push_str(text);
            bar.push_str(&" ".repeat(pad - pad / 2));

            axis.push_str(&tick_label);
            axis.push_str(&" ".repeat(inner + 1 - tick_label.len()));
        }
    }
    bar.push('|');
    axis.push_str(&schedule.makespan().to_string());

    format!("{}\n{}\n", bar, axis.trim_end())
}
