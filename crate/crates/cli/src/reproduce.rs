//! Re-runs the four schedulers on the reference workloads and diffs every
//! cell against the embedded reference tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use clap::ValueEnum;
use schedsim_core::{compute_metrics, MetricsReport, Pid, Policy, Tick, Workload};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableId {
    T1,
    T2,
    T3,
    T4,
}

impl TableId {
    fn source(self) -> &'static str {
        match self {
            TableId::T1 => include_str!("../data/table1.toml"),
            TableId::T2 => include_str!("../data/table2.toml"),
            TableId::T3 => include_str!("../data/table3.toml"),
            TableId::T4 => include_str!("../data/table4.toml"),
        }
    }

    pub fn load(self) -> ReferenceTable {
        toml::from_str(self.source()).expect("embedded reference table parses")
    }
}

/// Column keys, in display order.
const COLUMNS: [&str; 4] = ["fcfs", "sjf", "rr", "dynamic"];

fn heading(column: &str) -> &'static str {
    match column {
        "fcfs" => "FCFS",
        "sjf" => "SJF",
        "rr" => "RR",
        _ => "DYNAMIC RR",
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessRow {
    pub pid: u32,
    pub fcfs: [Tick; 2],
    pub sjf: [Tick; 2],
    pub rr: [Tick; 2],
    pub dynamic: [Tick; 2],
}

impl ProcessRow {
    fn column(&self, key: &str) -> [Tick; 2] {
        match key {
            "fcfs" => self.fcfs,
            "sjf" => self.sjf,
            "rr" => self.rr,
            _ => self.dynamic,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregateColumn {
    pub cs: usize,
    pub att: String,
    pub awt: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Erratum {
    pub cell: String,
    pub note: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceTable {
    pub title: String,
    pub bursts: Vec<Tick>,
    pub q: Tick,
    pub k: Tick,
    pub factor: Tick,
    #[serde(default)]
    pub process: Vec<ProcessRow>,
    #[serde(default)]
    pub aggregates: BTreeMap<String, AggregateColumn>,
    #[serde(default)]
    pub errata: Vec<Erratum>,
}

impl ReferenceTable {
    pub fn policies(&self) -> [Policy; 4] {
        [
            Policy::Fcfs,
            Policy::Sjf,
            Policy::Rr { q: self.q },
            Policy::Omdrrs { k: self.k, factor: self.factor },
        ]
    }

    /// Published cells keyed `column/row/field` (per-process tables) or
    /// `column/field` (aggregate tables).
    fn published_cells(&self) -> Vec<(String, String)> {
        let mut cells = Vec::new();
        for col in COLUMNS {
            for row in &self.process {
                let [tat, wt] = row.column(col);
                cells.push((format!("{col}/P{}/TAT", row.pid), tat.to_string()));
                cells.push((format!("{col}/P{}/WT", row.pid), wt.to_string()));
            }
            if let Some(agg) = self.aggregates.get(col) {
                cells.push((format!("{col}/CS"), agg.cs.to_string()));
                cells.push((format!("{col}/ATT"), agg.att.clone()));
                cells.push((format!("{col}/AWT"), agg.awt.clone()));
            }
        }
        cells
    }
}

fn computed_cell(reports: &BTreeMap<&str, MetricsReport>, key: &str) -> Option<String> {
    let parts: Vec<&str> = key.split('/').collect();
    let report = reports.get(parts[0])?;
    match parts[1..] {
        [row, field] => {
            let pid: u32 = row.strip_prefix('P')?.parse().ok()?;
            let m = report.process(Pid(pid))?;
            Some(match field {
                "TAT" => m.turnaround.to_string(),
                "WT" => m.waiting.to_string(),
                _ => return None,
            })
        }
        ["CS"] => Some(report.context_switches.to_string()),
        ["ATT"] => Some(report.avg_turnaround.to_string()),
        ["AWT"] => Some(report.avg_waiting.to_string()),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellDiff {
    pub cell: String,
    pub computed: String,
    pub published: String,
    pub erratum: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Reproduction {
    pub table: String,
    pub q: Tick,
    pub k: Tick,
    pub factor: Tick,
    pub cells_checked: usize,
    pub diffs: Vec<CellDiff>,
    #[serde(skip)]
    pub reports: Vec<MetricsReport>,
    #[serde(skip)]
    reference: Option<ReferenceTable>,
}

impl Reproduction {
    /// Mismatches not covered by the errata list.
    pub fn unexpected(&self) -> impl Iterator<Item = &CellDiff> {
        self.diffs.iter().filter(|d| d.erratum.is_none())
    }

    pub fn is_clean(&self) -> bool {
        self.unexpected().next().is_none()
    }

    pub fn render_table(&self) -> String {
        let reference = self.reference.as_ref().expect("reference kept");
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} (RR q={}, DYNAMIC RR k={} F={})",
            self.table, self.q, self.k, self.factor
        );
        if !reference.process.is_empty() {
            for (label, published) in [("computed", false), ("published", true)] {
                let _ = writeln!(out, "\n{label}:");
                let mut header = format!("{:<5}{:>5}", "PID", "BT");
                for col in COLUMNS {
                    header.push_str(&format!(" |{:>15}{:>5}", format!("{} TAT", heading(col)), "WT"));
                }
                let _ = writeln!(out, "{}", header.trim_end());
                for (row, &burst) in reference.process.iter().zip(&reference.bursts) {
                    let mut line = format!("{:<5}{:>5}", format!("P{}", row.pid), burst);
                    for (col, report) in COLUMNS.iter().zip(&self.reports) {
                        let [tat, wt] = if published {
                            row.column(col)
                        } else {
                            let m = report.process(Pid(row.pid)).expect("pid present");
                            [m.turnaround, m.waiting]
                        };
                        line.push_str(&format!(" |{tat:>15}{wt:>5}"));
                    }
                    let _ = writeln!(out, "{line}");
                }
            }
        }
        if !reference.aggregates.is_empty() {
            for (label, published) in [("computed", false), ("published", true)] {
                let _ = writeln!(out, "\n{label}:");
                let mut header = format!("{:<16}", "SCH. CRITERIA");
                for col in COLUMNS {
                    header.push_str(&format!("{:>12}", heading(col)));
                }
                let _ = writeln!(out, "{header}");
                for (name, field) in [("CONTEXT SWITCH", 0), ("TURNAROUND TIME", 1), ("WAITING TIME", 2)] {
                    let mut line = format!("{name:<16}");
                    for (col, report) in COLUMNS.iter().zip(&self.reports) {
                        let value = if published {
                            let a = &reference.aggregates[*col];
                            [a.cs.to_string(), a.att.clone(), a.awt.clone()][field].clone()
                        } else {
                            [
                                report.context_switches.to_string(),
                                report.avg_turnaround.to_string(),
                                report.avg_waiting.to_string(),
                            ][field]
                                .clone()
                        };
                        line.push_str(&format!("{value:>12}"));
                    }
                    let _ = writeln!(out, "{line}");
                }
            }
        }
        let _ = writeln!(out, "\ndiff ({} cells checked):", self.cells_checked);
        if self.diffs.is_empty() {
            let _ = writeln!(out, "  none");
        }
        for d in &self.diffs {
            let tag = match &d.erratum {
                Some(note) => format!("erratum: {note}"),
                None => "MISMATCH".to_string(),
            };
            let _ = writeln!(out, "  {}: computed {} vs published {} [{}]", d.cell, d.computed, d.published, tag);
        }
        let unexpected = self.unexpected().count();
        if unexpected == 0 {
            let _ = writeln!(out, "result: ok");
        } else {
            let _ = writeln!(out, "result: {unexpected} unexpected mismatch(es)");
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("cell,computed,published,erratum\n");
        for d in &self.diffs {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                d.cell,
                d.computed,
                d.published,
                d.erratum.as_deref().map_or("no", |_| "yes")
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reproduction serializes")
    }
}

pub fn reproduce(id: TableId) -> Result<Reproduction, String> {
    let reference = id.load();
    let workload = Workload::from_bursts(&reference.bursts).map_err(|e| e.to_string())?;
    let mut reports = Vec::new();
    for policy in reference.policies() {
        let schedule = policy.run(&workload).map_err(|e| e.to_string())?;
        reports.push(compute_metrics(&workload, &schedule).map_err(|e| e.to_string())?);
    }
    let by_column: BTreeMap<&str, MetricsReport> = COLUMNS.iter().copied().zip(reports.iter().cloned()).collect();
    let errata: BTreeMap<&str, &str> = reference.errata.iter().map(|e| (e.cell.as_str(), e.note.as_str())).collect();

    let published = reference.published_cells();
    let mut diffs = Vec::new();
    let mut seen = BTreeSet::new();
    for (cell, expected) in &published {
        seen.insert(cell.as_str());
        let computed = computed_cell(&by_column, cell).ok_or_else(|| format!("reference cell {cell} has no computed counterpart"))?;
        if &computed != expected {
            diffs.push(CellDiff {
                cell: cell.clone(),
                computed,
                published: expected.clone(),
                erratum: errata.get(cell.as_str()).map(|n| n.to_string()),
            });
        }
    }
    if let Some(orphan) = errata.keys().find(|k| !seen.contains(*k)) {
        return Err(format!("erratum {orphan} names no reference cell"));
    }
    Ok(Reproduction {
        table: reference.title.clone(),
        q: reference.q,
        k: reference.k,
        factor: reference.factor,
        cells_checked: published.len(),
        diffs,
        reports,
        reference: Some(reference),
    })
}
