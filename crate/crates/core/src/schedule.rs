//! Schedule trace model shared by every algorithm, plus the validator that
//! checks a trace against its workload.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::workload::{Pid, Tick, Workload};

/// How a slice came to be allocated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationKind {
    /// Ran for a full quantum and was preempted (or finished exactly at its end).
    QuantumGrant,
    /// Extra allocation right after a quantum grant, running the process to completion.
    ContinuationGrant,
    /// Ran until the process terminated.
    RunToCompletion,
}

/// One contiguous CPU allocation, `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionSlice {
    pub pid: Pid,
    pub start: Tick,
    pub end: Tick,
    pub kind: AllocationKind,
}

impl ExecutionSlice {
    pub fn duration(&self) -> Tick {
        self.end.saturating_sub(self.start)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "FCFS")]
    Fcfs,
    #[serde(rename = "SJF")]
    Sjf,
    #[serde(rename = "RR")]
    Rr,
    #[serde(rename = "OMDRRS")]
    Omdrrs,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Fcfs, Algorithm::Sjf, Algorithm::Rr, Algorithm::Omdrrs];

    /// Short machine name used on the command line.
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fcfs => "fcfs",
            Algorithm::Sjf => "sjf",
            Algorithm::Rr => "rr",
            Algorithm::Omdrrs => "omdrrs",
        }
    }

    /// Column heading used in comparison tables.
    pub fn heading(self) -> &'static str {
        match self {
            Algorithm::Fcfs => "FCFS",
            Algorithm::Sjf => "SJF",
            Algorithm::Rr => "ROUND ROBIN",
            Algorithm::Omdrrs => "DYNAMIC RR",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Fcfs => "FCFS",
            Algorithm::Sjf => "SJF",
            Algorithm::Rr => "RR",
            Algorithm::Omdrrs => "OMDRRS",
        })
    }
}

/// Parameters an algorithm ran with. `q` is the Round Robin quantum; `k` and
/// `F` are the dynamic scheduler's initial quantum and growth factor.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedulerParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Tick>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Tick>,
    #[serde(rename = "F", skip_serializing_if = "Option::is_none")]
    pub factor: Option<Tick>,
}

impl fmt::Display for SchedulerParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(q) = self.q {
            parts.push(format!("q={q}"));
        }
        if let Some(k) = self.k {
            parts.push(format!("k={k}"));
        }
        if let Some(factor) = self.factor {
            parts.push(format!("F={factor}"));
        }
        f.write_str(&parts.join(" "))
    }
}

/// Complete execution trace of one algorithm over one workload.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub algorithm: Algorithm,
    pub params: SchedulerParams,
    pub slices: Vec<ExecutionSlice>,
    pub completions: BTreeMap<Pid, Tick>,
}

impl Schedule {
    /// Builds a schedule, deriving completions from the last slice of each pid.
    pub fn from_slices(algorithm: Algorithm, params: SchedulerParams, slices: Vec<ExecutionSlice>) -> Self {
        let completions = slices.iter().map(|s| (s.pid, s.end)).collect();
        Self {
            algorithm,
            params,
            slices,
            completions,
        }
    }

    pub fn makespan(&self) -> Tick {
        self.slices.last().map_or(0, |s| s.end)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }
}

/// Number of CPU allocation events. Every slice is a dispatch, continuation
/// grants included.
pub fn dispatch_count(schedule: &Schedule) -> usize {
    schedule.slices.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    EmptySchedule,
    ZeroLength,
    Contiguity,
    UnknownPid,
    BurstConservation,
    CompletionMismatch,
    ContinuationOrder,
    Makespan,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::EmptySchedule => "empty schedule",
            ViolationKind::ZeroLength => "zero-length slice",
            ViolationKind::Contiguity => "contiguity",
            ViolationKind::UnknownPid => "unknown pid",
            ViolationKind::BurstConservation => "burst conservation",
            ViolationKind::CompletionMismatch => "completion mismatch",
            ViolationKind::ContinuationOrder => "continuation order",
            ViolationKind::Makespan => "makespan",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Index of the offending slice, when one can be pinned down.
    pub slice: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.slice {
            Some(i) => write!(f, "{} at slice {i}: {}", self.kind, self.detail),
            None => write!(f, "{}: {}", self.kind, self.detail),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Error)]
#[error("schedule is invalid: {}", .violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, slice: Option<usize>, detail: String) {
        self.violations.push(Violation { kind, slice, detail });
    }
}

/// Checks every trace invariant of `schedule` against `workload`.
pub fn validate_schedule(workload: &Workload, schedule: &Schedule) -> ValidationReport {
    let mut report = ValidationReport::default();
    if schedule.slices.is_empty() {
        report.push(ViolationKind::EmptySchedule, None, "no slices".into());
    }

    let mut cursor: Tick = 0;
    let mut served: HashMap<Pid, Tick> = HashMap::new();
    let mut last_end: HashMap<Pid, Tick> = HashMap::new();
    for (i, slice) in schedule.slices.iter().enumerate() {
        if slice.end <= slice.start {
            report.push(
                ViolationKind::ZeroLength,
                Some(i),
                format!("{} runs [{}, {})", slice.pid, slice.start, slice.end),
            );
        }
        if slice.start != cursor {
            report.push(
                ViolationKind::Contiguity,
                Some(i),
                format!("starts at {} but previous slice ended at {cursor}", slice.start),
            );
        }
        cursor = slice.end;

        if workload.burst_of(slice.pid).is_none() {
            report.push(ViolationKind::UnknownPid, Some(i), format!("{} is not in the workload", slice.pid));
        }

        if slice.kind == AllocationKind::ContinuationGrant {
            let follows_quantum = i > 0 && {
                let prev = &schedule.slices[i - 1];
                prev.pid == slice.pid && prev.kind == AllocationKind::QuantumGrant && prev.end == slice.start
            };
            if !follows_quantum {
                report.push(
                    ViolationKind::ContinuationOrder,
                    Some(i),
                    format!("continuation for {} does not directly follow its quantum grant", slice.pid),
                );
            }
        }

        *served.entry(slice.pid).or_default() += slice.duration();
        last_end.insert(slice.pid, slice.end);
    }

    for p in workload.processes() {
        let got = served.get(&p.pid).copied().unwrap_or(0);
        if got != p.burst {
            report.push(
                ViolationKind::BurstConservation,
                None,
                format!("{} received {got} ticks, burst is {}", p.pid, p.burst),
            );
        }
        match (schedule.completions.get(&p.pid), last_end.get(&p.pid)) {
            (Some(c), Some(e)) if c == e => {}
            (c, e) => report.push(
                ViolationKind::CompletionMismatch,
                None,
                format!("{} completion {:?}, final slice ends at {:?}", p.pid, c, e),
            ),
        }
    }
    for pid in schedule.completions.keys() {
        if workload.burst_of(*pid).is_none() {
            report.push(ViolationKind::UnknownPid, None, format!("completion recorded for unknown {pid}"));
        }
    }

    let total = workload.total_burst();
    let max_completion = schedule.completions.values().copied().max().unwrap_or(0);
    if schedule.makespan() != total || max_completion != total {
        report.push(
            ViolationKind::Makespan,
            None,
            format!(
                "last slice ends at {}, latest completion {max_completion}, total burst {total}",
                schedule.makespan()
            ),
        );
    }
    report
}
