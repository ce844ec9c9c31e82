//! Process and workload definitions, file ingestion and the seeded generator.
//!
//! All processes in a workload arrive at tick 0. The order in which processes
//! were submitted is kept exactly: it is the FCFS order and the tie-break
//! order for every other algorithm.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Simulation time, in integer ticks.
pub type Tick = u64;

/// Process identifier. Positive and unique within a workload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pid(pub u32);

impl fmt::Display for Pid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkloadError {
    #[error("row {row}: malformed input: {message}")]
    Malformed { row: usize, message: String },
    #[error("row {row}: duplicate pid {pid}")]
    DuplicatePid { row: usize, pid: u32 },
    #[error("row {row}: burst of pid {pid} must be at least 1 tick (got {burst})")]
    NonPositiveBurst { row: usize, pid: i64, burst: i64 },
    #[error("row {row}: pid must be a positive integer (got {pid})")]
    InvalidPid { row: usize, pid: i64 },
    #[error("workload contains no processes")]
    EmptyWorkload,
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
}

/// A submitted job: identifier plus CPU burst in ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub pid: Pid,
    pub burst: Tick,
}

impl ProcessSpec {
    pub fn new(pid: u32, burst: Tick) -> Result<Self, WorkloadError> {
        if pid == 0 {
            return Err(WorkloadError::InvalidPid { row: 0, pid: 0 });
        }
        if burst == 0 {
            return Err(WorkloadError::NonPositiveBurst {
                row: 0,
                pid: pid.into(),
                burst: 0,
            });
        }
        Ok(Self { pid: Pid(pid), burst })
    }
}

/// Where a workload came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Manual,
    Generated { seed: u64 },
}

/// Ordered, non-empty collection of processes with unique pids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Workload {
    processes: Vec<ProcessSpec>,
    origin: Origin,
}

impl Workload {
    pub fn new(processes: Vec<ProcessSpec>, origin: Origin) -> Result<Self, WorkloadError> {
        if processes.is_empty() {
            return Err(WorkloadError::EmptyWorkload);
        }
        let mut seen = HashSet::with_capacity(processes.len());
        for (idx, p) in processes.iter().enumerate() {
            let row = idx + 1;
            if p.pid.0 == 0 {
                return Err(WorkloadError::InvalidPid { row, pid: 0 });
            }
            if p.burst == 0 {
                return Err(WorkloadError::NonPositiveBurst {
                    row,
                    pid: p.pid.0.into(),
                    burst: 0,
                });
            }
            if !seen.insert(p.pid) {
                return Err(WorkloadError::DuplicatePid { row, pid: p.pid.0 });
            }
        }
        Ok(Self { processes, origin })
    }

    /// Manual workload with pids `1..=n` assigned in the order given.
    pub fn from_bursts(bursts: &[Tick]) -> Result<Self, WorkloadError> {
        let processes = bursts
            .iter()
            .enumerate()
            .map(|(i, &burst)| ProcessSpec {
                pid: Pid(i as u32 + 1),
                burst,
            })
            .collect();
        Self::new(processes, Origin::Manual)
    }

    pub fn processes(&self) -> &[ProcessSpec] {
        &self.processes
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.processes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.processes.is_empty()
    }

    pub fn burst_of(&self, pid: Pid) -> Option<Tick> {
        self.processes.iter().find(|p| p.pid == pid).map(|p| p.burst)
    }

    pub fn total_burst(&self) -> Tick {
        self.processes.iter().map(|p| p.burst).sum()
    }

    pub fn max_burst(&self) -> Tick {
        self.processes.iter().map(|p| p.burst).max().unwrap_or(0)
    }

    /// Serializes as CSV with a `pid,burst` header and LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pid,burst\n");
        for p in &self.processes {
            out.push_str(&format!("{},{}\n", p.pid.0, p.burst));
        }
        out
    }

    /// Serializes as a JSON array of `{"pid": n, "burst": n}` objects.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.processes).expect("process list serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Csv,
    Json,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown workload format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRow {
    pid: i64,
    burst: i64,
}

/// Parses a manually entered workload. Rows are numbered from 1 (the CSV
/// header is not counted).
pub fn parse_workload(text: &str, format: InputFormat) -> Result<Workload, WorkloadError> {
    let rows = match format {
        InputFormat::Csv => parse_csv_rows(text)?,
        InputFormat::Json => parse_json_rows(text)?,
    };
    if rows.is_empty() {
        return Err(WorkloadError::EmptyWorkload);
    }
    let mut seen = HashSet::with_capacity(rows.len());
    let mut processes = Vec::with_capacity(rows.len());
    for (idx, raw) in rows.into_iter().enumerate() {
        let row = idx + 1;
        let pid = u32::try_from(raw.pid)
            .ok()
            .filter(|&p| p > 0)
            .ok_or(WorkloadError::InvalidPid { row, pid: raw.pid })?;
        if raw.burst < 1 {
            return Err(WorkloadError::NonPositiveBurst {
                row,
                pid: raw.pid,
                burst: raw.burst,
            });
        }
        if !seen.insert(pid) {
            return Err(WorkloadError::DuplicatePid { row, pid });
        }
        processes.push(ProcessSpec {
            pid: Pid(pid),
            burst: raw.burst as Tick,
        });
    }
    Workload::new(processes, Origin::Manual)
}

fn parse_csv_rows(text: &str) -> Result<Vec<RawRow>, WorkloadError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| WorkloadError::Malformed {
            row: 0,
            message: e.to_string(),
        })?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["pid", "burst"] {
        return Err(WorkloadError::Malformed {
            row: 0,
            message: format!("expected header `pid,burst`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    reader
        .deserialize::<RawRow>()
        .enumerate()
        .map(|(idx, rec)| {
            rec.map_err(|e| WorkloadError::Malformed {
                row: idx + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

fn parse_json_rows(text: &str) -> Result<Vec<RawRow>, WorkloadError> {
    let values: Vec<serde_json::Value> =
        serde_json::from_str(text).map_err(|e| WorkloadError::Malformed {
            row: 0,
            message: e.to_string(),
        })?;
    values
        .into_iter()
        .enumerate()
        .map(|(idx, v)| {
            serde_json::from_value(v).map_err(|e| WorkloadError::Malformed {
                row: idx + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub const DEFAULT_BURST_MIN: Tick = 4;
pub const DEFAULT_BURST_MAX: Tick = 30;

/// Parameters for the synthetic workload generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub count: usize,
    pub burst_min: Tick,
    pub burst_max: Tick,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(count: usize, seed: u64) -> Self {
        Self {
            count,
            burst_min: DEFAULT_BURST_MIN,
            burst_max: DEFAULT_BURST_MAX,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), WorkloadError> {
        if self.count == 0 {
            return Err(WorkloadError::InvalidConfig("count must be at least 1".into()));
        }
        if u32::try_from(self.count).is_err() {
            return Err(WorkloadError::InvalidConfig("count exceeds the pid range".into()));
        }
        if self.burst_min == 0 {
            return Err(WorkloadError::InvalidConfig("min burst must be at least 1".into()));
        }
        if self.burst_min > self.burst_max {
            return Err(WorkloadError::InvalidConfig(format!(
                "min burst {} exceeds max burst {}",
                self.burst_min, self.burst_max
            )));
        }
        Ok(())
    }
}

impl FromStr for GeneratorConfig {
    type Err = WorkloadError;

    /// Parses `count=N,min=N,max=N,seed=N`. `min`/`max` default to 4/30 and
    /// `seed` to 0.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut config = GeneratorConfig::new(0, 0);
        let mut have_count = false;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| WorkloadError::InvalidConfig(format!("expected key=value, got `{part}`")))?;
            let bad = |_| WorkloadError::InvalidConfig(format!("`{key}` needs a non-negative integer, got `{value}`"));
            match key.trim() {
                "count" => {
                    config.count = value.trim().parse().map_err(bad)?;
                    have_count = true;
                }
                "min" => config.burst_min = value.trim().parse().map_err(bad)?,
                "max" => config.burst_max = value.trim().parse().map_err(bad)?,
                "seed" => config.seed = value.trim().parse().map_err(bad)?,
                other => {
                    return Err(WorkloadError::InvalidConfig(format!("unknown generator key `{other}`")))
                }
            }
        }
        if !have_count {
            return Err(WorkloadError::InvalidConfig("missing `count`".into()));
        }
        config.validate()?;
        Ok(config)
    }
}

/// Generates `count` processes with pids `1..=count` and bursts drawn
/// uniformly from `[burst_min, burst_max]`.
///
/// The stream is ChaCha8 seeded via `seed_from_u64`, so a given config yields
/// the same workload on every run of the same build.
pub fn generate_workload(config: &GeneratorConfig) -> Result<Workload, WorkloadError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let processes = (1..=config.count as u32)
        .map(|pid| ProcessSpec {
            pid: Pid(pid),
            burst: rng.random_range(config.burst_min..=config.burst_max),
        })
        .collect();
    Workload::new(processes, Origin::Generated { seed: config.seed })
}
