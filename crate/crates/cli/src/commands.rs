use std::fs;
use std::path::Path;

use schedsim_core::algorithms::draw_quantum;
use schedsim_core::{
    compare, compute_metrics, generate_workload, parse_workload, render_gantt, GeneratorConfig, InputFormat,
    MetricsError, MetricsReport, Origin, Policy, Schedule, Workload,
};
use serde::Serialize;
use thiserror::Error;

use crate::reproduce::{reproduce, TableId};
use crate::{AlgoChoice, FileFormat, GenerateArgs, OutputFormat, SchedArgs, SourceArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Invariant(String),
    /// Reference reproduction found unexpected mismatches; the rendered
    /// comparison is still printed.
    #[error("{count} cell(s) differ from the reference table")]
    Mismatch { count: usize, output: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Invariant(_) | CliError::Mismatch { .. } => 1,
        }
    }

    pub fn output(&self) -> Option<&str> {
        match self {
            CliError::Mismatch { output, .. } => Some(output),
            _ => None,
        }
    }
}

fn load_workload(source: &SourceArgs) -> Result<Workload, CliError> {
    if let Some(spec) = &source.generate {
        let config: GeneratorConfig = spec.parse().map_err(|e| CliError::Input(format!("--generate: {e}")))?;
        return generate_workload(&config).map_err(|e| CliError::Input(format!("--generate: {e}")));
    }
    let path = source
        .workload
        .as_deref()
        .ok_or_else(|| CliError::Input("one of --workload or --generate is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("--workload {}: {e}", path.display())))?;
    let format = match source.input_format {
        Some(FileFormat::Json) => InputFormat::Json,
        Some(FileFormat::Csv) => InputFormat::Csv,
        None if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) => InputFormat::Json,
        None => InputFormat::Csv,
    };
    parse_workload(&text, format).map_err(|e| CliError::Input(format!("--workload {}: {e}", path.display())))
}

/// Resolves the policies to run, drawing quanta from `--quantum-seed` where
/// `--q`/`--k` are missing.
fn policies(algo: AlgoChoice, sched: &SchedArgs, workload: &Workload) -> Result<Vec<Policy>, CliError> {
    let needs_rr = matches!(algo, AlgoChoice::Rr | AlgoChoice::All);
    let needs_dynamic = matches!(algo, AlgoChoice::Omdrrs | AlgoChoice::All);
    let q = match (sched.q, sched.quantum_seed) {
        (Some(q), _) => Some(q),
        (None, Some(seed)) => Some(draw_quantum(workload, seed)),
        (None, None) if needs_rr => {
            return Err(CliError::Input("--q is required for rr (or pass --quantum-seed)".into()))
        }
        _ => None,
    };
    let k = match (sched.k, sched.quantum_seed) {
        (Some(k), _) => Some(k),
        (None, Some(seed)) => Some(draw_quantum(workload, seed.wrapping_add(1))),
        (None, None) if needs_dynamic => {
            return Err(CliError::Input("--k is required for omdrrs (or pass --quantum-seed)".into()))
        }
        _ => None,
    };
    if needs_rr && q == Some(0) {
        return Err(CliError::Input("--q must be at least 1".into()));
    }
    if needs_dynamic && k == Some(0) {
        return Err(CliError::Input("--k must be at least 1".into()));
    }
    if needs_dynamic && sched.factor < 2 {
        return Err(CliError::Input(format!("--F must be at least 2 (got {})", sched.factor)));
    }
    let rr = || Policy::Rr { q: q.expect("checked") };
    let dynamic = || Policy::Omdrrs {
        k: k.expect("checked"),
        factor: sched.factor,
    };
    Ok(match algo {
        AlgoChoice::Fcfs => vec![Policy::Fcfs],
        AlgoChoice::Sjf => vec![Policy::Sjf],
        AlgoChoice::Rr => vec![rr()],
        AlgoChoice::Omdrrs => vec![dynamic()],
        AlgoChoice::All => vec![Policy::Fcfs, Policy::Sjf, rr(), dynamic()],
    })
}

#[derive(Serialize)]
struct RunExport<'a> {
    workload: &'a Workload,
    quantum_seed: Option<u64>,
    runs: Vec<RunEntry<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<schedsim_core::Comparison>,
}

#[derive(Serialize)]
struct RunEntry<'a> {
    report: &'a MetricsReport,
    schedule: &'a Schedule,
}

fn describe(workload: &Workload) -> String {
    let n = workload.len();
    let noun = if n == 1 { "process" } else { "processes" };
    match workload.origin() {
        Origin::Manual => format!("{n} {noun}, manual entry"),
        Origin::Generated { seed } => format!("{n} {noun}, generated with seed {seed}"),
    }
}

pub fn cmd_run(algo: AlgoChoice, source: &SourceArgs, sched: &SchedArgs) -> Result<String, CliError> {
    let workload = load_workload(source)?;
    let policies = policies(algo, sched, &workload)?;

    // Runs share only the immutable workload.
    let results: Vec<Result<(Schedule, MetricsReport), CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = policies
            .iter()
            .map(|policy| {
                let workload = &workload;
                scope.spawn(move || {
                    let schedule = policy.run(workload).map_err(|e| CliError::Input(e.to_string()))?;
                    let report = compute_metrics(workload, &schedule).map_err(|e| match e {
                        MetricsError::InvalidSchedule(v) => CliError::Invariant(format!("{policy}: {v}")),
                        other => CliError::Invariant(other.to_string()),
                    })?;
                    Ok((schedule, report))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("scheduler thread")).collect()
    });
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let reports: Vec<MetricsReport> = runs.iter().map(|(_, r)| r.clone()).collect();
    let comparison = if runs.len() > 1 {
        Some(compare(&reports).map_err(|e| CliError::Invariant(e.to_string()))?)
    } else {
        None
    };

    Ok(match sched.format {
        OutputFormat::Table => {
            let mut out = format!("workload: {}\n", describe(&workload));
            if let Some(seed) = sched.quantum_seed {
                out.push_str(&format!("quantum seed: {seed}\n"));
            }
            for (schedule, report) in &runs {
                out.push('\n');
                out.push_str(&report.render_table());
                if sched.gantt {
                    out.push_str(&render_gantt(schedule, sched.width));
                }
            }
            if let Some(cmp) = &comparison {
                out.push('\n');
                out.push_str(&cmp.render_table());
            }
            out
        }
        OutputFormat::Csv => {
            let mut out = String::new();
            if let Origin::Generated { seed } = workload.origin() {
                out.push_str(&format!("# generated workload, seed {seed}\n"));
            }
            if runs.len() == 1 {
                out.push_str(&runs[0].1.to_csv());
            } else {
                out.push_str("algorithm,pid,bt,tat,wt\n");
                for (_, report) in &runs {
                    for line in report.to_csv().lines().skip(1) {
                        out.push_str(&format!("{},{line}\n", report.algorithm));
                    }
                }
                if let Some(cmp) = &comparison {
                    out.push('\n');
                    out.push_str(&cmp.to_csv());
                }
            }
            out
        }
        OutputFormat::Json => {
            let export = RunExport {
                workload: &workload,
                quantum_seed: sched.quantum_seed,
                runs: runs.iter().map(|(schedule, report)| RunEntry { report, schedule }).collect(),
                comparison,
            };
            let mut out = serde_json::to_string_pretty(&export).expect("export serializes");
            out.push('\n');
            out
        }
    })
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<String, CliError> {
    let config = GeneratorConfig {
        count: args.count,
        burst_min: args.min,
        burst_max: args.max,
        seed: args.seed,
    };
    let workload = generate_workload(&config).map_err(|e| CliError::Input(e.to_string()))?;
    let body = match args.format {
        FileFormat::Csv => workload.to_csv(),
        FileFormat::Json => workload.to_json() + "\n",
    };
    match &args.out {
        Some(path) => {
            write_file(path, &body)?;
            Ok(format!("seed {} -> {} ({} processes)\n", config.seed, path.display(), workload.len()))
        }
        None => {
            eprintln!("seed {}", config.seed);
            Ok(body)
        }
    }
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    fs::write(path, body).map_err(|e| CliError::Input(format!("--out {}: {e}", path.display())))
}

pub fn cmd_reproduce(table: TableId, format: OutputFormat) -> Result<String, CliError> {
    let result = reproduce(table).map_err(CliError::Invariant)?;
    let output = match format {
        OutputFormat::Table => result.render_table(),
        OutputFormat::Csv => result.to_csv(),
        OutputFormat::Json => result.to_json() + "\n",
    };
    if result.is_clean() {
        Ok(output)
    } else {
        Err(CliError::Mismatch {
            count: result.unexpected().count(),
            output,
        })
    }
}
