//! Deterministic CPU scheduling simulator.
//!
//! Runs FCFS, non-preemptive SJF, fixed-quantum Round Robin and a
//! dynamic-quantum Round Robin (OMDRRS) over workloads whose processes all
//! arrive at tick 0, producing slice-level traces, turnaround/waiting/dispatch
//! metrics and ASCII Gantt charts.
//!
//! ```
//! use schedsim_core::{algorithms, metrics, Workload};
//!
//! let workload = Workload::from_bursts(&[15, 20, 7, 30, 4]).unwrap();
//! let schedule = algorithms::run_omdrrs(&workload, 6, 2).unwrap();
//! let report = metrics::compute_metrics(&workload, &schedule).unwrap();
//! assert_eq!(report.avg_turnaround.to_string(), "36.2");
//! ```

pub mod algorithms;
pub mod metrics;
pub mod schedule;
pub mod workload;

pub use algorithms::{run_fcfs, run_omdrrs, run_rr, run_sjf, ParamError, Policy};
pub use metrics::{compare, compute_metrics, render_gantt, Average, Comparison, MetricsError, MetricsReport, ProcessMetrics};
pub use schedule::{
    dispatch_count, validate_schedule, AllocationKind, Algorithm, ExecutionSlice, Schedule, SchedulerParams,
    ValidationReport, Violation, ViolationKind,
};
pub use workload::{
    generate_workload, parse_workload, GeneratorConfig, InputFormat, Origin, Pid, ProcessSpec, Tick, Workload,
    WorkloadError,
};
