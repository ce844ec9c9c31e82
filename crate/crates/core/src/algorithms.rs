//! The four schedulers. Each one is a pure function from a workload (and its
//! parameters) to a complete [`Schedule`]. All processes arrive at tick 0, so
//! the CPU is never idle and every trace starts at 0.

use std::collections::VecDeque;
use std::fmt;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schedule::{AllocationKind, Algorithm, ExecutionSlice, Schedule, SchedulerParams};
use crate::workload::{Pid, Tick, Workload};

pub const DEFAULT_FACTOR: Tick = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("round robin quantum q must be at least 1")]
    ZeroQuantum,
    #[error("initial quantum k must be at least 1")]
    ZeroInitialQuantum,
    #[error("growth factor F must be at least 2 (got {0})")]
    FactorTooSmall(Tick),
    #[error("quantum overflow in round {0}")]
    QuantumOverflow(usize),
}

/// An algorithm together with the parameters it needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
pub enum Policy {
    Fcfs,
    Sjf,
    Rr { q: Tick },
    Omdrrs { k: Tick, factor: Tick },
}

impl Policy {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            Policy::Fcfs => Algorithm::Fcfs,
            Policy::Sjf => Algorithm::Sjf,
            Policy::Rr { .. } => Algorithm::Rr,
            Policy::Omdrrs { .. } => Algorithm::Omdrrs,
        }
    }

    pub fn run(&self, workload: &Workload) -> Result<Schedule, ParamError> {
        match *self {
            Policy::Fcfs => Ok(run_fcfs(workload)),
            Policy::Sjf => Ok(run_sjf(workload)),
            Policy::Rr { q } => run_rr(workload, q),
            Policy::Omdrrs { k, factor } => run_omdrrs(workload, k, factor),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Fcfs => write!(f, "FCFS"),
            Policy::Sjf => write!(f, "SJF"),
            Policy::Rr { q } => write!(f, "RR(q={q})"),
            Policy::Omdrrs { k, factor } => write!(f, "OMDRRS(k={k}, F={factor})"),
        }
    }
}

/// Appends slices back to back, tracking the current tick.
struct Trace {
    now: Tick,
    slices: Vec<ExecutionSlice>,
}

impl Trace {
    fn new() -> Self {
        Self { now: 0, slices: Vec::new() }
    }

    fn dispatch(&mut self, pid: Pid, ticks: Tick, kind: AllocationKind) {
        debug_assert!(ticks > 0);
        let start = self.now;
        self.now += ticks;
        self.slices.push(ExecutionSlice {
            pid,
            start,
            end: self.now,
            kind,
        });
    }

    fn finish(self, algorithm: Algorithm, params: SchedulerParams) -> Schedule {
        Schedule::from_slices(algorithm, params, self.slices)
    }
}

fn run_to_completion_in<'a>(order: impl Iterator<Item = &'a crate::workload::ProcessSpec>) -> Trace {
    let mut trace = Trace::new();
    for p in order {
        trace.dispatch(p.pid, p.burst, AllocationKind::RunToCompletion);
    }
    trace
}

/// First come, first served: submission order, one slice per process.
pub fn run_fcfs(workload: &Workload) -> Schedule {
    run_to_completion_in(workload.processes().iter()).finish(Algorithm::Fcfs, SchedulerParams::default())
}

/// Non-preemptive shortest job first. Equal bursts keep submission order.
pub fn run_sjf(workload: &Workload) -> Schedule {
    let mut order: Vec<_> = workload.processes().iter().collect();
    order.sort_by_key(|p| p.burst);
    run_to_completion_in(order.into_iter()).finish(Algorithm::Sjf, SchedulerParams::default())
}

/// Fixed-quantum Round Robin over a FIFO ready queue seeded in submission order.
pub fn run_rr(workload: &Workload, q: Tick) -> Result<Schedule, ParamError> {
    if q == 0 {
        return Err(ParamError::ZeroQuantum);
    }
    let mut queue: VecDeque<(Pid, Tick)> = workload.processes().iter().map(|p| (p.pid, p.burst)).collect();
    let mut trace = Trace::new();
    while let Some((pid, remaining)) = queue.pop_front() {
        if remaining <= q {
            trace.dispatch(pid, remaining, AllocationKind::RunToCompletion);
        } else {
            trace.dispatch(pid, q, AllocationKind::QuantumGrant);
            queue.push_back((pid, remaining - q));
        }
    }
    Ok(trace.finish(
        Algorithm::Rr,
        SchedulerParams {
            q: Some(q),
            ..SchedulerParams::default()
        },
    ))
}

/// Dynamic-quantum Round Robin with ascending-burst ordering.
///
/// Round `r` (from 1) uses quantum `k * factor^(r-1)`. At the start of each
/// round the unfinished processes are stably sorted by remaining burst. Within
/// the round, a process whose remaining burst is below the quantum runs to
/// completion; otherwise it gets exactly one quantum, and if what is left is
/// then below `quantum / factor` it is allowed to finish at once with a
/// continuation grant. Anything else waits for the next round.
pub fn run_omdrrs(workload: &Workload, k: Tick, factor: Tick) -> Result<Schedule, ParamError> {
    if k == 0 {
        return Err(ParamError::ZeroInitialQuantum);
    }
    if factor < 2 {
        return Err(ParamError::FactorTooSmall(factor));
    }

    // (pid, remaining); Vec order is submission order for stable tie-breaks.
    let mut pending: Vec<(Pid, Tick)> = workload.processes().iter().map(|p| (p.pid, p.burst)).collect();
    let mut trace = Trace::new();
    let mut quantum = k;
    let mut round = 1;
    while !pending.is_empty() {
        pending.sort_by_key(|&(_, remaining)| remaining);
        let mut carried = Vec::with_capacity(pending.len());
        for (pid, remaining) in pending {
            if remaining < quantum {
                trace.dispatch(pid, remaining, AllocationKind::RunToCompletion);
                continue;
            }
            trace.dispatch(pid, quantum, AllocationKind::QuantumGrant);
            let left = remaining - quantum;
            if left == 0 {
                continue;
            }
            // left < quantum / factor, without fractional ticks
            if left.checked_mul(factor).is_some_and(|scaled| scaled < quantum) {
                trace.dispatch(pid, left, AllocationKind::ContinuationGrant);
            } else {
                carried.push((pid, left));
            }
        }
        pending = carried;
        if !pending.is_empty() {
            round += 1;
            quantum = quantum.checked_mul(factor).ok_or(ParamError::QuantumOverflow(round))?;
        }
    }
    Ok(trace.finish(
        Algorithm::Omdrrs,
        SchedulerParams {
            k: Some(k),
            factor: Some(factor),
            ..SchedulerParams::default()
        },
    ))
}

/// Quantum for the `round`-th OMDRRS round (1-based): `k * factor^(round-1)`.
pub fn omdrrs_quantum(k: Tick, factor: Tick, round: u32) -> Option<Tick> {
    factor.checked_pow(round.checked_sub(1)?)?.checked_mul(k)
}

/// Draws a quantum uniformly from `[2, max burst]` (or exactly 2 when every
/// burst is shorter than that), reproducibly from `seed`.
pub fn draw_quantum(workload: &Workload, seed: u64) -> Tick {
    let hi = workload.max_burst().max(2);
    ChaCha8Rng::seed_from_u64(seed).random_range(2..=hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{dispatch_count, validate_schedule};
    use std::collections::BTreeMap;
    use AllocationKind::*;

    const TABLE1: [Tick; 10] = [16, 13, 15, 10, 12, 22, 8, 24, 26, 25];
    const TABLE2: [Tick; 5] = [15, 20, 7, 30, 4];

    fn completions_in_pid_order(s: &Schedule) -> Vec<Tick> {
        s.completions.values().copied().collect()
    }

    fn completions_of(s: &Schedule, pairs: &[(u32, Tick)]) -> bool {
        pairs.iter().all(|&(p, t)| s.completions.get(&Pid(p)) == Some(&t))
    }

    fn spans(s: &Schedule) -> Vec<(u32, Tick, Tick, AllocationKind)> {
        s.slices.iter().map(|x| (x.pid.0, x.start, x.end, x.kind)).collect()
    }

    #[test]
    fn fcfs_reference_workloads() {
        let t2 = Workload::from_bursts(&TABLE2).unwrap();
        assert_eq!(completions_in_pid_order(&run_fcfs(&t2)), vec![15, 35, 42, 72, 76]);
        let t1 = Workload::from_bursts(&TABLE1).unwrap();
        assert_eq!(
            completions_in_pid_order(&run_fcfs(&t1)),
            vec![16, 29, 44, 54, 66, 88, 96, 120, 146, 171]
        );
        let one = Workload::from_bursts(&[9]).unwrap();
        assert_eq!(spans(&run_fcfs(&one)), vec![(1, 0, 9, RunToCompletion)]);
    }

    #[test]
    fn sjf_reference_workloads() {
        let t2 = Workload::from_bursts(&TABLE2).unwrap();
        assert!(completions_of(&run_sjf(&t2), &[(5, 4), (3, 11), (1, 26), (2, 46), (4, 76)]));
        let t1 = Workload::from_bursts(&TABLE1).unwrap();
        assert!(completions_of(
            &run_sjf(&t1),
            &[(7, 8), (4, 18), (5, 30), (2, 43), (3, 58), (1, 74), (6, 96), (8, 120), (10, 145), (9, 171)]
        ));
    }

    #[test]
    fn sjf_on_ascending_input_matches_fcfs() {
        let w = Workload::from_bursts(&[2, 3, 3, 8, 13]).unwrap();
        assert_eq!(run_sjf(&w).slices, run_fcfs(&w).slices);
    }

    #[test]
    fn sjf_ties_keep_submission_order() {
        let w = Workload::from_bursts(&[5, 2, 5, 2]).unwrap();
        let order: Vec<u32> = run_sjf(&w).slices.iter().map(|s| s.pid.0).collect();
        assert_eq!(order, vec![2, 4, 1, 3]);
    }

    #[test]
    fn rr_table2_quantum_6() {
        let w = Workload::from_bursts(&TABLE2).unwrap();
        let s = run_rr(&w, 6).unwrap();
        assert_eq!(completions_in_pid_order(&s), vec![50, 64, 41, 76, 28]);
        assert_eq!(dispatch_count(&s), 15);
        assert_eq!(s.params.q, Some(6));
    }

    #[test]
    fn rr_table1_quantum_5() {
        let w = Workload::from_bursts(&TABLE1).unwrap();
        let s = run_rr(&w, 5).unwrap();
        assert_eq!(
            completions_in_pid_order(&s),
            vec![134, 106, 111, 70, 113, 156, 83, 160, 171, 170]
        );
        assert_eq!(dispatch_count(&s), 38);
    }

    #[test]
    fn rr_exact_quantum_finish_is_run_to_completion() {
        let w = Workload::from_bursts(&[4, 8]).unwrap();
        let s = run_rr(&w, 4).unwrap();
        assert_eq!(
            spans(&s),
            vec![(1, 0, 4, RunToCompletion), (2, 4, 8, QuantumGrant), (2, 8, 12, RunToCompletion)]
        );
    }

    #[test]
    fn rr_large_quantum_is_fcfs() {
        let w = Workload::from_bursts(&TABLE2).unwrap();
        assert_eq!(run_rr(&w, 30).unwrap().slices, run_fcfs(&w).slices);
    }

    #[test]
    fn rr_rejects_zero_quantum() {
        let w = Workload::from_bursts(&TABLE2).unwrap();
        assert_eq!(run_rr(&w, 0), Err(ParamError::ZeroQuantum));
    }

    #[test]
    fn omdrrs_table2_trace() {
        let w = Workload::from_bursts(&TABLE2).unwrap();
        let s = run_omdrrs(&w, 6, 2).unwrap();
        assert!(completions_of(&s, &[(1, 38), (2, 52), (3, 11), (4, 76), (5, 4)]));
        // Round 1 (TQ=6): P5 finishes, P3 gets 6 then continues for its last
        // tick (1 < 3), P1/P2/P4 are carried with 9/14/24. Round 2 (TQ=12):
        // P1 finishes, P2 gets 12 then continues for 2 (2 < 6), P4 is carried
        // with 12. Round 3 (TQ=24): P4 finishes.
        assert_eq!(
            spans(&s),
            vec![
                (5, 0, 4, RunToCompletion),
                (3, 4, 10, QuantumGrant),
                (3, 10, 11, ContinuationGrant),
                (1, 11, 17, QuantumGrant),
                (2, 17, 23, QuantumGrant),
                (4, 23, 29, QuantumGrant),
                (1, 29, 38, RunToCompletion),
                (2, 38, 50, QuantumGrant),
                (2, 50, 52, ContinuationGrant),
                (4, 52, 64, QuantumGrant),
                (4, 64, 76, RunToCompletion),
            ]
        );
        assert_eq!(dispatch_count(&s), 11);
        assert!(validate_schedule(&w, &s).is_ok());
    }

    #[test]
    fn omdrrs_table1_trace() {
        let w = Workload::from_bursts(&TABLE1).unwrap();
        let s = run_omdrrs(&w, 5, 2).unwrap();
        let expected: BTreeMap<Pid, Tick> = [(7, 53), (4, 58), (5, 65), (2, 73), (3, 83), (1, 94), (6, 141), (8, 150), (10, 160), (9, 171)]
            .into_iter()
            .map(|(p, t)| (Pid(p), t))
            .collect();
        assert_eq!(s.completions, expected);
        assert_eq!(dispatch_count(&s), 25);
        // P7 has 3 left after round 1; 3*2 < 5 is false, so no continuation.
        assert_eq!(spans(&s)[0], (7, 0, 5, QuantumGrant));
        assert_eq!(spans(&s)[10], (7, 50, 53, RunToCompletion));
        // P3 has exactly TQ=10 in round 2: a full quantum that ends the process.
        assert_eq!(spans(&s)[14], (3, 73, 83, QuantumGrant));
        assert_eq!(spans(&s)[16], (1, 93, 94, ContinuationGrant));
    }

    #[test]
    fn omdrrs_large_k_matches_sjf_completions() {
        let w = Workload::from_bursts(&TABLE1).unwrap();
        let dynamic = run_omdrrs(&w, 27, 2).unwrap();
        assert_eq!(dynamic.completions, run_sjf(&w).completions);
        // k equal to the max burst: that process takes the quantum branch and
        // finishes exactly at the end of it.
        let dynamic = run_omdrrs(&w, 26, 2).unwrap();
        assert_eq!(dynamic.completions, run_sjf(&w).completions);
    }

    #[test]
    fn omdrrs_quantum_grows_geometrically() {
        let w = Workload::from_bursts(&[100]).unwrap();
        let s = run_omdrrs(&w, 3, 3).unwrap();
        // 3 + 9 + 27 = 39, then 61 < 81 finishes in round 4.
        assert_eq!(
            spans(&s),
            vec![(1, 0, 3, QuantumGrant), (1, 3, 12, QuantumGrant), (1, 12, 39, QuantumGrant), (1, 39, 100, RunToCompletion)]
        );
        assert_eq!(omdrrs_quantum(3, 3, 4), Some(81));
        assert_eq!(omdrrs_quantum(3, 3, 0), None);
    }

    #[test]
    fn omdrrs_rejects_bad_params() {
        let w = Workload::from_bursts(&TABLE2).unwrap();
        assert_eq!(run_omdrrs(&w, 0, 2), Err(ParamError::ZeroInitialQuantum));
        assert_eq!(run_omdrrs(&w, 6, 1), Err(ParamError::FactorTooSmall(1)));
        assert_eq!(run_omdrrs(&w, 6, 0), Err(ParamError::FactorTooSmall(0)));
    }

    #[test]
    fn policy_dispatches_to_algorithm() {
        let w = Workload::from_bursts(&TABLE2).unwrap();
        assert_eq!(Policy::Rr { q: 6 }.run(&w).unwrap(), run_rr(&w, 6).unwrap());
        assert_eq!(Policy::Omdrrs { k: 6, factor: 2 }.run(&w).unwrap().algorithm, Algorithm::Omdrrs);
        assert_eq!(Policy::Omdrrs { k: 6, factor: 2 }.to_string(), "OMDRRS(k=6, F=2)");
    }

    #[test]
    fn drawn_quantum_is_reproducible_and_in_range() {
        let w = Workload::from_bursts(&TABLE2).unwrap();
        for seed in 0..200 {
            let q = draw_quantum(&w, seed);
            assert!((2..=30).contains(&q));
            assert_eq!(q, draw_quantum(&w, seed));
        }
        let tiny = Workload::from_bursts(&[1, 1]).unwrap();
        assert_eq!(draw_quantum(&tiny, 5), 2);
    }
}
