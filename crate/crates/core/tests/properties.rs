use std::collections::{BTreeMap, VecDeque};

use proptest::prelude::*;
use schedsim_core::{
    compute_metrics, dispatch_count, render_gantt, run_fcfs, run_omdrrs, run_rr, run_sjf, validate_schedule,
    AllocationKind, Pid, ProcessSpec, Schedule, Tick, Origin, Workload,
};

fn workload_strategy(max_len: usize, max_burst: Tick) -> impl Strategy<Value = Workload> {
    prop::collection::vec(1..=max_burst, 1..=max_len).prop_map(|b| Workload::from_bursts(&b).unwrap())
}

fn all_schedules(w: &Workload, q: Tick, k: Tick, factor: Tick) -> Vec<Schedule> {
    vec![
        run_fcfs(w),
        run_sjf(w),
        run_rr(w, q).unwrap(),
        run_omdrrs(w, k, factor).unwrap(),
    ]
}

/// Round Robin advanced one tick at a time, recording who held the CPU on
/// each tick. Shares nothing with the slice-based implementation.
fn rr_tick_oracle(w: &Workload, q: Tick) -> (Vec<Pid>, BTreeMap<Pid, Tick>) {
    let mut queue: VecDeque<(Pid, Tick)> = w.processes().iter().map(|p| (p.pid, p.burst)).collect();
    let mut timeline = Vec::new();
    let mut done = BTreeMap::new();
    while let Some((pid, mut left)) = queue.pop_front() {
        let mut used = 0;
        while left > 0 && used < q {
            timeline.push(pid);
            left -= 1;
            used += 1;
        }
        if left == 0 {
            done.insert(pid, timeline.len() as Tick);
        } else {
            queue.push_back((pid, left));
        }
    }
    (timeline, done)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn every_schedule_is_valid(w in workload_strategy(25, 80), q in 1u64..100, k in 1u64..100, factor in 2u64..6) {
        for s in all_schedules(&w, q, k, factor) {
            let report = validate_schedule(&w, &s);
            prop_assert!(report.is_ok(), "{}: {}", s.algorithm, report);
            let total: Tick = s.slices.iter().map(|x| x.duration()).sum();
            prop_assert_eq!(total, w.total_burst());
            prop_assert_eq!(s.makespan(), w.total_burst());
        }
    }

    #[test]
    fn runs_are_deterministic(w in workload_strategy(20, 50), q in 1u64..60, k in 1u64..60) {
        prop_assert_eq!(all_schedules(&w, q, k, 2), all_schedules(&w, q, k, 2));
    }

    #[test]
    fn rr_matches_tick_oracle(w in workload_strategy(12, 40), q in 1u64..45) {
        let s = run_rr(&w, q).unwrap();
        let (timeline, done) = rr_tick_oracle(&w, q);
        let expanded: Vec<Pid> = s.slices.iter().flat_map(|x| std::iter::repeat_n(x.pid, x.duration() as usize)).collect();
        prop_assert_eq!(expanded, timeline);
        prop_assert_eq!(s.completions, done);
    }

    #[test]
    fn non_preemptive_algorithms_dispatch_once_per_process(w in workload_strategy(30, 100)) {
        for s in [run_fcfs(&w), run_sjf(&w)] {
            prop_assert_eq!(dispatch_count(&s), w.len());
            prop_assert!(s.slices.iter().all(|x| x.kind == AllocationKind::RunToCompletion));
        }
    }

    #[test]
    fn continuation_never_opens_a_process(w in workload_strategy(20, 100), k in 1u64..30, factor in 2u64..5) {
        let s = run_omdrrs(&w, k, factor).unwrap();
        let mut seen = std::collections::HashSet::new();
        for x in &s.slices {
            if seen.insert(x.pid) {
                prop_assert_ne!(x.kind, AllocationKind::ContinuationGrant);
            }
        }
    }

    #[test]
    fn rr_with_large_quantum_is_fcfs(w in workload_strategy(20, 100), extra in 0u64..10) {
        let q = w.max_burst() + extra;
        prop_assert_eq!(run_rr(&w, q).unwrap().slices, run_fcfs(&w).slices);
    }

    #[test]
    fn omdrrs_with_large_k_completes_like_sjf(w in workload_strategy(20, 100), extra in 0u64..10, factor in 2u64..5) {
        let k = w.max_burst() + extra;
        prop_assert_eq!(run_omdrrs(&w, k, factor).unwrap().completions, run_sjf(&w).completions);
    }

    /// Every unfinished process is dispatched exactly once per round (plus a
    /// possible continuation), so a process's n-th non-continuation slice
    /// belongs to round n.
    #[test]
    fn omdrrs_quantum_law(w in workload_strategy(20, 300), k in 1u64..20, factor in 2u64..5) {
        let s = run_omdrrs(&w, k, factor).unwrap();
        let mut rounds: BTreeMap<Pid, u32> = BTreeMap::new();
        for x in &s.slices {
            if x.kind == AllocationKind::ContinuationGrant {
                continue;
            }
            let round = rounds.entry(x.pid).or_insert(0);
            *round += 1;
            if x.kind == AllocationKind::QuantumGrant {
                prop_assert_eq!(x.duration(), k * factor.pow(*round - 1));
            }
        }
    }

    #[test]
    fn equal_burst_reordering_preserves_completion_multiset(
        bursts in prop::collection::vec(1u64..12, 2..12),
        swap_seed in any::<prop::sample::Index>(),
        q in 1u64..10,
        k in 1u64..10,
    ) {
        let original = Workload::from_bursts(&bursts).unwrap();
        // Swap the positions of two processes that share a burst value, if any.
        let mut procs: Vec<ProcessSpec> = original.processes().to_vec();
        let pairs: Vec<(usize, usize)> = (0..procs.len())
            .flat_map(|i| (i + 1..procs.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| procs[i].burst == procs[j].burst)
            .collect();
        prop_assume!(!pairs.is_empty());
        let (i, j) = pairs[swap_seed.index(pairs.len())];
        procs.swap(i, j);
        let permuted = Workload::new(procs, Origin::Manual).unwrap();
        let sorted = |s: &Schedule| { let mut v: Vec<Tick> = s.completions.values().copied().collect(); v.sort_unstable(); v };
        for (a, b) in all_schedules(&original, q, k, 2).iter().zip(all_schedules(&permuted, q, k, 2).iter()) {
            prop_assert_eq!(sorted(a), sorted(b));
            prop_assert_eq!(a.slices.len(), b.slices.len());
        }
    }

    #[test]
    fn waiting_identity(w in workload_strategy(20, 100), q in 1u64..50, k in 1u64..50) {
        for s in all_schedules(&w, q, k, 2) {
            let r = compute_metrics(&w, &s).unwrap();
            prop_assert_eq!(r.avg_waiting.total, r.avg_turnaround.total - w.total_burst());
            prop_assert!(r.per_process.iter().all(|m| m.turnaround >= m.burst && m.waiting == m.turnaround - m.burst));
            prop_assert_eq!(r.context_switches, s.slices.len());
        }
    }

    #[test]
    fn gantt_axis_carries_exactly_the_slice_boundaries(w in workload_strategy(15, 60), q in 1u64..20, k in 1u64..20, width in 20usize..200) {
        for s in all_schedules(&w, q, k, 2) {
            let chart = render_gantt(&s, width);
            let axis: Vec<Tick> = chart.lines().nth(1).unwrap().split_whitespace().map(|t| t.parse().unwrap()).collect();
            let mut expected: Vec<Tick> = s.slices.iter().map(|x| x.start).collect();
            expected.push(s.makespan());
            prop_assert_eq!(axis, expected);
        }
    }
}
