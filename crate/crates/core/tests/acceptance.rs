//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! Tolerances are zero everywhere: all comparisons are exact rational
//! equality or exact inequalities.

mod common;

use std::collections::HashMap;
use std::time::Instant;

use flowtime_core::hardness::{brute_force_equal_p, generate, yes_schedule, ThreePartition};
use flowtime_core::normalize::{
    make_busy, make_irreducible_traced, potential, reduce_pair_traced, PotentialMode,
};
use flowtime_core::openshop::{color_operations, solve_openshop, to_parallel, OpenShopInstance};
use flowtime_core::{flow, lp, Instance, Rat, Schedule};
use num_bigint::BigInt;
use rand::prelude::*;

use common::{random_instance, random_schedule, release_multisets, rng};

/// The exhaustive small-instance suite: n <= 4, m in 1..=3, p in 1..=3,
/// releases over 0..=4.
fn small_suite() -> Vec<Instance> {
    let mut out = Vec::new();
    for n in 1..=4usize {
        for releases in release_multisets(n, 4) {
            for m in 1..=3usize {
                for p in 1..=3i64 {
                    out.push(Instance::from_ints(m, p, &releases).unwrap());
                }
            }
        }
    }
    out
}

#[test]
fn criterion_1_oracle_equivalence() {
    let suite = small_suite();
    let mut checked = suite.len();
    for instance in &suite {
        let (schedule, value) = lp::solve(instance);
        let oracle = brute_force_equal_p(instance, true).unwrap();
        assert_eq!(value, oracle, "solver disagrees with oracle on {instance:?}");
        assert!(schedule.verify().passed());
        assert_eq!(schedule.objective(), value);
    }
    let mut r = rng(11);
    for _ in 0..200 {
        let instance = random_instance(&mut r, 5, 3, 3, 4);
        let (_, value) = lp::solve(&instance);
        let oracle = brute_force_equal_p(&instance, true).unwrap();
        assert_eq!(value, oracle, "solver disagrees with oracle on {instance:?}");
        checked += 1;
    }
    println!(
        "[PASS] criterion 1: solver equals the exact oracle on {checked} instances \
         (exhaustive n<=4 sweep + 200 random n=5), zero tolerance"
    );
}

#[test]
fn criterion_2_integralization() {
    let mut r = rng(22);
    let mut fractional_seen = 0;
    let mut trials = 0;
    while fractional_seen < 100 {
        trials += 1;
        let n = r.random_range(2..=5);
        let instance = random_instance(&mut r, n, 3, 3, 4);
        let grid = [2i64, 3, 4][r.random_range(0..3)];
        let schedule = random_schedule(&mut r, &instance, grid);
        assert!(schedule.verify().passed());
        if schedule.is_integral() {
            // Integral inputs only exercise the fixed-point path; make
            // sure it is a fixed point, then move on.
            let out = flow::integralize(&instance, &schedule).unwrap();
            assert_eq!(out.completions(), schedule.completions());
            continue;
        }
        fractional_seen += 1;

        let network = flow::build_network(&instance, &schedule).unwrap();
        let induced = network.induced_flow(&schedule);
        network.check_flow(&induced).unwrap();
        let expected_value =
            Rat::from_int(instance.jobs() as i64) * instance.processing_time().clone();
        assert_eq!(induced.value, expected_value, "induced flow saturates the sources");

        let best = flow::min_cost_flow(&network).unwrap();
        network.check_flow(&best).unwrap();
        assert!(best.flows.iter().all(|f| f.is_integer()), "min-cost flow is integral");
        assert!(best.cost <= induced.cost);

        let out = flow::integralize(&instance, &schedule).unwrap();
        assert!(out.verify().passed());
        assert!(out.is_integral());

        // sum C' <= C~ + w' <= C~ + w <= sum C, exactly.
        let completions = schedule.completions();
        let c_tilde: Rat = completions.iter().map(|c| Rat::from_bigint(c.floor_int())).sum();
        let w: Rat = completions
            .iter()
            .map(|c| c - &Rat::from_bigint(c.floor_int()))
            .sum();
        let per_job_ceiling = completions
            .iter()
            .enumerate()
            .all(|(j, c)| out.completion(j + 1) <= Rat::from_bigint(c.ceil_int()));
        assert!(per_job_ceiling, "per-job completions stay below the ceilings");
        assert!(out.objective() <= &c_tilde + &best.cost);
        assert!(&c_tilde + &best.cost <= &c_tilde + &w);
        assert!(&c_tilde + &w <= schedule.objective());

        // Idempotence on integral inputs.
        let again = flow::integralize(&instance, &out).unwrap();
        assert_eq!(again, out);
    }
    println!(
        "[PASS] criterion 2: integralization verified on {fractional_seen} fractional \
         schedules ({trials} sampled), exact objective chain and idempotence"
    );
}

#[test]
fn criterion_3_irreducibility_pipeline() {
    let suite = small_suite();
    let mut reductions_total = 0usize;
    for instance in &suite {
        let (schedule, value) = lp::solve(instance);
        let busy = make_busy(&schedule).unwrap();
        assert!(busy.objective() <= schedule.objective());
        let (irreducible, traces) = make_irreducible_traced(&busy).unwrap();
        reductions_total += traces.len();
        assert_eq!(
            irreducible.objective(),
            value,
            "normalization may not change an optimal objective ({instance:?})"
        );
        assert!(irreducible.check_irreducible(), "pipeline output irreducible ({instance:?})");
        let report = irreducible.check_lemma4().unwrap();
        assert!(report.passed(), "structure check found a counterexample: {report}");

        // Irreducible schedules are normal: reading off (S, C) yields a
        // feasible program point with the same objective.
        let sol = lp::solution_of_normal_schedule(&irreducible).unwrap();
        assert_eq!(sol.lp_objective(), value);
    }
    println!(
        "[PASS] criterion 3: busy + irreducible pipeline on {} instances, {} reductions, \
         objectives unchanged, zero structure counterexamples",
        suite.len(),
        reductions_total
    );
}

/// Piecewise-constant profile cardinality, normalized by merging equal
/// adjacent pieces.
fn cardinality_steps(schedule: &Schedule) -> Vec<(Rat, Rat, usize)> {
    let blocks = schedule.decompose_blocks().unwrap();
    let mut out: Vec<(Rat, Rat, usize)> = Vec::new();
    for b in blocks {
        let count = b.profile.len();
        match out.last_mut() {
            Some((_, end, k)) if *k == count && *end == b.start => *end = b.end.clone(),
            _ => out.push((b.start.clone(), b.end.clone(), count)),
        }
    }
    out
}

#[test]
fn criterion_4_reduction_contract() {
    let mut r = rng(44);
    let mut out_of_order = 0;
    for trial in 0..500 {
        let n = r.random_range(2..=5);
        let instance = random_instance(&mut r, n, 3, 3, 4);
        let grid = [1i64, 2, 3][r.random_range(0..3)];
        let schedule = random_schedule(&mut r, &instance, grid);
        let i = r.random_range(1..n);
        let j = r.random_range(i + 1..=n);

        let before_completions = schedule.completions();
        let before_pot = potential(&schedule, PotentialMode::Continuous).unwrap();
        let (reduced, trace) = reduce_pair_traced(&schedule, i, j).unwrap();
        let after_completions = reduced.completions();

        for job in 1..=n {
            if job != i && job != j {
                assert_eq!(
                    before_completions[job - 1],
                    after_completions[job - 1],
                    "untouched job {job} moved (trial {trial})"
                );
            }
        }
        assert!(after_completions[i - 1] <= after_completions[j - 1]);
        assert!(
            &after_completions[i - 1] + &after_completions[j - 1]
                <= &before_completions[i - 1] + &before_completions[j - 1]
        );
        assert_eq!(
            cardinality_steps(&schedule),
            cardinality_steps(&reduced),
            "profile cardinalities preserved (trial {trial})"
        );
        if let Some(trace) = trace {
            out_of_order += 1;
            let after_pot = potential(&reduced, PotentialMode::Continuous).unwrap();
            assert_eq!(
                after_pot.cmp_lex(&before_pot),
                std::cmp::Ordering::Less,
                "potential strictly decreases on out-of-order pairs (trial {trial})"
            );
            assert_eq!(trace.before.0, before_pot.0);
        } else {
            assert_eq!(reduced, schedule);
        }
    }
    println!(
        "[PASS] criterion 4: reduction contract on 500 random (schedule, i, j) triples \
         ({out_of_order} out-of-order), completions, cardinalities and potential checked"
    );
}

/// Exhaustive open-shop optimum: slot-by-slot enumeration of every partial
/// machine-to-job assignment, memoized on the multiset of job states.
fn openshop_optimum(m: usize, releases: &[u64]) -> u64 {
    type State = Vec<(u64, u32)>; // (release, done-mask), unfinished only
    let full: u32 = (1 << m) - 1;
    let horizon = releases.iter().max().copied().unwrap_or(0) + (releases.len() * m) as u64;

    fn assignments(
        machine: usize,
        m: usize,
        state: &State,
        taken: u32,
        slot: u64,
        acc: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if machine == m {
            out.push(acc.clone());
            return;
        }
        // This machine idles.
        acc.push(usize::MAX);
        assignments(machine + 1, m, state, taken, slot, acc, out);
        acc.pop();
        for (idx, &(r, mask)) in state.iter().enumerate() {
            if r <= slot && taken & (1 << idx) == 0 && mask & (1 << machine) == 0 {
                acc.push(idx);
                assignments(machine + 1, m, state, taken | (1 << idx), slot, acc, out);
                acc.pop();
            }
        }
    }

    fn go(
        t: u64,
        mut state: State,
        m: usize,
        full: u32,
        horizon: u64,
        memo: &mut HashMap<(u64, State), u64>,
    ) -> u64 {
        state.sort_unstable();
        if state.is_empty() {
            return 0;
        }
        let t = if state.iter().all(|&(r, _)| r > t) {
            state.iter().map(|&(r, _)| r).min().unwrap()
        } else {
            t
        };
        if t >= horizon {
            return u64::MAX / 4;
        }
        if let Some(&v) = memo.get(&(t, state.clone())) {
            return v;
        }
        let mut options = Vec::new();
        assignments(0, m, &state, 0, t, &mut Vec::new(), &mut options);
        let mut best = u64::MAX / 4;
        for choice in options {
            let mut next: State = state.clone();
            let mut finished_value = 0u64;
            let mut finished_idx: Vec<usize> = Vec::new();
            for (machine, &job) in choice.iter().enumerate() {
                if job != usize::MAX {
                    next[job].1 |= 1 << machine;
                    if next[job].1 == full {
                        finished_value += t + 1;
                        finished_idx.push(job);
                    }
                }
            }
            finished_idx.sort_unstable_by(|a, b| b.cmp(a));
            for idx in finished_idx {
                next.remove(idx);
            }
            let rest = go(t + 1, next, m, full, horizon, memo);
            best = best.min(finished_value.saturating_add(rest));
        }
        memo.insert((t, state), best);
        best
    }

    let state: State = releases.iter().map(|&r| (r, 0u32)).collect();
    go(0, state, m, full, horizon, &mut HashMap::new())
}

#[test]
fn criterion_5_openshop_equivalence() {
    let started = Instant::now();
    let mut checked = 0;
    for m in 1..=3usize {
        for n in 1..=5usize {
            for releases in release_multisets(n, 4) {
                let releases: Vec<u64> = releases.iter().map(|&r| r as u64).collect();
                let os = OpenShopInstance::new(m, releases.clone()).unwrap();
                let (schedule, objective) = solve_openshop(&os).unwrap();
                schedule.validate(&os).unwrap();

                let expected = openshop_optimum(m, &releases);
                assert_eq!(
                    objective,
                    Rat::from_int(expected as i64),
                    "open-shop solve disagrees with exhaustive search on m={m} r={releases:?}"
                );

                // The coloring preserves (job, slot) occupancy exactly and
                // the objective equals the parallel-machine optimum.
                let parallel = to_parallel(&os);
                let (par_schedule, par_value) = lp::solve(&parallel);
                let integral = flow::integralize(&parallel, &par_schedule).unwrap();
                assert_eq!(objective, par_value);
                let colored = color_operations(&os, &integral).unwrap();
                let mut from_colored: Vec<(usize, u64)> =
                    colored.assignments.iter().map(|op| (op.job, op.slot)).collect();
                from_colored.sort_unstable();
                let mut from_parallel: Vec<(usize, u64)> = Vec::new();
                for j in 1..=parallel.jobs() {
                    let original = parallel.original_position(j) + 1;
                    for (s, e) in integral.support(j).spans() {
                        let mut t = u64::try_from(&s.to_bigint().unwrap()).unwrap();
                        let end = u64::try_from(&e.to_bigint().unwrap()).unwrap();
                        while t < end {
                            from_parallel.push((original, t));
                            t += 1;
                        }
                    }
                }
                from_parallel.sort_unstable();
                assert_eq!(from_colored, from_parallel, "occupancy preserved");
                checked += 1;
            }
        }
    }
    println!(
        "[PASS] criterion 5: open-shop equivalence on {checked} instances \
         (n<=5, m<=3, releases<=4) in {:.1?}",
        started.elapsed()
    );
}

#[test]
fn criterion_6_hardness_construction() {
    // Independent recomputation of the reduction parameters.
    fn expected_parameters(n: u64, y: u64) -> (BigInt, BigInt, BigInt, BigInt) {
        let n = BigInt::from(n);
        let y = BigInt::from(y);
        let a: BigInt = 6u32 * &n * &y;
        let b: BigInt = 18u32 * &n * &n * &y * &y;
        let cap_n: BigInt = 4u32 * &n + &a * &n;
        // D = 3nAy + n(Ay+B) + n * sum_{i=1..A} (Ay + B + i), with the sum
        // evaluated term by term below for independence from the closed
        // form used in the library.
        let ay: BigInt = &a * &y;
        let mut sum = BigInt::from(0u32);
        let mut i = BigInt::from(1u32);
        while i <= a {
            sum += &ay + &b + &i;
            i += 1u32;
        }
        let d: BigInt = 3u32 * &n * &ay + &n * (&ay + &b) + &n * &sum;
        (a, b, cap_n, d)
    }

    // Out-of-bounds numbers are rejected (3 <= 12/4 violates the strict
    // lower bound).
    assert!(ThreePartition::new(2, 12, vec![4, 5, 4, 4, 4, 3]).is_err());

    let cases: Vec<(ThreePartition, Vec<[usize; 3]>)> = vec![
        (ThreePartition::new(1, 12, vec![4, 4, 4]).unwrap(), vec![[1, 2, 3]]),
        (
            ThreePartition::new(2, 9, vec![3, 3, 3, 3, 3, 3]).unwrap(),
            vec![[1, 2, 3], [4, 5, 6]],
        ),
    ];

    for (tp, partition) in &cases {
        let hard = generate(tp).unwrap();
        let (a, b, cap_n, d) =
            expected_parameters(tp.groups() as u64, tp.target());
        assert_eq!(hard.a, a);
        assert_eq!(hard.b, b);
        assert_eq!(hard.job_count, cap_n);
        assert_eq!(hard.threshold, d);
        assert_eq!(hard.machines, tp.groups());
        assert_eq!(BigInt::from(hard.instance.jobs().len()), cap_n);

        let witness = yes_schedule(tp, partition).unwrap();
        let report = witness.verify();
        assert!(report.passed(), "witness schedule fails verification: {report}");
        assert!(witness.check_busy());
        assert!(witness.objective() <= Rat::from_bigint(hard.threshold.clone()));
        for j in 1..=hard.instance.jobs().len() {
            assert_eq!(witness.preemption_parts(j), 1, "witness is non-preemptive");
        }
    }
    println!(
        "[PASS] criterion 6: hardness parameters match independent recomputation and the \
         witness schedules verify with objective <= D (n = 1, 2)"
    );
}

#[test]
fn criterion_7_lp_structure() {
    let mut r = rng(77);
    for _ in 0..25 {
        let n = r.random_range(1..=8usize);
        let m = r.random_range(1..=4usize);
        let p = r.random_range(1..=5i64);
        let releases: Vec<i64> = (0..n).map(|_| r.random_range(0..=6)).collect();
        let instance = Instance::from_ints(m, p, &releases).unwrap();
        let program = lp::build_lp(&instance);

        assert_eq!(program.num_vars(), 2 * n * m);
        for c in program.constraints() {
            for (_, v) in &c.coeffs {
                assert!(
                    *v == Rat::one() || *v == -Rat::one() || v.is_zero(),
                    "coefficient {v} outside {{-1, 0, 1}}"
                );
            }
        }
        let count = |prefix: &str| {
            program.constraints().iter().filter(|c| c.name.starts_with(prefix)).count()
        };
        assert_eq!(count("release["), n);
        assert_eq!(count("work["), n);
        assert_eq!(count("interval["), n * m);
        assert_eq!(count("machine_order["), n * (m - 1));
        assert_eq!(count("job_order["), (n - 1) * m);
        assert_eq!(
            program.constraints().len(),
            n + n + n * m + n * (m - 1) + (n - 1) * m
        );
    }
    println!(
        "[PASS] criterion 7: all LP coefficients in {{-1, 0, 1}} and family sizes match \
         the closed forms on 25 random (n, m)"
    );
}

#[test]
fn criterion_8_scaling_smoke() {
    let started = Instant::now();
    let mut r = rng(88);
    for round in 0..2 {
        let releases: Vec<i64> = (0..60).map(|_| r.random_range(0..=50)).collect();
        let p = r.random_range(2..=8i64);
        let instance = Instance::from_ints(8, p, &releases).unwrap();
        let (schedule, value, stats) = lp::solve_with_stats(&instance);
        assert!(schedule.verify().passed());
        assert_eq!(schedule.objective(), value);
        assert!(stats.pivots > 0);
        println!(
            "  round {round}: p={p} value={value} pivots={} elapsed so far {:.1?}",
            stats.pivots,
            started.elapsed()
        );
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "n=60, m=8 instances must solve within a minute, took {elapsed:?}"
    );
    println!(
        "[PASS] criterion 8: two n=60, m=8 instances solved exactly in {:.1?} (< 60s)",
        elapsed
    );
}
