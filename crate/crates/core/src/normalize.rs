//! Reduction-based schedule normalization.
//!
//! The `(i, j)`-reduction rebalances the symmetric difference `T` of two
//! jobs' supports so the earlier-released job takes the earlier half
//! (split at `t0` with `|T ∩ [0, t0)| = |T| / 2`); intersection times are
//! untouched. Reductions never increase the objective, preserve profile
//! cardinalities, busy-ness and integrality, and strictly decrease a
//! lexicographic potential when applied to an out-of-order pair, which
//! drives the irreducibility loop to termination.

use std::cmp::Ordering;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::intervals::IntervalSet;
use crate::rational::{lex_cmp, Rat};
use crate::schedule::Schedule;

/// Which potential to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PotentialMode {
    /// `H_j = sum of integer slot starts occupied by j`; requires an
    /// integral schedule.
    Integral,
    /// `H̄_j = (1/2) ∫ t dt` over the support of `j`; defined for any
    /// schedule.
    Continuous,
}

/// Per-job potential vector, compared lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Potential(pub Vec<Rat>);

impl Potential {
    pub fn cmp_lex(&self, other: &Potential) -> Ordering {
        lex_cmp(&self.0, &other.0)
    }
}

/// Evaluates the potential of a schedule.
pub fn potential(schedule: &Schedule, mode: PotentialMode) -> Result<Potential> {
    let mut values = Vec::with_capacity(schedule.instance().jobs());
    for job in 1..=schedule.instance().jobs() {
        let support = schedule.support(job);
        values.push(match mode {
            PotentialMode::Continuous => {
                // (1/2) * sum (e^2 - s^2) / 2 per span.
                support
                    .spans()
                    .iter()
                    .map(|(s, e)| &(&(e * e) - &(s * s)) / &Rat::from_int(4))
                    .sum()
            }
            PotentialMode::Integral => {
                if !support.is_integral() {
                    return Err(Error::NonIntegral(format!(
                        "integral potential needs integral preemptions, job {job} has span boundaries off the grid"
                    )));
                }
                // sum_{t = s}^{e-1} t = (e - s)(s + e - 1) / 2 per span.
                let mut total = BigInt::from(0);
                for (s, e) in support.spans() {
                    let s = s.to_bigint().unwrap();
                    let e = e.to_bigint().unwrap();
                    total += (&e - &s) * (&s + &e - 1u32) / 2;
                }
                Rat::from_bigint(total)
            }
        });
    }
    Ok(Potential(values))
}

/// One applied reduction, for trace logs.
#[derive(Clone, Debug)]
pub struct ReductionTrace {
    pub i: usize,
    pub j: usize,
    /// The symmetric difference of the two supports at the time of the
    /// reduction.
    pub sym_diff: IntervalSet,
    /// The split point dividing `sym_diff` into equal halves.
    pub t0: Rat,
    pub before: Potential,
    pub after: Potential,
}

impl std::fmt::Display for ReductionTrace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "reduce({}, {}) t0={} |T|={} potential {:?} -> {:?}",
            self.i,
            self.j,
            self.t0,
            self.sym_diff.measure(),
            self.before.0,
            self.after.0
        )
    }
}

/// Applies the `(i, j)`-reduction. Fixed point (returns a clone) when the
/// pair is already in order.
pub fn reduce_pair(schedule: &Schedule, i: usize, j: usize) -> Result<Schedule> {
    reduce_pair_traced(schedule, i, j).map(|(s, _)| s)
}

/// Like [`reduce_pair`], also returning a trace when the schedule changed.
pub fn reduce_pair_traced(
    schedule: &Schedule,
    i: usize,
    j: usize,
) -> Result<(Schedule, Option<ReductionTrace>)> {
    let n = schedule.instance().jobs();
    if i >= j {
        return Err(Error::InvalidArgument(format!(
            "reduction needs i < j in release order, got ({i}, {j})"
        )));
    }
    if j > n {
        return Err(Error::InvalidArgument(format!("job {j} out of range 1..={n}")));
    }
    let supp_i = schedule.support(i);
    let supp_j = schedule.support(j);
    let inter = supp_i.intersect(&supp_j);
    let sym_diff = supp_i.union(&supp_j).difference(&inter);
    if sym_diff.is_empty() {
        return Ok((schedule.clone(), None));
    }
    let half = &sym_diff.measure() / &Rat::from_int(2);
    let (front, t0) = sym_diff.prefix_of_measure(&half);
    let new_i = inter.union(&front);
    if new_i == supp_i {
        return Ok((schedule.clone(), None));
    }
    let back = sym_diff.split_at(&t0).1;
    let new_j = inter.union(&back);

    let mut supports = schedule.supports();
    supports[i - 1] = new_i;
    supports[j - 1] = new_j;
    let reduced = Schedule::from_supports(schedule.instance().clone(), &supports);
    let trace = ReductionTrace {
        i,
        j,
        sym_diff,
        t0,
        before: potential(schedule, PotentialMode::Continuous)?,
        after: potential(&reduced, PotentialMode::Continuous)?,
    };
    Ok((reduced, Some(trace)))
}

/// Fills idle capacity: while some machine idles at a time when an
/// already-released job runs later, the latest execution of that job moves
/// into the earliest idle block, in maximal chunks. The result is busy and
/// the objective never increases.
pub fn make_busy(schedule: &Schedule) -> Result<Schedule> {
    let releases = schedule.instance().releases().to_vec();
    let machines = schedule.instance().machines();
    let mut current = schedule.clone();
    loop {
        let blocks = current.decompose_blocks()?;
        let violation = crate::schedule::busy_violation(&blocks, &releases, machines);
        let Some((block_idx, job)) = violation else {
            return Ok(current);
        };
        let block = &blocks[block_idx];
        let supp = current.support(job);
        let after = supp.split_at(&block.end).1;
        let chunk = block.len().min(after.measure());
        debug_assert!(chunk.is_positive());
        let tail = supp.suffix_of_measure(&chunk);
        let moved = supp
            .difference(&tail)
            .union(&IntervalSet::single(block.start.clone(), &block.start + &chunk));
        let mut supports = current.supports();
        supports[job - 1] = moved;
        current = Schedule::from_supports(current.instance().clone(), &supports);
    }
}

/// Orders completion times `C_1 <= ... <= C_n` by reducing job 1 against
/// jobs `2..n`, then job 2 against `3..n`, and so on. The objective never
/// increases.
pub fn order_completions(schedule: &Schedule) -> Result<Schedule> {
    let n = schedule.instance().jobs();
    let mut current = schedule.clone();
    for i in 1..n {
        for j in (i + 1)..=n {
            current = reduce_pair(&current, i, j)?;
        }
    }
    Ok(current)
}

/// Reduces out-of-order pairs (lowest `i`, then lowest `j`, rescanning
/// after every application) until every pair is in order. On busy input
/// the result is irreducible. The potential decreases lexicographically at
/// every step, so the loop terminates.
pub fn make_irreducible(schedule: &Schedule) -> Result<Schedule> {
    make_irreducible_traced(schedule).map(|(s, _)| s)
}

/// Like [`make_irreducible`], also returning one trace per reduction.
pub fn make_irreducible_traced(
    schedule: &Schedule,
) -> Result<(Schedule, Vec<ReductionTrace>)> {
    let n = schedule.instance().jobs();
    let mut current = schedule.clone();
    let mut traces = Vec::new();
    'sweep: loop {
        for i in 1..n {
            for j in (i + 1)..=n {
                let (next, trace) = reduce_pair_traced(&current, i, j)?;
                if let Some(trace) = trace {
                    debug_assert_eq!(trace.after.cmp_lex(&trace.before), Ordering::Less);
                    traces.push(trace);
                    current = next;
                    continue 'sweep;
                }
            }
        }
        return Ok((current, traces));
    }
}

/// Profile order used by tidy schedules: the block whose exclusive minimum
/// job is smaller comes first, so `min(X(s) - X(t)) <= min(X(t) - X(s))`
/// holds left to right within a segment.
pub fn profile_cmp(a: &[usize], b: &[usize]) -> Ordering {
    let only_a = crate::schedule::set_difference(a, b);
    let only_b = crate::schedule::set_difference(b, a);
    match (only_a.first(), only_b.first()) {
        (None, None) => Ordering::Equal,
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (Some(x), Some(y)) => x.cmp(y),
    }
}

/// Sorts block profiles within every segment `[r_i, r_{i+1})` by swapping
/// adjacent out-of-order blocks. Requires completion times ordered and
/// bounded by the horizon `r_n + n p`. No completion time increases and
/// the continuous potential never increases lexicographically.
pub fn make_tidy(schedule: &Schedule) -> Result<Schedule> {
    let completions = schedule.completions();
    if completions.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Precondition(
            "tidying requires completion times ordered C_1 <= ... <= C_n".into(),
        ));
    }
    let horizon = schedule.instance().horizon();
    if completions.iter().any(|c| c > &horizon) {
        return Err(Error::Precondition(format!(
            "tidying requires all completions within the horizon {horizon}"
        )));
    }
    let releases: Vec<Rat> = schedule.instance().releases().to_vec();
    let mut current = schedule.clone();
    loop {
        let blocks = current.decompose_blocks()?;
        let mut swapped = false;
        for w in 0..blocks.len().saturating_sub(1) {
            let (a, b) = (&blocks[w], &blocks[w + 1]);
            // Adjacent within one segment: no release separates them.
            if a.end != b.start || releases.contains(&b.start) {
                continue;
            }
            if profile_cmp(&a.profile, &b.profile) == Ordering::Greater {
                let mut next = blocks.clone();
                let mid = &a.start + &b.len();
                next[w] = crate::schedule::Block {
                    start: a.start.clone(),
                    end: mid.clone(),
                    profile: b.profile.clone(),
                };
                next[w + 1] = crate::schedule::Block {
                    start: mid,
                    end: b.end.clone(),
                    profile: a.profile.clone(),
                };
                current = Schedule::from_blocks(current.instance().clone(), &next);
                swapped = true;
                break;
            }
        }
        if !swapped {
            return Ok(current);
        }
    }
}

/// True when every segment's block profiles are ordered under
/// [`profile_cmp`].
pub fn is_tidy(schedule: &Schedule) -> Result<bool> {
    let releases: Vec<Rat> = schedule.instance().releases().to_vec();
    let blocks = schedule.decompose_blocks()?;
    for w in blocks.windows(2) {
        if w[0].end != w[1].start || releases.contains(&w[1].start) {
            continue;
        }
        if profile_cmp(&w[0].profile, &w[1].profile) == Ordering::Greater {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Instance;
    use crate::schedule::ExecInterval;

    fn iv(job: usize, machine: usize, start: i64, end: i64) -> ExecInterval {
        ExecInterval::new(job, machine, Rat::from_int(start), Rat::from_int(end))
    }

    #[test]
    fn reduce_swapped_pair() {
        let inst = Instance::from_ints(1, 1, &[0, 0]).unwrap();
        let s = Schedule::new(inst, vec![iv(2, 1, 0, 1), iv(1, 1, 1, 2)]);
        let (reduced, trace) = reduce_pair_traced(&s, 1, 2).unwrap();
        let trace = trace.expect("out of order pair must change");
        assert_eq!(trace.t0, Rat::one());
        assert_eq!(trace.sym_diff.measure(), Rat::from_int(2));
        assert_eq!(reduced.support(1), IntervalSet::single(Rat::zero(), Rat::one()));
        assert_eq!(reduced.support(2), IntervalSet::single(Rat::one(), Rat::from_int(2)));
        assert_eq!(reduced.objective(), s.objective());
        assert!(reduced.completion(1) <= reduced.completion(2));
        assert_eq!(trace.after.cmp_lex(&trace.before), Ordering::Less);
    }

    #[test]
    fn reduce_in_order_is_fixed_point() {
        let inst = Instance::from_ints(1, 1, &[0, 0]).unwrap();
        let s = Schedule::new(inst, vec![iv(1, 1, 0, 1), iv(2, 1, 1, 2)]);
        let (r, trace) = reduce_pair_traced(&s, 1, 2).unwrap();
        assert!(trace.is_none());
        assert_eq!(r, s);
    }

    #[test]
    fn reduce_disjoint_in_order_supports() {
        // C_i < C_j with disjoint supports: already in order.
        let inst = Instance::from_ints(2, 2, &[0, 0]).unwrap();
        let s = Schedule::new(inst, vec![iv(1, 1, 0, 2), iv(2, 2, 1, 3)]);
        let (r, trace) = reduce_pair_traced(&s, 1, 2).unwrap();
        assert!(trace.is_none());
        assert_eq!(r.completions(), s.completions());
    }

    #[test]
    fn reduce_rejects_bad_pairs() {
        let inst = Instance::from_ints(1, 1, &[0, 0]).unwrap();
        let s = Schedule::new(inst, vec![iv(1, 1, 0, 1), iv(2, 1, 1, 2)]);
        assert!(reduce_pair(&s, 2, 1).is_err());
        assert!(reduce_pair(&s, 1, 1).is_err());
        assert!(reduce_pair(&s, 1, 3).is_err());
    }

    #[test]
    fn reduce_preserves_profile_cardinalities() {
        let inst = Instance::from_ints(2, 2, &[0, 0, 1]).unwrap();
        let s = Schedule::new(
            inst,
            vec![iv(2, 1, 0, 2), iv(1, 2, 0, 1), iv(1, 2, 3, 4), iv(3, 2, 1, 3)],
        );
        assert!(s.verify().passed());
        let before: Vec<(Rat, usize)> = s
            .decompose_blocks()
            .unwrap()
            .into_iter()
            .map(|b| (b.start, b.profile.len()))
            .collect();
        let reduced = reduce_pair(&s, 1, 2).unwrap();
        let after: Vec<(Rat, usize)> = reduced
            .decompose_blocks()
            .unwrap()
            .into_iter()
            .map(|b| (b.start, b.profile.len()))
            .collect();
        assert_eq!(before, after);
    }

    #[test]
    fn busy_moves_late_job_forward() {
        let inst = Instance::from_ints(1, 3, &[0]).unwrap();
        let s = Schedule::new(inst, vec![iv(1, 1, 1, 4)]);
        let busy = make_busy(&s).unwrap();
        assert!(busy.check_busy());
        assert_eq!(busy.completion(1), Rat::from_int(3));
        assert_eq!(busy.objective(), &s.objective() - &Rat::one());
    }

    #[test]
    fn busy_is_identity_on_busy_schedules() {
        let inst = Instance::from_ints(1, 1, &[0, 0]).unwrap();
        let s = Schedule::new(inst, vec![iv(1, 1, 0, 1), iv(2, 1, 1, 2)]);
        assert_eq!(make_busy(&s).unwrap(), s);
    }

    #[test]
    fn busy_fills_parallel_idle_capacity() {
        // m=2: job 2 runs late even though machine 2 idles from the start.
        let inst = Instance::from_ints(2, 2, &[0, 0]).unwrap();
        let s = Schedule::new(inst, vec![iv(1, 1, 0, 2), iv(2, 1, 2, 4)]);
        let busy = make_busy(&s).unwrap();
        assert!(busy.check_busy());
        assert_eq!(busy.completion(2), Rat::from_int(2));
        assert!(busy.objective() < s.objective());
    }

    #[test]
    fn order_completions_sorts() {
        let inst = Instance::from_ints(1, 1, &[0, 0]).unwrap();
        let s = Schedule::new(inst, vec![iv(2, 1, 0, 1), iv(1, 1, 1, 2)]);
        let ordered = order_completions(&s).unwrap();
        let c = ordered.completions();
        assert!(c[0] <= c[1]);
        assert_eq!(ordered.objective(), s.objective());
    }

    #[test]
    fn order_completions_keeps_ordered_vectors() {
        let inst = Instance::from_ints(2, 2, &[0, 0, 1]).unwrap();
        let s = Schedule::new(
            inst,
            vec![iv(1, 1, 0, 2), iv(2, 2, 0, 2), iv(3, 1, 2, 4)],
        );
        let ordered = order_completions(&s).unwrap();
        assert_eq!(ordered.completions(), s.completions());
    }

    #[test]
    fn irreducible_sorts_reversed_jobs() {
        let inst = Instance::from_ints(1, 1, &[0, 0, 0]).unwrap();
        let s = Schedule::new(
            inst,
            vec![iv(3, 1, 0, 1), iv(2, 1, 1, 2), iv(1, 1, 2, 3)],
        );
        assert!(s.check_busy());
        let (result, traces) = make_irreducible_traced(&s).unwrap();
        assert!(result.check_irreducible());
        assert!(!traces.is_empty());
        assert_eq!(result.objective(), s.objective());
        assert_eq!(
            result.support(1),
            IntervalSet::single(Rat::zero(), Rat::one())
        );
        assert_eq!(
            result.support(3),
            IntervalSet::single(Rat::from_int(2), Rat::from_int(3))
        );
        // Integral input stays integral.
        assert!(result.is_integral());
    }

    #[test]
    fn irreducible_is_identity_on_irreducible() {
        let inst = Instance::from_ints(1, 1, &[0, 0]).unwrap();
        let s = Schedule::new(inst, vec![iv(1, 1, 0, 1), iv(2, 1, 1, 2)]);
        let (result, traces) = make_irreducible_traced(&s).unwrap();
        assert!(traces.is_empty());
        assert_eq!(result, s);
    }

    #[test]
    fn potential_examples() {
        // Job on integer slots {0, 1}: H = 0 + 1 = 1.
        let inst = Instance::from_ints(1, 2, &[0]).unwrap();
        let s = Schedule::new(inst, vec![iv(1, 1, 0, 2)]);
        let h = potential(&s, PotentialMode::Integral).unwrap();
        assert_eq!(h.0, vec![Rat::one()]);
        // Continuous: (1/2) ∫_0^2 t dt = 1.
        let hbar = potential(&s, PotentialMode::Continuous).unwrap();
        assert_eq!(hbar.0, vec![Rat::one()]);
    }

    #[test]
    fn potential_integral_mode_rejects_fractional() {
        let inst = Instance::from_ints(1, 1, &[0]).unwrap();
        let s = Schedule::new(
            inst,
            vec![ExecInterval::new(1, 1, Rat::new(1, 2), Rat::new(3, 2))],
        );
        assert!(potential(&s, PotentialMode::Integral).is_err());
        assert!(potential(&s, PotentialMode::Continuous).is_ok());
    }

    #[test]
    fn potential_bounded_by_p_times_max_completion() {
        let inst = Instance::from_ints(2, 3, &[0, 1]).unwrap();
        let s = Schedule::new(inst, vec![iv(1, 1, 0, 3), iv(2, 2, 1, 4)]);
        let h = potential(&s, PotentialMode::Integral).unwrap();
        let bound = &Rat::from_int(3) * &Rat::from_int(4);
        for v in &h.0 {
            assert!(!v.is_negative());
            assert!(v <= &bound);
        }
    }

    #[test]
    fn tidy_swaps_out_of_order_blocks() {
        // One segment [0, ...): {2} then {1} is untidy.
        let inst = Instance::from_ints(1, 1, &[0, 0]).unwrap();
        let s = Schedule::new(inst, vec![iv(2, 1, 0, 1), iv(1, 1, 1, 2)]);
        // Completions 2, 1 are unsorted; order first.
        let ordered = order_completions(&s).unwrap();
        let tidy = make_tidy(&ordered).unwrap();
        assert!(is_tidy(&tidy).unwrap());
        assert!(tidy.objective() <= s.objective());
    }

    #[test]
    fn tidy_identity_and_preconditions() {
        let inst = Instance::from_ints(1, 1, &[0, 0]).unwrap();
        let s = Schedule::new(inst, vec![iv(1, 1, 0, 1), iv(2, 1, 1, 2)]);
        assert_eq!(make_tidy(&s).unwrap(), s);

        // Unsorted completions are rejected.
        let inst = Instance::from_ints(1, 1, &[0, 0]).unwrap();
        let s = Schedule::new(inst, vec![iv(2, 1, 0, 1), iv(1, 1, 1, 2)]);
        assert!(make_tidy(&s).is_err());
    }

    #[test]
    fn tidy_moves_small_jobs_left_within_segment() {
        // m=2, one segment: blocks {3} then {1,2} (after completions are
        // ordered this is reachable); tidy must put {1,2} first.
        let inst = Instance::from_ints(2, 2, &[0, 0, 0]).unwrap();
        let s = Schedule::new(
            inst,
            vec![iv(3, 1, 0, 1), iv(1, 1, 1, 3), iv(2, 2, 1, 3), iv(3, 1, 3, 4)],
        );
        assert!(s.verify().passed());
        let tidy = make_tidy(&s).unwrap();
        assert!(is_tidy(&tidy).unwrap());
        let blocks = tidy.decompose_blocks().unwrap();
        assert_eq!(blocks[0].profile, vec![1, 2]);
        // No completion increased.
        for j in 1..=3 {
            assert!(tidy.completion(j) <= s.completion(j));
        }
    }

    #[test]
    fn profile_order() {
        assert_eq!(profile_cmp(&[1, 2], &[1, 2]), Ordering::Equal);
        assert_eq!(profile_cmp(&[1, 3], &[1, 4]), Ordering::Less);
        // The block containing the smaller exclusive job comes first:
        // {1,2} precedes {1}.
        assert_eq!(profile_cmp(&[1, 2], &[1]), Ordering::Less);
        assert_eq!(profile_cmp(&[1], &[1, 2]), Ordering::Greater);
        assert_eq!(profile_cmp(&[], &[1]), Ordering::Greater);
    }
}
