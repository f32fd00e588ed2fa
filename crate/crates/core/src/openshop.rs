//! Unit-time open shop with release dates.
//!
//! Every job needs one unit of work on each of the `m` machines, in any
//! order, never on two machines at once. Minimizing the total completion
//! time reduces to the equal-length parallel problem with `p = m` and
//! integer preemptions: solve that, then hand each job's `m` occupied unit
//! slots to distinct machines. The machine assignment is an `m`-edge
//! coloring of the bipartite slots-by-jobs multigraph; padding it to an
//! `m`-regular multigraph with dummy jobs makes every color class a
//! perfect matching, found by augmenting paths.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::flow::integralize;
use crate::instance::Instance;
use crate::lp;
use crate::rational::Rat;
use crate::schedule::Schedule;

/// An open-shop instance: `m` machines, unit operations, integer releases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenShopInstance {
    m: usize,
    releases: Vec<u64>,
}

impl OpenShopInstance {
    pub fn new(m: usize, releases: Vec<u64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInstance("machine count must be >= 1".into()));
        }
        if releases.is_empty() {
            return Err(Error::InvalidInstance("need at least one job".into()));
        }
        Ok(OpenShopInstance { m, releases })
    }

    pub fn machines(&self) -> usize {
        self.m
    }

    pub fn jobs(&self) -> usize {
        self.releases.len()
    }

    pub fn releases(&self) -> &[u64] {
        &self.releases
    }
}

#[derive(Serialize, Deserialize)]
struct OpenShopWire {
    m: usize,
    releases: Vec<u64>,
}

impl Serialize for OpenShopInstance {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        OpenShopWire { m: self.m, releases: self.releases.clone() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OpenShopInstance {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = OpenShopWire::deserialize(deserializer)?;
        OpenShopInstance::new(wire.m, wire.releases).map_err(D::Error::custom)
    }
}

/// One unit operation: `job` runs on `machine` during `[slot, slot + 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpAssignment {
    pub job: usize,
    pub machine: usize,
    pub slot: u64,
}

/// A complete open-shop schedule. Serializes as a plain list of
/// assignments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenShopSchedule {
    pub assignments: Vec<OpAssignment>,
}

impl Serialize for OpenShopSchedule {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.assignments.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OpenShopSchedule {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        Ok(OpenShopSchedule { assignments: Vec::deserialize(deserializer)? })
    }
}

impl OpenShopSchedule {
    /// Checks the open-shop invariants: every (job, machine) pair exactly
    /// once, no machine or job doubly booked in a slot, releases
    /// respected.
    pub fn validate(&self, instance: &OpenShopInstance) -> Result<()> {
        let n = instance.jobs();
        let m = instance.machines();
        if self.assignments.len() != n * m {
            return Err(Error::InvalidArgument(format!(
                "expected {} operations, got {}",
                n * m,
                self.assignments.len()
            )));
        }
        let mut job_machine = vec![false; n * m];
        let mut machine_slot = std::collections::HashSet::new();
        let mut job_slot = std::collections::HashSet::new();
        for op in &self.assignments {
            if op.job == 0 || op.job > n {
                return Err(Error::InvalidArgument(format!("job {} out of range", op.job)));
            }
            if op.machine == 0 || op.machine > m {
                return Err(Error::InvalidArgument(format!(
                    "machine {} out of range",
                    op.machine
                )));
            }
            let jm = (op.job - 1) * m + (op.machine - 1);
            if job_machine[jm] {
                return Err(Error::InvalidArgument(format!(
                    "job {} meets machine {} twice",
                    op.job, op.machine
                )));
            }
            job_machine[jm] = true;
            if !machine_slot.insert((op.machine, op.slot)) {
                return Err(Error::InvalidArgument(format!(
                    "machine {} hosts two jobs in slot {}",
                    op.machine, op.slot
                )));
            }
            if !job_slot.insert((op.job, op.slot)) {
                return Err(Error::InvalidArgument(format!(
                    "job {} runs on two machines in slot {}",
                    op.job, op.slot
                )));
            }
            if op.slot < instance.releases()[op.job - 1] {
                return Err(Error::InvalidArgument(format!(
                    "job {} starts in slot {} before its release {}",
                    op.job,
                    op.slot,
                    instance.releases()[op.job - 1]
                )));
            }
        }
        Ok(())
    }

    /// Completion time of a job: one past its last occupied slot.
    pub fn completion(&self, job: usize) -> u64 {
        self.assignments
            .iter()
            .filter(|op| op.job == job)
            .map(|op| op.slot + 1)
            .max()
            .unwrap_or(0)
    }

    /// `sum_i C_i` over all jobs.
    pub fn objective(&self, instance: &OpenShopInstance) -> Rat {
        let total: u64 = (1..=instance.jobs()).map(|j| self.completion(j)).sum();
        Rat::from_bigint(total.into())
    }
}

/// The equivalent parallel-machine instance: `m` machines, `p = m`, same
/// releases (sorted by the instance constructor).
pub fn to_parallel(instance: &OpenShopInstance) -> Instance {
    Instance::new(
        instance.m,
        Rat::from_bigint(instance.m.into()),
        instance.releases.iter().map(|&r| Rat::from_bigint(r.into())).collect(),
    )
    .expect("open-shop instances map to valid parallel instances")
}

/// Assigns machines to the unit slots of an integral parallel schedule of
/// `to_parallel(instance)`. The occupied (job, slot) pairs are preserved
/// exactly; only machine labels are introduced. Assignments use the
/// open-shop instance's original job numbering.
pub fn color_operations(
    instance: &OpenShopInstance,
    integral: &Schedule,
) -> Result<OpenShopSchedule> {
    let n = instance.jobs();
    let m = instance.machines();
    if !integral.is_integral() {
        return Err(Error::NonIntegral(
            "machine coloring needs an integral parallel schedule".into(),
        ));
    }

    // Occupied unit slots per sorted job; each job must hold exactly m.
    let mut job_slots: Vec<Vec<u64>> = Vec::with_capacity(n);
    for j in 1..=n {
        let mut slots = Vec::new();
        for (s, e) in integral.support(j).spans() {
            let mut t = s.to_bigint().expect("integral");
            let end = e.to_bigint().expect("integral");
            while t < end {
                let slot = u64::try_from(&t).map_err(|_| {
                    Error::InvalidArgument(format!("job {j} runs at negative time {t}"))
                })?;
                slots.push(slot);
                t += 1;
            }
        }
        if slots.len() != m {
            return Err(Error::InvalidArgument(format!(
                "job {j} occupies {} unit slots, expected m = {m}",
                slots.len()
            )));
        }
        job_slots.push(slots);
    }

    let mut all_slots: Vec<u64> = job_slots.iter().flatten().copied().collect();
    all_slots.sort_unstable();
    all_slots.dedup();
    let k = all_slots.len();
    let slot_index = |slot: u64| all_slots.binary_search(&slot).expect("known slot");

    // Edges of the jobs-by-slots multigraph, jobs first so the matching
    // scan prefers the lowest job and its lowest slot.
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(k * m);
    for (j0, slots) in job_slots.iter().enumerate() {
        let mut sorted = slots.clone();
        sorted.sort_unstable();
        for slot in sorted {
            edges.push((j0, slot_index(slot)));
        }
    }
    let mut slot_degree = vec![0usize; k];
    for &(_, s) in &edges {
        slot_degree[s] += 1;
        if slot_degree[s] > m {
            return Err(Error::InvalidArgument(format!(
                "slot {} hosts more than m jobs",
                all_slots[s]
            )));
        }
    }
    // Pad with dummy jobs until the multigraph is m-regular: every slot
    // reaches degree m and each dummy absorbs exactly m edge endpoints
    // (parallel edges allowed). Then each color class is a perfect
    // matching of the k-by-k regular multigraph.
    let lefts = k.max(n);
    let mut next_left = n;
    let mut room = m;
    for (s, &degree) in slot_degree.iter().enumerate() {
        for _ in degree..m {
            if room == 0 {
                next_left += 1;
                room = m;
            }
            edges.push((next_left, s));
            room -= 1;
        }
    }
    debug_assert_eq!(edges.len(), k * m);
    debug_assert!(next_left < lefts.max(n + 1));

    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); lefts];
    for (e, &(l, _)) in edges.iter().enumerate() {
        adjacency[l].push(e);
    }

    let mut used = vec![false; edges.len()];
    let mut assignments = Vec::with_capacity(n * m);
    for color in 1..=m {
        // Kuhn's augmenting-path matching over the unused edges.
        let mut match_edge: Vec<Option<usize>> = vec![None; k];
        fn augment(
            left: usize,
            adjacency: &[Vec<usize>],
            edges: &[(usize, usize)],
            used: &[bool],
            visited: &mut [bool],
            match_edge: &mut [Option<usize>],
        ) -> bool {
            for &e in &adjacency[left] {
                if used[e] {
                    continue;
                }
                let s = edges[e].1;
                if visited[s] {
                    continue;
                }
                visited[s] = true;
                let displaced = match_edge[s].map(|prev| edges[prev].0);
                if displaced.is_none()
                    || augment(displaced.unwrap(), adjacency, edges, used, visited, match_edge)
                {
                    match_edge[s] = Some(e);
                    return true;
                }
            }
            false
        }
        for left in 0..lefts {
            if adjacency[left].iter().all(|&e| used[e]) && left >= n {
                continue;
            }
            let mut visited = vec![false; k];
            if !augment(left, &adjacency, &edges, &used, &mut visited, &mut match_edge) {
                return Err(Error::Infeasible(format!(
                    "matching round {color} left node {left} unsaturated"
                )));
            }
        }
        for s in 0..k {
            let Some(e) = match_edge[s] else {
                return Err(Error::Infeasible(format!(
                    "matching round {color} left slot {} uncovered",
                    all_slots[s]
                )));
            };
            used[e] = true;
            let left = edges[e].0;
            if left < n {
                // Map the sorted parallel job back to the original
                // open-shop numbering.
                let original = integral.instance().original_position(left + 1) + 1;
                assignments.push(OpAssignment {
                    job: original,
                    machine: color,
                    slot: all_slots[s],
                });
            }
        }
    }
    assignments.sort_by_key(|op| (op.job, op.slot));
    Ok(OpenShopSchedule { assignments })
}

/// Solves the open-shop instance optimally: parallel relaxation, exact
/// solve, integralization, then machine coloring. Returns the schedule and
/// its total completion time.
pub fn solve_openshop(instance: &OpenShopInstance) -> Result<(OpenShopSchedule, Rat)> {
    let parallel = to_parallel(instance);
    let (schedule, _) = lp::solve(&parallel);
    let integral = integralize(&parallel, &schedule)?;
    let colored = color_operations(instance, &integral)?;
    let objective = colored.objective(instance);
    Ok((colored, objective))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::ExecInterval;

    fn iv(job: usize, machine: usize, start: i64, end: i64) -> ExecInterval {
        ExecInterval::new(job, machine, Rat::from_int(start), Rat::from_int(end))
    }

    #[test]
    fn parallel_mapping() {
        let os = OpenShopInstance::new(2, vec![0, 0]).unwrap();
        let p = to_parallel(&os);
        assert_eq!(p.machines(), 2);
        assert_eq!(p.processing_time(), &Rat::from_int(2));
        assert_eq!(p.releases(), &[Rat::zero(), Rat::zero()]);

        let os = OpenShopInstance::new(3, vec![0, 1, 5]).unwrap();
        let p = to_parallel(&os);
        assert_eq!(p.processing_time(), &Rat::from_int(3));
        assert_eq!(p.jobs(), 3);

        let os = OpenShopInstance::new(1, vec![0]).unwrap();
        let p = to_parallel(&os);
        assert_eq!(p.processing_time(), &Rat::one());
    }

    #[test]
    fn coloring_single_machine_keeps_machine_one() {
        let os = OpenShopInstance::new(1, vec![0, 0]).unwrap();
        let parallel = to_parallel(&os);
        let s = Schedule::new(parallel, vec![iv(1, 1, 0, 1), iv(2, 1, 1, 2)]);
        let colored = color_operations(&os, &s).unwrap();
        colored.validate(&os).unwrap();
        assert!(colored.assignments.iter().all(|op| op.machine == 1));
        assert_eq!(colored.objective(&os), Rat::from_int(3));
    }

    #[test]
    fn coloring_two_machines_two_jobs() {
        let os = OpenShopInstance::new(2, vec![0, 0]).unwrap();
        let parallel = to_parallel(&os);
        // Both jobs on slots {0, 1}.
        let s = Schedule::new(parallel, vec![iv(1, 1, 0, 2), iv(2, 2, 0, 2)]);
        let colored = color_operations(&os, &s).unwrap();
        colored.validate(&os).unwrap();
        assert_eq!(colored.objective(&os), Rat::from_int(4));
        // Occupancy preserved: each job has ops exactly in slots 0 and 1.
        for j in 1..=2 {
            let mut slots: Vec<u64> = colored
                .assignments
                .iter()
                .filter(|op| op.job == j)
                .map(|op| op.slot)
                .collect();
            slots.sort_unstable();
            assert_eq!(slots, vec![0, 1]);
        }
    }

    #[test]
    fn coloring_rejects_fractional_or_short_schedules() {
        let os = OpenShopInstance::new(2, vec![0, 0]).unwrap();
        let parallel = to_parallel(&os);
        let fractional = Schedule::new(
            parallel.clone(),
            vec![ExecInterval::new(1, 1, Rat::new(1, 2), Rat::new(5, 2))],
        );
        assert!(color_operations(&os, &fractional).is_err());
        let short = Schedule::new(parallel, vec![iv(1, 1, 0, 1)]);
        assert!(color_operations(&os, &short).is_err());
    }

    #[test]
    fn solve_two_machines_symmetric() {
        let os = OpenShopInstance::new(2, vec![0, 0]).unwrap();
        let (schedule, objective) = solve_openshop(&os).unwrap();
        schedule.validate(&os).unwrap();
        assert_eq!(objective, Rat::from_int(4));
    }

    #[test]
    fn solve_single_machine_queue() {
        let os = OpenShopInstance::new(1, vec![0, 0, 0]).unwrap();
        let (schedule, objective) = solve_openshop(&os).unwrap();
        schedule.validate(&os).unwrap();
        assert_eq!(objective, Rat::from_int(6));
    }

    #[test]
    fn solve_respects_releases_and_original_numbering() {
        // Unsorted input releases: job 1 released late.
        let os = OpenShopInstance::new(2, vec![3, 0]).unwrap();
        let (schedule, _) = solve_openshop(&os).unwrap();
        schedule.validate(&os).unwrap();
        assert!(schedule
            .assignments
            .iter()
            .filter(|op| op.job == 1)
            .all(|op| op.slot >= 3));
    }

    #[test]
    fn validate_catches_conflicts() {
        let os = OpenShopInstance::new(2, vec![0, 0]).unwrap();
        // Job 1 on two machines in slot 0.
        let bad = OpenShopSchedule {
            assignments: vec![
                OpAssignment { job: 1, machine: 1, slot: 0 },
                OpAssignment { job: 1, machine: 2, slot: 0 },
                OpAssignment { job: 2, machine: 1, slot: 1 },
                OpAssignment { job: 2, machine: 2, slot: 2 },
            ],
        };
        assert!(bad.validate(&os).is_err());
    }

    #[test]
    fn wire_format() {
        let os: OpenShopInstance =
            serde_json::from_str(r#"{"m": 2, "releases": [0, 3]}"#).unwrap();
        assert_eq!(os.machines(), 2);
        let sched = OpenShopSchedule {
            assignments: vec![OpAssignment { job: 1, machine: 2, slot: 0 }],
        };
        let json = serde_json::to_string(&sched).unwrap();
        assert_eq!(json, r#"[{"job":1,"machine":2,"slot":0}]"#);
        let back: OpenShopSchedule = serde_json::from_str(&json).unwrap();
        assert_eq!(back, sched);
    }
}
