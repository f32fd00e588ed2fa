//! Schedules, their verification, and block decomposition.
//!
//! A schedule is a finite list of per-job, per-machine execution intervals.
//! The verifier checks the defining conditions of the schedule model:
//!
//! * (s1) at most `m` jobs run at any time,
//! * (s2) no job runs before its release,
//! * (s3) each job runs in finitely many intervals,
//! * (s4) each job runs for exactly its processing time,
//!
//! plus the machine-level side conditions (no job on two machines at once,
//! no machine running two jobs at once). Failures are report entries, never
//! panics, so arbitrary untrusted input can be verified.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::intervals::IntervalSet;
use crate::rational::Rat;

/// One execution interval: `job` runs on `machine` during `[start, end)`.
/// Job and machine numbers are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecInterval {
    pub job: usize,
    pub machine: usize,
    pub start: Rat,
    pub end: Rat,
}

impl ExecInterval {
    pub fn new(job: usize, machine: usize, start: Rat, end: Rat) -> Self {
        ExecInterval { job, machine, start, end }
    }
}

/// A maximal time interval with a constant profile and no release time in
/// its interior.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub start: Rat,
    pub end: Rat,
    /// Sorted set of jobs running throughout `[start, end)`.
    pub profile: Vec<usize>,
}

impl Block {
    pub fn len(&self) -> Rat {
        &self.end - &self.start
    }

    pub fn is_empty(&self) -> bool {
        self.profile.is_empty()
    }
}

/// The conditions checked by the verifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    WellFormed,
    S1MachineCount,
    S2Release,
    S3FiniteSupport,
    S4TotalWork,
    JobOverlap,
    MachineOverlap,
    Lemma4A,
    Lemma4B,
    Lemma4C,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Condition::WellFormed => "well-formed",
            Condition::S1MachineCount => "(s1) at most m jobs at any time",
            Condition::S2Release => "(s2) no job before its release",
            Condition::S3FiniteSupport => "(s3) finite union of intervals",
            Condition::S4TotalWork => "(s4) total work per job",
            Condition::JobOverlap => "job on one machine at a time",
            Condition::MachineOverlap => "machine runs one job at a time",
            Condition::Lemma4A => "structure (a) for departed jobs",
            Condition::Lemma4B => "structure (b) for arrived jobs",
            Condition::Lemma4C => "structure (c) for persistent jobs",
        };
        f.write_str(name)
    }
}

/// Outcome of a single verifier condition.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub condition: Condition,
    pub passed: bool,
    /// First counterexample, when the check failed.
    pub detail: Option<String>,
}

/// Pass/fail per condition plus the exact objective value.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub outcomes: Vec<CheckOutcome>,
    pub objective: Rat,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.outcomes.iter().find(|o| !o.passed)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.outcomes {
            match (&o.passed, &o.detail) {
                (true, _) => writeln!(f, "ok   {}", o.condition)?,
                (false, Some(d)) => writeln!(f, "FAIL {}: {}", o.condition, d)?,
                (false, None) => writeln!(f, "FAIL {}", o.condition)?,
            }
        }
        write!(f, "objective: {}", self.objective)
    }
}

/// A schedule for an equal-length instance.
///
/// Zero-length intervals carry no execution and are dropped on
/// construction; they appear only inside normal solutions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    instance: Instance,
    intervals: Vec<ExecInterval>,
}

impl Schedule {
    pub fn new(instance: Instance, mut intervals: Vec<ExecInterval>) -> Schedule {
        intervals.retain(|iv| iv.start != iv.end);
        intervals.sort_by(|a, b| {
            (a.job, &a.start, a.machine).cmp(&(b.job, &b.start, b.machine))
        });
        Schedule { instance, intervals }
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn intervals(&self) -> &[ExecInterval] {
        &self.intervals
    }

    /// Completion time of `job`: the supremum of its execution times, or
    /// its release time if it never runs.
    pub fn completion(&self, job: usize) -> Rat {
        self.intervals
            .iter()
            .filter(|iv| iv.job == job)
            .map(|iv| iv.end.clone())
            .max()
            .unwrap_or_else(|| self.instance.release(job).clone())
    }

    pub fn completions(&self) -> Vec<Rat> {
        (1..=self.instance.jobs()).map(|j| self.completion(j)).collect()
    }

    /// The objective `sum_j C_j` as an exact rational.
    pub fn objective(&self) -> Rat {
        self.completions().into_iter().sum()
    }

    /// The set of times when `job` executes.
    pub fn support(&self, job: usize) -> IntervalSet {
        IntervalSet::from_spans(
            self.intervals
                .iter()
                .filter(|iv| iv.job == job)
                .map(|iv| (iv.start.clone(), iv.end.clone()))
                .collect(),
        )
    }

    pub fn supports(&self) -> Vec<IntervalSet> {
        (1..=self.instance.jobs()).map(|j| self.support(j)).collect()
    }

    /// True when every preemption happens at an integer time.
    pub fn is_integral(&self) -> bool {
        self.intervals.iter().all(|iv| iv.start.is_integer() && iv.end.is_integer())
    }

    /// Runs every structural check and reports pass/fail per condition.
    pub fn verify(&self) -> VerificationReport {
        let n = self.instance.jobs();
        let p = self.instance.processing_time();
        let processing = vec![p.clone(); n];
        verify_core(
            self.instance.machines(),
            self.instance.releases(),
            &processing,
            &self.intervals,
        )
    }

    /// Splits the schedule into maximal constant-profile blocks, sweeping
    /// interval endpoints and release times. Fails with the first violated
    /// verifier condition if the schedule is malformed.
    pub fn decompose_blocks(&self) -> Result<Vec<Block>> {
        let report = self.verify();
        if let Some(fail) = report.first_failure() {
            return Err(Error::InvalidSchedule {
                condition: fail.condition,
                detail: fail.detail.clone().unwrap_or_default(),
            });
        }
        Ok(blocks_of(self.instance.releases(), &self.intervals))
    }

    /// True when no released job runs later while a machine idles earlier.
    /// Malformed schedules are never busy.
    pub fn check_busy(&self) -> bool {
        match self.decompose_blocks() {
            Ok(blocks) => {
                busy_violation(&blocks, self.instance.releases(), self.instance.machines())
                    .is_none()
            }
            Err(_) => false,
        }
    }

    /// True when the schedule is busy and every ordered pair of blocks
    /// satisfies `max(X(s) - X(t)) < min(X(t) - X(s))`, with
    /// `max({}) = -inf` and `min({}) = +inf`.
    pub fn check_irreducible(&self) -> bool {
        if !self.check_busy() {
            return false;
        }
        let blocks = self.decompose_blocks().expect("busy implies valid");
        for (a, bu) in blocks.iter().enumerate() {
            for bt in &blocks[a + 1..] {
                let only_u = set_difference(&bu.profile, &bt.profile);
                let only_t = set_difference(&bt.profile, &bu.profile);
                match (only_u.last(), only_t.first()) {
                    (Some(&max_u), Some(&min_t)) if max_u >= min_t => return false,
                    _ => {}
                }
            }
        }
        true
    }

    /// Validates the structural characterization of irreducible schedules
    /// over all block pairs and jobs; any counterexample indicates an
    /// implementation bug. Requires an irreducible schedule.
    pub fn check_lemma4(&self) -> Result<VerificationReport> {
        if !self.check_irreducible() {
            return Err(Error::Precondition(
                "structure check requires an irreducible schedule".into(),
            ));
        }
        let blocks = self.decompose_blocks()?;
        let m = self.instance.machines();
        let mut fail_a: Option<String> = None;
        let mut fail_b: Option<String> = None;
        let mut fail_c: Option<String> = None;
        for (a, bu) in blocks.iter().enumerate() {
            for bt in &blocks[a + 1..] {
                for k in 1..=self.instance.jobs() {
                    if self.instance.release(k) > &bu.start {
                        continue;
                    }
                    let in_u = bu.profile.binary_search(&k).is_ok();
                    let in_t = bt.profile.binary_search(&k).is_ok();
                    let bef_u = bu.profile.iter().filter(|&&i| i < k).count();
                    let bef_t = bt.profile.iter().filter(|&&i| i < k).count();
                    let aft_u = bu.profile.iter().filter(|&&i| i > k).count();
                    let aft_t = bt.profile.iter().filter(|&&i| i > k).count();
                    let place = || {
                        format!(
                            "job {} between blocks [{}, {}) and [{}, {})",
                            k, bu.start, bu.end, bt.start, bt.end
                        )
                    };
                    if in_u && !in_t {
                        if bef_t > bef_u && fail_a.is_none() {
                            fail_a = Some(place());
                        }
                    } else if !in_u && in_t {
                        if (bu.profile.len() != m || aft_t < aft_u || bef_t >= bef_u)
                            && fail_b.is_none()
                        {
                            fail_b = Some(place());
                        }
                    } else if in_u && in_t && (bef_t > bef_u || aft_t < aft_u) && fail_c.is_none()
                    {
                        fail_c = Some(place());
                    }
                }
            }
        }
        let outcomes = vec![
            CheckOutcome {
                condition: Condition::Lemma4A,
                passed: fail_a.is_none(),
                detail: fail_a,
            },
            CheckOutcome {
                condition: Condition::Lemma4B,
                passed: fail_b.is_none(),
                detail: fail_b,
            },
            CheckOutcome {
                condition: Condition::Lemma4C,
                passed: fail_c.is_none(),
                detail: fail_c,
            },
        ];
        Ok(VerificationReport { outcomes, objective: self.objective() })
    }

    /// Rebuilds the schedule with the canonical machine assignment: within
    /// each block, profile jobs go to machines in increasing index order.
    /// Profiles, supports and completion times are unchanged.
    pub fn canonical_machines(&self) -> Schedule {
        Schedule::from_supports(self.instance.clone(), &self.supports())
    }

    /// Builds a schedule from per-job supports (index 0 is job 1), using
    /// the canonical machine assignment.
    pub fn from_supports(instance: Instance, supports: &[IntervalSet]) -> Schedule {
        let mut events: Vec<Rat> = instance.releases().to_vec();
        for s in supports {
            for (a, b) in s.spans() {
                events.push(a.clone());
                events.push(b.clone());
            }
        }
        events.sort();
        events.dedup();
        let mut blocks = Vec::new();
        for w in events.windows(2) {
            let profile: Vec<usize> = supports
                .iter()
                .enumerate()
                .filter(|(_, s)| s.contains(&w[0]))
                .map(|(i, _)| i + 1)
                .collect();
            blocks.push(Block { start: w[0].clone(), end: w[1].clone(), profile });
        }
        Schedule::from_blocks(instance, &blocks)
    }

    /// Builds a schedule from blocks with the canonical machine
    /// assignment, merging adjacent intervals of the same job and machine.
    pub fn from_blocks(instance: Instance, blocks: &[Block]) -> Schedule {
        let mut raw: Vec<ExecInterval> = Vec::new();
        for block in blocks {
            if block.start >= block.end {
                continue;
            }
            let mut profile = block.profile.clone();
            profile.sort_unstable();
            for (rank, &job) in profile.iter().enumerate() {
                raw.push(ExecInterval::new(
                    job,
                    rank + 1,
                    block.start.clone(),
                    block.end.clone(),
                ));
            }
        }
        raw.sort_by(|a, b| (a.job, a.machine, &a.start).cmp(&(b.job, b.machine, &b.start)));
        let mut merged: Vec<ExecInterval> = Vec::new();
        for iv in raw {
            match merged.last_mut() {
                Some(last)
                    if last.job == iv.job && last.machine == iv.machine && last.end == iv.start =>
                {
                    last.end = iv.end;
                }
                _ => merged.push(iv),
            }
        }
        Schedule::new(instance, merged)
    }

    /// Serializes to the wire JSON format, mapping job numbers back to
    /// their original input positions.
    pub fn to_wire(&self) -> ScheduleWire {
        let intervals = self
            .intervals
            .iter()
            .map(|iv| ExecInterval {
                job: self.instance.original_position(iv.job) + 1,
                machine: iv.machine,
                start: iv.start.clone(),
                end: iv.end.clone(),
            })
            .collect();
        ScheduleWire { intervals, objective: Some(self.objective()) }
    }

    /// Parses the wire JSON format against an instance, mapping original
    /// job numbers to release order.
    pub fn from_wire(instance: Instance, wire: ScheduleWire) -> Result<Schedule> {
        let n = instance.jobs();
        let mut intervals = Vec::with_capacity(wire.intervals.len());
        for iv in wire.intervals {
            if iv.job == 0 || iv.job > n {
                return Err(Error::InvalidArgument(format!(
                    "job index {} out of range 1..={n}",
                    iv.job
                )));
            }
            intervals.push(ExecInterval {
                job: instance.sorted_job_for_input(iv.job - 1),
                machine: iv.machine,
                start: iv.start,
                end: iv.end,
            });
        }
        Ok(Schedule::new(instance, intervals))
    }
}

/// Wire form of a schedule: intervals with 1-based original job numbers
/// plus the exact objective.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScheduleWire {
    pub intervals: Vec<ExecInterval>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<Rat>,
}

/// Constant-profile time slices between consecutive event points. Profiles
/// are multisets here: a job running on two machines at once appears twice.
pub(crate) struct Slice {
    pub start: Rat,
    pub end: Rat,
    pub jobs: Vec<usize>,
}

pub(crate) fn sweep_slices(releases: &[Rat], intervals: &[ExecInterval]) -> Vec<Slice> {
    let mut events: Vec<Rat> = releases.to_vec();
    for iv in intervals {
        events.push(iv.start.clone());
        events.push(iv.end.clone());
    }
    events.sort();
    events.dedup();
    let mut slices = Vec::new();
    for w in events.windows(2) {
        let mut jobs: Vec<usize> = intervals
            .iter()
            .filter(|iv| iv.start <= w[0] && w[1] <= iv.end)
            .map(|iv| iv.job)
            .collect();
        jobs.sort_unstable();
        slices.push(Slice { start: w[0].clone(), end: w[1].clone(), jobs });
    }
    slices
}

/// Sorted-set difference `a \ b`.
pub(crate) fn set_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().filter(|x| b.binary_search(x).is_err()).copied().collect()
}

/// Block decomposition of a valid schedule: merges adjacent equal-profile
/// slices unless a release time separates them, and trims the domain to
/// `[min r_j, max C_j)`.
pub(crate) fn blocks_of(releases: &[Rat], intervals: &[ExecInterval]) -> Vec<Block> {
    let min_r = releases.iter().min().cloned().unwrap_or_else(Rat::zero);
    let max_c = intervals.iter().map(|iv| iv.end.clone()).max().unwrap_or_else(|| min_r.clone());
    let slices = sweep_slices(releases, intervals);
    let mut blocks: Vec<Block> = Vec::new();
    for s in slices {
        if s.end <= min_r || s.start >= max_c {
            continue;
        }
        let mut profile = s.jobs.clone();
        profile.dedup();
        let at_release = releases.contains(&s.start);
        match blocks.last_mut() {
            Some(last) if !at_release && last.profile == profile && last.end == s.start => {
                last.end = s.end;
            }
            _ => blocks.push(Block { start: s.start, end: s.end, profile }),
        }
    }
    blocks
}

/// First busy violation `(idle block index, job)` if any: some machine is
/// idle in a block while an already-released job runs in a later block.
pub(crate) fn busy_violation(
    blocks: &[Block],
    releases: &[Rat],
    machines: usize,
) -> Option<(usize, usize)> {
    for (bi, b) in blocks.iter().enumerate() {
        if b.profile.len() >= machines {
            continue;
        }
        for later in &blocks[bi + 1..] {
            for &j in &later.profile {
                if releases[j - 1] <= b.start && b.profile.binary_search(&j).is_err() {
                    return Some((bi, j));
                }
            }
        }
    }
    None
}

/// The shared verifier: checks (s1)-(s4) and the machine side conditions
/// against per-job release and processing times.
pub(crate) fn verify_core(
    machines: usize,
    releases: &[Rat],
    processing: &[Rat],
    intervals: &[ExecInterval],
) -> VerificationReport {
    let n = releases.len();

    let mut well_formed = None;
    for iv in intervals {
        if iv.job == 0 || iv.job > n {
            well_formed = Some(format!("job index {} out of range 1..={n}", iv.job));
            break;
        }
        if iv.machine == 0 || iv.machine > machines {
            well_formed =
                Some(format!("machine index {} out of range 1..={machines}", iv.machine));
            break;
        }
        if iv.start > iv.end {
            well_formed = Some(format!(
                "interval for job {} has start {} after end {}",
                iv.job, iv.start, iv.end
            ));
            break;
        }
    }

    // The remaining checks only consider well-formed intervals so that one
    // malformed entry does not cascade into every condition.
    let sane: Vec<ExecInterval> = intervals
        .iter()
        .filter(|iv| {
            iv.job >= 1 && iv.job <= n && iv.machine >= 1 && iv.machine <= machines
                && iv.start <= iv.end
        })
        .cloned()
        .collect();
    let slices = sweep_slices(releases, &sane);

    let mut s1 = None;
    for s in &slices {
        let mut distinct = s.jobs.clone();
        distinct.dedup();
        if distinct.len() > machines {
            s1 = Some(format!(
                "{} jobs run during [{}, {}), only {machines} machines",
                distinct.len(),
                s.start,
                s.end
            ));
            break;
        }
    }

    let mut s2 = None;
    'outer: for s in &slices {
        for &j in &s.jobs {
            if s.start < releases[j - 1] {
                s2 = Some(format!(
                    "job {j} runs at {} before its release {}",
                    s.start,
                    releases[j - 1]
                ));
                break 'outer;
            }
        }
    }

    // (s3) holds by construction: supports are finite interval lists.
    let s3 = None;

    let mut s4 = None;
    for j in 1..=n {
        let support = IntervalSet::from_spans(
            sane.iter()
                .filter(|iv| iv.job == j)
                .map(|iv| (iv.start.clone(), iv.end.clone()))
                .collect(),
        );
        let measured = support.measure();
        if measured != processing[j - 1] {
            s4 = Some(format!(
                "job {j} executes for {} instead of {}",
                measured,
                processing[j - 1]
            ));
            break;
        }
    }

    let mut job_overlap = None;
    'job: for j in 1..=n {
        let mut ivs: Vec<&ExecInterval> = sane.iter().filter(|iv| iv.job == j).collect();
        ivs.sort_by(|a, b| a.start.cmp(&b.start));
        for w in ivs.windows(2) {
            if w[1].start < w[0].end {
                job_overlap = Some(format!(
                    "job {j} runs on machines {} and {} at {}",
                    w[0].machine, w[1].machine, w[1].start
                ));
                break 'job;
            }
        }
    }

    let mut machine_overlap = None;
    'mach: for q in 1..=machines {
        let mut ivs: Vec<&ExecInterval> = sane.iter().filter(|iv| iv.machine == q).collect();
        ivs.sort_by(|a, b| a.start.cmp(&b.start));
        for w in ivs.windows(2) {
            if w[1].start < w[0].end {
                machine_overlap = Some(format!(
                    "machine {q} runs jobs {} and {} at {}",
                    w[0].job, w[1].job, w[1].start
                ));
                break 'mach;
            }
        }
    }

    let objective: Rat = (1..=n)
        .map(|j| {
            sane.iter()
                .filter(|iv| iv.job == j)
                .map(|iv| iv.end.clone())
                .max()
                .unwrap_or_else(|| releases[j - 1].clone())
        })
        .sum();

    let outcome = |condition, detail: Option<String>| CheckOutcome {
        condition,
        passed: detail.is_none(),
        detail,
    };
    VerificationReport {
        outcomes: vec![
            outcome(Condition::WellFormed, well_formed),
            outcome(Condition::S1MachineCount, s1),
            outcome(Condition::S2Release, s2),
            outcome(Condition::S3FiniteSupport, s3),
            outcome(Condition::S4TotalWork, s4),
            outcome(Condition::JobOverlap, job_overlap),
            outcome(Condition::MachineOverlap, machine_overlap),
        ],
        objective,
    }
}
