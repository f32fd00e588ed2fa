//! 3-Partition hardness instances and the brute-force oracles.
//!
//! The reduction maps a 3-Partition instance (3n integers summing to `ny`,
//! each strictly between `y/4` and `y/2`) to a scheduling instance with
//! arbitrary processing times on `n` machines: scaled x-jobs, long B-jobs
//! released at `Ay` and unit jobs released at `Ay + B`, with a threshold
//! `D` separating yes- from no-instances. Only the constructive direction
//! is executable; the generator validates the arithmetic invariants and
//! builds the witness schedule for a given partition.
//!
//! The converse direction of the reduction is a case analysis on why
//! every schedule of a no-instance overshoots `D`; it is not executable at
//! desk scale and is recorded here for reference only. With `A = 6ny` and
//! `B = 18 n^2 y^2`: (1) if some x-job finishes after `Ay + B`, that
//! single completion plus the unavoidable `n` B-job and `An` unit-job
//! completions already exceed `D`; (2) if some B-job finishes after
//! `Ay + 2B`, the extra `B` outweighs the whole slack in `D`; (3)
//! otherwise the x-jobs fit in `[0, Ay]` on `n` machines, but without a
//! 3-partition at least `A` machine-time of that window idles, so some
//! B-job runs past `Ay + A + B`, and at least `A` unit jobs start at
//! `Ay + A + B` or later, again beating `D`. Only the constructive
//! direction ([`yes_schedule`]) is built and verified.
//!
//! This module also hosts the exact dynamic-programming oracles the rest
//! of the test suite measures itself against. They enumerate busy
//! schedules slot by slot, which is exhaustive for integer data because an
//! optimal preemptive schedule can be assumed to preempt only at integer
//! times and to keep machines busy.

use std::collections::HashMap;

use num_bigint::BigInt;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rational::Rat;
use crate::schedule::{
    blocks_of, busy_violation, verify_core, ExecInterval, VerificationReport,
};

/// Guard limits for the oracles: they refuse inputs that would blow up.
const EQUAL_P_MAX_JOBS: usize = 6;
const EQUAL_P_MAX_HORIZON: i64 = 24;
const GENERAL_MAX_JOBS: usize = 5;
const GENERAL_MAX_TOTAL_WORK: i64 = 20;

/// A 3-Partition instance: `3n` positive integers `x` with
/// `sum x_i = n * y` and `y/4 < x_i < y/2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreePartition {
    n: usize,
    y: u64,
    x: Vec<u64>,
}

impl ThreePartition {
    pub fn new(n: usize, y: u64, x: Vec<u64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInstance("need n >= 1 groups".into()));
        }
        if x.len() != 3 * n {
            return Err(Error::InvalidInstance(format!(
                "need exactly 3n = {} numbers, got {}",
                3 * n,
                x.len()
            )));
        }
        let sum: u128 = x.iter().map(|&v| v as u128).sum();
        if sum != n as u128 * y as u128 {
            return Err(Error::InvalidInstance(format!(
                "numbers sum to {sum}, expected n*y = {}",
                n as u128 * y as u128
            )));
        }
        for &v in &x {
            // y/4 < x_i < y/2, strictly, in exact integer arithmetic.
            if 4 * v as u128 <= y as u128 || 2 * v as u128 >= y as u128 {
                return Err(Error::InvalidInstance(format!(
                    "{v} is outside the open interval (y/4, y/2) = ({}/4, {}/2)",
                    y, y
                )));
            }
        }
        Ok(ThreePartition { n, y, x })
    }

    pub fn groups(&self) -> usize {
        self.n
    }

    pub fn target(&self) -> u64 {
        self.y
    }

    pub fn numbers(&self) -> &[u64] {
        &self.x
    }
}

#[derive(Serialize, Deserialize)]
struct ThreePartitionWire {
    n: usize,
    y: u64,
    x: Vec<u64>,
}

impl Serialize for ThreePartition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ThreePartitionWire { n: self.n, y: self.y, x: self.x.clone() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ThreePartition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = ThreePartitionWire::deserialize(deserializer)?;
        ThreePartition::new(wire.n, wire.y, wire.x).map_err(D::Error::custom)
    }
}

/// A job with its own release and processing time.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralJob {
    pub release: Rat,
    pub processing: Rat,
}

/// A scheduling instance without the equal-length assumption. Kept
/// type-distinct from [`Instance`] so the equal-length pipeline cannot be
/// fed heterogeneous jobs by mistake.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralInstance {
    m: usize,
    jobs: Vec<GeneralJob>,
}

impl GeneralInstance {
    pub fn new(m: usize, jobs: Vec<GeneralJob>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInstance("machine count must be >= 1".into()));
        }
        if jobs.is_empty() {
            return Err(Error::InvalidInstance("need at least one job".into()));
        }
        for (idx, job) in jobs.iter().enumerate() {
            if job.release.is_negative() {
                return Err(Error::InvalidInstance(format!(
                    "job {} has negative release {}",
                    idx + 1,
                    job.release
                )));
            }
            if !job.processing.is_positive() {
                return Err(Error::InvalidInstance(format!(
                    "job {} has non-positive processing time {}",
                    idx + 1,
                    job.processing
                )));
            }
        }
        Ok(GeneralInstance { m, jobs })
    }

    pub fn machines(&self) -> usize {
        self.m
    }

    pub fn jobs(&self) -> &[GeneralJob] {
        &self.jobs
    }

    pub fn releases(&self) -> Vec<Rat> {
        self.jobs.iter().map(|j| j.release.clone()).collect()
    }

    pub fn processing_times(&self) -> Vec<Rat> {
        self.jobs.iter().map(|j| j.processing.clone()).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct GeneralInstanceWire {
    m: usize,
    jobs: Vec<GeneralJob>,
}

impl Serialize for GeneralInstance {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        GeneralInstanceWire { m: self.m, jobs: self.jobs.clone() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GeneralInstance {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = GeneralInstanceWire::deserialize(deserializer)?;
        GeneralInstance::new(wire.m, wire.jobs).map_err(D::Error::custom)
    }
}

/// A schedule over a [`GeneralInstance`], verified against per-job
/// processing times.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralSchedule {
    instance: GeneralInstance,
    intervals: Vec<ExecInterval>,
}

impl GeneralSchedule {
    pub fn new(instance: GeneralInstance, mut intervals: Vec<ExecInterval>) -> Self {
        intervals.retain(|iv| iv.start != iv.end);
        intervals.sort_by(|a, b| {
            (a.job, &a.start, a.machine).cmp(&(b.job, &b.start, b.machine))
        });
        GeneralSchedule { instance, intervals }
    }

    pub fn instance(&self) -> &GeneralInstance {
        &self.instance
    }

    pub fn intervals(&self) -> &[ExecInterval] {
        &self.intervals
    }

    pub fn completion(&self, job: usize) -> Rat {
        self.intervals
            .iter()
            .filter(|iv| iv.job == job)
            .map(|iv| iv.end.clone())
            .max()
            .unwrap_or_else(|| self.instance.jobs[job - 1].release.clone())
    }

    pub fn objective(&self) -> Rat {
        (1..=self.instance.jobs.len()).map(|j| self.completion(j)).sum()
    }

    pub fn verify(&self) -> VerificationReport {
        verify_core(
            self.instance.m,
            &self.instance.releases(),
            &self.instance.processing_times(),
            &self.intervals,
        )
    }

    /// Busy check over the block decomposition, as for equal-length
    /// schedules.
    pub fn check_busy(&self) -> bool {
        if !self.verify().passed() {
            return false;
        }
        let releases = self.instance.releases();
        let blocks = blocks_of(&releases, &self.intervals);
        busy_violation(&blocks, &releases, self.instance.m).is_none()
    }

    /// Number of execution intervals of a job; 1 means non-preemptive.
    pub fn preemption_parts(&self, job: usize) -> usize {
        crate::intervals::IntervalSet::from_spans(
            self.intervals
                .iter()
                .filter(|iv| iv.job == job)
                .map(|iv| (iv.start.clone(), iv.end.clone()))
                .collect(),
        )
        .spans()
        .len()
    }
}

/// The generated hardness instance with its reduction parameters.
#[derive(Clone, Debug)]
pub struct HardnessInstance {
    /// Scale factor `A = 6ny`.
    pub a: BigInt,
    /// Filler length `B = 18 n^2 y^2`.
    pub b: BigInt,
    /// Machine count `m = n`.
    pub machines: usize,
    /// Total job count `N = 4n + An`.
    pub job_count: BigInt,
    /// The jobs: 3n x-jobs, n B-jobs, An unit jobs.
    pub instance: GeneralInstance,
    /// Threshold `D`: a yes-instance admits a schedule with objective at
    /// most `D`.
    pub threshold: BigInt,
}

/// Builds the reduction instance for a 3-Partition input.
pub fn generate(tp: &ThreePartition) -> Result<HardnessInstance> {
    let n = BigInt::from(tp.n);
    let y = BigInt::from(tp.y);
    let a: BigInt = 6 * &n * &y;
    let b: BigInt = 18 * &n * &n * &y * &y;
    let ay: BigInt = &a * &y;
    let job_count: BigInt = 4 * &n + &a * &n;

    // D = 3nAy + n(Ay + B) + n * sum_{i=1}^{A} (Ay + B + i)
    let threshold: BigInt = 3 * &n * &ay
        + &n * (&ay + &b)
        + &n * (&a * (&ay + &b) + &a * (&a + 1) / 2);

    let materialized: usize = usize::try_from(&job_count).map_err(|_| {
        Error::InvalidInstance(format!("instance with N = {job_count} jobs is too large to materialize"))
    })?;

    let mut jobs = Vec::with_capacity(materialized);
    for &x in &tp.x {
        jobs.push(GeneralJob {
            release: Rat::zero(),
            processing: Rat::from_bigint(&a * BigInt::from(x)),
        });
    }
    for _ in 0..tp.n {
        jobs.push(GeneralJob {
            release: Rat::from_bigint(ay.clone()),
            processing: Rat::from_bigint(b.clone()),
        });
    }
    let one_release = Rat::from_bigint(&ay + &b);
    let unit_jobs = materialized - 4 * tp.n;
    for _ in 0..unit_jobs {
        jobs.push(GeneralJob { release: one_release.clone(), processing: Rat::one() });
    }

    Ok(HardnessInstance {
        a,
        b,
        machines: tp.n,
        job_count,
        instance: GeneralInstance::new(tp.n, jobs)?,
        threshold,
    })
}

/// Builds the witness schedule for a yes-instance: machine `k` runs the
/// three x-jobs of its triple back to back in `[0, Ay)`, one B-job in
/// `[Ay, Ay + B)`, then `A` unit jobs. The objective is at most `D`.
pub fn yes_schedule(
    tp: &ThreePartition,
    partition: &[[usize; 3]],
) -> Result<GeneralSchedule> {
    let hard = generate(tp)?;
    if partition.len() != tp.n {
        return Err(Error::InvalidArgument(format!(
            "partition needs {} triples, got {}",
            tp.n,
            partition.len()
        )));
    }
    let mut seen = vec![false; 3 * tp.n];
    for triple in partition {
        let mut sum: u128 = 0;
        for &idx in triple {
            if idx == 0 || idx > 3 * tp.n {
                return Err(Error::InvalidArgument(format!(
                    "index {idx} out of range 1..={}",
                    3 * tp.n
                )));
            }
            if seen[idx - 1] {
                return Err(Error::InvalidArgument(format!("index {idx} appears twice")));
            }
            seen[idx - 1] = true;
            sum += tp.x[idx - 1] as u128;
        }
        if sum != tp.y as u128 {
            return Err(Error::InvalidArgument(format!(
                "triple {triple:?} sums to {sum}, not y = {}",
                tp.y
            )));
        }
    }

    let a_rat = Rat::from_bigint(hard.a.clone());
    let ay = Rat::from_bigint(&hard.a * BigInt::from(tp.y));
    let b_rat = Rat::from_bigint(hard.b.clone());
    let a_units = usize::try_from(&hard.a).expect("materialized instance fits");

    let mut intervals = Vec::new();
    for (k, triple) in partition.iter().enumerate() {
        let machine = k + 1;
        let mut triple = *triple;
        triple.sort_unstable();
        let mut t = Rat::zero();
        for idx in triple {
            let len = &a_rat * &Rat::from_bigint(BigInt::from(tp.x[idx - 1]));
            intervals.push(ExecInterval::new(idx, machine, t.clone(), &t + &len));
            t = &t + &len;
        }
        debug_assert_eq!(t, ay);
        intervals.push(ExecInterval::new(3 * tp.n + machine, machine, ay.clone(), &ay + &b_rat));
        let base = &ay + &b_rat;
        for i in 0..a_units {
            let job = 4 * tp.n + k * a_units + i + 1;
            let s = &base + &Rat::from_int(i as i64);
            let e = &base + &Rat::from_int(i as i64 + 1);
            intervals.push(ExecInterval::new(job, machine, s, e));
        }
    }
    Ok(GeneralSchedule::new(hard.instance, intervals))
}

/// State for the slot oracles: alive jobs as `(release, remaining)` pairs,
/// sorted so interchangeable jobs collapse into one memo entry.
type SlotState = Vec<(i64, i64)>;

fn slot_dp(
    machines: usize,
    time: i64,
    mut state: SlotState,
    memo: &mut HashMap<(i64, SlotState), i64>,
) -> i64 {
    state.sort_unstable();
    if state.is_empty() {
        return 0;
    }
    // Nothing released yet: jump to the next release.
    let time = if state.iter().all(|&(r, _)| r > time) {
        state.iter().map(|&(r, _)| r).min().unwrap()
    } else {
        time
    };
    if let Some(&v) = memo.get(&(time, state.clone())) {
        return v;
    }
    let available: Vec<usize> = (0..state.len()).filter(|&i| state[i].0 <= time).collect();
    let run_count = available.len().min(machines);
    // Busy schedules run as many available jobs as machines allow; for the
    // sum-of-completions objective some optimal schedule is busy, so the
    // restriction is lossless.
    let mut best = i64::MAX;
    let masks = 1u32 << available.len();
    for mask in 0..masks {
        if (mask.count_ones() as usize) != run_count {
            continue;
        }
        let mut next: SlotState = Vec::with_capacity(state.len());
        let mut completed_now = 0i64;
        for (pos, &job) in available.iter().enumerate() {
            if mask & (1 << pos) != 0 {
                let (r, rem) = state[job];
                if rem == 1 {
                    completed_now += time + 1;
                } else {
                    next.push((r, rem - 1));
                }
            }
        }
        for (i, &entry) in state.iter().enumerate() {
            if !available.contains(&i) || {
                let pos = available.iter().position(|&a| a == i).unwrap();
                mask & (1 << pos) == 0
            } {
                next.push(entry);
            }
        }
        let rest = slot_dp(machines, time + 1, next, memo);
        best = best.min(completed_now + rest);
    }
    memo.insert((time, state), best);
    best
}

/// Exact optimal `sum C_j` for a small integer equal-length instance, by
/// dynamic programming over unit slots. With `integral_only` the search
/// allows preemption only at integer times, which already attains the true
/// preemptive optimum; without it the grid refines to half-unit slots (a
/// strictly larger feasible set) as an independent cross-check.
pub fn brute_force_equal_p(instance: &Instance, integral_only: bool) -> Result<Rat> {
    if !instance.is_integral() {
        return Err(Error::NonIntegral(
            "the slot oracle needs integer p and releases".into(),
        ));
    }
    let n = instance.jobs();
    if n > EQUAL_P_MAX_JOBS {
        return Err(Error::SizeGuard {
            dimension: "n",
            value: n.to_string(),
            limit: EQUAL_P_MAX_JOBS.to_string(),
        });
    }
    let horizon = instance.horizon();
    if horizon > Rat::from_int(EQUAL_P_MAX_HORIZON) {
        return Err(Error::SizeGuard {
            dimension: "horizon r_n + n*p",
            value: horizon.to_string(),
            limit: EQUAL_P_MAX_HORIZON.to_string(),
        });
    }
    let p: i64 = i64::try_from(instance.processing_time().to_bigint().unwrap())
        .expect("guarded horizon bounds p");
    let scale = if integral_only { 1 } else { 2 };
    let state: SlotState = instance
        .releases()
        .iter()
        .map(|r| {
            let r = i64::try_from(r.to_bigint().unwrap()).expect("guarded horizon bounds r");
            (r * scale, p * scale)
        })
        .collect();
    let mut memo = HashMap::new();
    let value = slot_dp(instance.machines(), 0, state, &mut memo);
    Ok(&Rat::from_int(value) / &Rat::from_int(scale))
}

/// Exact optimal `sum C_j` for a small integer instance with arbitrary
/// processing times, by the same busy slot search.
pub fn brute_force_general(instance: &GeneralInstance) -> Result<Rat> {
    let n = instance.jobs.len();
    if n > GENERAL_MAX_JOBS {
        return Err(Error::SizeGuard {
            dimension: "n",
            value: n.to_string(),
            limit: GENERAL_MAX_JOBS.to_string(),
        });
    }
    let mut total_work: i64 = 0;
    let mut state: SlotState = Vec::with_capacity(n);
    for (idx, job) in instance.jobs.iter().enumerate() {
        if !job.release.is_integer() || !job.processing.is_integer() {
            return Err(Error::NonIntegral(format!(
                "the slot oracle needs integer data, job {} has release {} and processing {}",
                idx + 1,
                job.release,
                job.processing
            )));
        }
        let r = i64::try_from(job.release.to_bigint().unwrap()).map_err(|_| {
            Error::SizeGuard {
                dimension: "release",
                value: job.release.to_string(),
                limit: i64::MAX.to_string(),
            }
        })?;
        let p = i64::try_from(job.processing.to_bigint().unwrap()).map_err(|_| {
            Error::SizeGuard {
                dimension: "processing",
                value: job.processing.to_string(),
                limit: i64::MAX.to_string(),
            }
        })?;
        total_work += p;
        state.push((r, p));
    }
    if total_work > GENERAL_MAX_TOTAL_WORK {
        return Err(Error::SizeGuard {
            dimension: "total work sum p_j",
            value: total_work.to_string(),
            limit: GENERAL_MAX_TOTAL_WORK.to_string(),
        });
    }
    let mut memo = HashMap::new();
    Ok(Rat::from_int(slot_dp(instance.m, 0, state, &mut memo)))
}
