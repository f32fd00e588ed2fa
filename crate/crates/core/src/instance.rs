//! Problem instances: `n` jobs of common length `p` with release times on
//! `m` identical machines.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::Rat;

/// An instance of the equal-length preemptive scheduling problem.
///
/// Releases are kept sorted non-decreasing; construction records the sort
/// permutation so callers can map jobs back to their original positions.
/// Jobs are numbered `1..=n` in release order, ties broken by input order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    m: usize,
    p: Rat,
    releases: Vec<Rat>,
    /// `order[k]` is the 0-based input position of sorted job `k+1`.
    order: Vec<usize>,
}

impl Instance {
    pub fn new(m: usize, p: Rat, releases: Vec<Rat>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInstance("machine count must be >= 1".into()));
        }
        if releases.is_empty() {
            return Err(Error::InvalidInstance("need at least one job".into()));
        }
        if !p.is_positive() {
            return Err(Error::InvalidInstance(format!(
                "processing time must be positive, got {p}"
            )));
        }
        if let Some(r) = releases.iter().find(|r| r.is_negative()) {
            return Err(Error::InvalidInstance(format!(
                "release times must be non-negative, got {r}"
            )));
        }
        let mut order: Vec<usize> = (0..releases.len()).collect();
        order.sort_by(|&a, &b| releases[a].cmp(&releases[b]).then(a.cmp(&b)));
        let releases = order.iter().map(|&i| releases[i].clone()).collect();
        Ok(Instance { m, p, releases, order })
    }

    /// Convenience constructor from machine count, integer processing time
    /// and integer releases.
    pub fn from_ints(m: usize, p: i64, releases: &[i64]) -> Result<Self> {
        Instance::new(
            m,
            Rat::from_int(p),
            releases.iter().map(|&r| Rat::from_int(r)).collect(),
        )
    }

    pub fn machines(&self) -> usize {
        self.m
    }

    pub fn jobs(&self) -> usize {
        self.releases.len()
    }

    pub fn processing_time(&self) -> &Rat {
        &self.p
    }

    /// Release time of job `j` (1-based, release order).
    pub fn release(&self, job: usize) -> &Rat {
        &self.releases[job - 1]
    }

    pub fn releases(&self) -> &[Rat] {
        &self.releases
    }

    /// 0-based input position of sorted job `job` (1-based).
    pub fn original_position(&self, job: usize) -> usize {
        self.order[job - 1]
    }

    /// Sorted 1-based job number for the 0-based input position.
    pub fn sorted_job_for_input(&self, input_pos: usize) -> usize {
        self.order.iter().position(|&o| o == input_pos).expect("position in range") + 1
    }

    /// Universal horizon `r_n + n * p`: no optimal schedule completes later.
    pub fn horizon(&self) -> Rat {
        let n = Rat::from_int(self.jobs() as i64);
        self.releases.last().unwrap() + &(n * &self.p)
    }

    /// True when `p` and all releases are integers.
    pub fn is_integral(&self) -> bool {
        self.p.is_integer() && self.releases.iter().all(|r| r.is_integer())
    }

    /// Shifts all releases so the earliest becomes 0, restoring the
    /// convention `r_1 = 0`. Returns the shifted instance and the offset
    /// that was subtracted.
    pub fn shifted_to_zero(&self) -> (Instance, Rat) {
        let offset = self.releases[0].clone();
        let shifted = Instance {
            m: self.m,
            p: self.p.clone(),
            releases: self.releases.iter().map(|r| r - &offset).collect(),
            order: self.order.clone(),
        };
        (shifted, offset)
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceWire {
    m: usize,
    p: Rat,
    releases: Vec<Rat>,
}

impl Serialize for Instance {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        // Emit releases in their original input order.
        let mut original = vec![Rat::zero(); self.releases.len()];
        for (k, &pos) in self.order.iter().enumerate() {
            original[pos] = self.releases[k].clone();
        }
        InstanceWire {
            m: self.m,
            p: self.p.clone(),
            releases: original,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Instance {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = InstanceWire::deserialize(deserializer)?;
        Instance::new(wire.m, wire.p, wire.releases).map_err(D::Error::custom)
    }
}
