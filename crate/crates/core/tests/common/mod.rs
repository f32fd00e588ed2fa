//! Shared generators for the integration suites.
#![allow(dead_code)] // each test target uses a different subset

use flowtime_core::intervals::IntervalSet;
use flowtime_core::{Instance, Rat, Schedule};
use rand::prelude::*;
use rand::rngs::StdRng;

/// Every sorted multiset of `n` release times over `0..=max_r`.
pub fn release_multisets(n: usize, max_r: i64) -> Vec<Vec<i64>> {
    fn go(n: usize, lo: i64, max_r: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for r in lo..=max_r {
            prefix.push(r);
            go(n - 1, r, max_r, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, 0, max_r, &mut Vec::new(), &mut out);
    out
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_instance(rng: &mut StdRng, n: usize, max_m: usize, max_p: i64, max_r: i64) -> Instance {
    let m = rng.random_range(1..=max_m);
    let p = rng.random_range(1..=max_p);
    let releases: Vec<i64> = (0..n).map(|_| rng.random_range(0..=max_r)).collect();
    Instance::from_ints(m, p, &releases).unwrap()
}

/// A random valid schedule built by list scheduling on a grid of
/// `1/grid`-length slots. Subset sizes are randomized, so the result is
/// usually neither busy nor optimal, and for `grid > 1` preemptions land
/// on fractional times.
pub fn random_schedule(rng: &mut StdRng, instance: &Instance, grid: i64) -> Schedule {
    let n = instance.jobs();
    let m = instance.machines();
    // All quantities in grid units; integer instances keep them integral.
    let p_units = (instance.processing_time() * &Rat::from_int(grid))
        .to_bigint()
        .expect("integer instance times grid");
    let p_units = i64::try_from(p_units).unwrap();
    let releases: Vec<i64> = instance
        .releases()
        .iter()
        .map(|r| i64::try_from((r * &Rat::from_int(grid)).to_bigint().unwrap()).unwrap())
        .collect();
    let force_after = releases.iter().max().unwrap() + 3 * n as i64 * p_units;

    let mut remaining = vec![p_units; n];
    let mut spans: Vec<Vec<(i64, i64)>> = vec![Vec::new(); n];
    let mut t = 0i64;
    while remaining.iter().any(|&r| r > 0) {
        let avail: Vec<usize> =
            (0..n).filter(|&j| remaining[j] > 0 && releases[j] <= t).collect();
        if avail.is_empty() {
            t = (0..n)
                .filter(|&j| remaining[j] > 0)
                .map(|j| releases[j])
                .min()
                .unwrap();
            continue;
        }
        let cap = avail.len().min(m);
        let count = if t >= force_after || rng.random_bool(0.7) {
            cap
        } else {
            rng.random_range(0..=cap)
        };
        let mut chosen = avail.clone();
        chosen.shuffle(rng);
        chosen.truncate(count);
        for j in chosen {
            remaining[j] -= 1;
            spans[j].push((t, t + 1));
        }
        t += 1;
    }

    let scale = Rat::from_int(grid);
    let supports: Vec<IntervalSet> = spans
        .into_iter()
        .map(|s| {
            IntervalSet::from_spans(
                s.into_iter()
                    .map(|(a, b)| (&Rat::from_int(a) / &scale, &Rat::from_int(b) / &scale))
                    .collect(),
            )
        })
        .collect();
    Schedule::from_supports(instance.clone(), &supports)
}
