//! Measure-theoretic sets of half-open intervals `[start, end)`.
//!
//! Job supports and their unions, intersections and differences are all
//! finite unions of half-open intervals, so the whole normalization
//! machinery runs on this small exact algebra.

use crate::rational::Rat;

/// A finite union of disjoint, non-empty, sorted half-open intervals.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct IntervalSet {
    spans: Vec<(Rat, Rat)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { spans: Vec::new() }
    }

    /// Builds a set from arbitrary `[start, end)` pairs: empty pairs are
    /// dropped, overlapping or touching pairs are merged.
    pub fn from_spans(mut raw: Vec<(Rat, Rat)>) -> Self {
        raw.retain(|(s, e)| s < e);
        raw.sort();
        let mut spans: Vec<(Rat, Rat)> = Vec::with_capacity(raw.len());
        for (s, e) in raw {
            match spans.last_mut() {
                Some((_, last_end)) if s <= *last_end => {
                    if e > *last_end {
                        *last_end = e;
                    }
                }
                _ => spans.push((s, e)),
            }
        }
        IntervalSet { spans }
    }

    pub fn single(start: Rat, end: Rat) -> Self {
        Self::from_spans(vec![(start, end)])
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn spans(&self) -> &[(Rat, Rat)] {
        &self.spans
    }

    pub fn measure(&self) -> Rat {
        self.spans.iter().map(|(s, e)| e - s).sum()
    }

    /// Supremum of the set, if non-empty.
    pub fn sup(&self) -> Option<&Rat> {
        self.spans.last().map(|(_, e)| e)
    }

    pub fn inf(&self) -> Option<&Rat> {
        self.spans.first().map(|(s, _)| s)
    }

    pub fn contains(&self, t: &Rat) -> bool {
        self.spans.iter().any(|(s, e)| s <= t && t < e)
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut raw = self.spans.clone();
        raw.extend(other.spans.iter().cloned());
        IntervalSet::from_spans(raw)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.spans.len() && j < other.spans.len() {
            let (a_s, a_e) = &self.spans[i];
            let (b_s, b_e) = &other.spans[j];
            let lo = if a_s > b_s { a_s } else { b_s };
            let hi = if a_e < b_e { a_e } else { b_e };
            if lo < hi {
                out.push((lo.clone(), hi.clone()));
            }
            if a_e <= b_e {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet { spans: out }
    }

    /// Set difference `self \ other`.
    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        for (s, e) in &self.spans {
            let mut cur = s.clone();
            for (b_s, b_e) in &other.spans {
                if b_e <= &cur {
                    continue;
                }
                if b_s >= e {
                    break;
                }
                if *b_s > cur {
                    out.push((cur.clone(), b_s.clone().min(e.clone())));
                }
                cur = b_e.clone().max(cur);
                if cur >= *e {
                    break;
                }
            }
            if cur < *e {
                out.push((cur, e.clone()));
            }
        }
        IntervalSet { spans: out }
    }

    /// Parts strictly before / from `t` on: `(self ∩ [-∞, t), self ∩ [t, ∞))`.
    pub fn split_at(&self, t: &Rat) -> (IntervalSet, IntervalSet) {
        let mut before = Vec::new();
        let mut after = Vec::new();
        for (s, e) in &self.spans {
            if e <= t {
                before.push((s.clone(), e.clone()));
            } else if s >= t {
                after.push((s.clone(), e.clone()));
            } else {
                before.push((s.clone(), t.clone()));
                after.push((t.clone(), e.clone()));
            }
        }
        (IntervalSet { spans: before }, IntervalSet { spans: after })
    }

    /// The leftmost part of the set with measure exactly `target`, and the
    /// cut point where it ends. Requires `0 <= target <= measure()`.
    ///
    /// When the target lands exactly on a span boundary, the cut point is
    /// that boundary; in particular, if every span endpoint and the target
    /// are integers, the cut point is an integer.
    pub fn prefix_of_measure(&self, target: &Rat) -> (IntervalSet, Rat) {
        assert!(!target.is_negative(), "negative prefix measure");
        let mut remaining = target.clone();
        let mut prefix = Vec::new();
        let mut cut = self
            .spans
            .first()
            .map(|(s, _)| s.clone())
            .unwrap_or_else(Rat::zero);
        for (s, e) in &self.spans {
            if remaining.is_zero() {
                break;
            }
            let len = e - s;
            if len <= remaining {
                prefix.push((s.clone(), e.clone()));
                remaining = remaining - &len;
                cut = e.clone();
            } else {
                let mid = s + &remaining;
                prefix.push((s.clone(), mid.clone()));
                remaining = Rat::zero();
                cut = mid;
            }
        }
        assert!(remaining.is_zero(), "prefix measure exceeds set measure");
        (IntervalSet { spans: prefix }, cut)
    }

    /// The rightmost part of the set with measure exactly `target`.
    pub fn suffix_of_measure(&self, target: &Rat) -> IntervalSet {
        let total = self.measure();
        let keep = &total - target;
        let (_, cut) = self.prefix_of_measure(&keep);
        self.split_at(&cut).1
    }

    /// True when every span endpoint is an integer.
    pub fn is_integral(&self) -> bool {
        self.spans.iter().all(|(s, e)| s.is_integer() && e.is_integer())
    }
}
