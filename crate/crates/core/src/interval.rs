//! Closed intervals with exact rational endpoints and finite unions thereof.
//!
//! Endpoint overlaps have measure zero and are tolerated everywhere; every
//! "almost everywhere" statement below is implemented as "up to a set of
//! zero total length", which for interval data means endpoint touching.

use crate::error::{Error, Result};
use crate::rat::{self, Rat};
use num_traits::Zero;
use std::fmt;

/// A closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    lo: Rat,
    hi: Rat,
}

impl Interval {
    pub fn new(lo: Rat, hi: Rat) -> Result<Self> {
        if lo >= hi {
            return Err(Error::BadInterval(format!(
                "[{}, {}] is empty or reversed",
                rat::format(&lo),
                rat::format(&hi)
            )));
        }
        Ok(Interval { lo, hi })
    }

    /// `[lo, hi]` from integers.
    pub fn of_ints(lo: i64, hi: i64) -> Self {
        Interval::new(rat::rat_i(lo), rat::rat_i(hi)).expect("lo < hi")
    }

    pub fn lo(&self) -> &Rat {
        &self.lo
    }

    pub fn hi(&self) -> &Rat {
        &self.hi
    }

    pub fn len(&self) -> Rat {
        &self.hi - &self.lo
    }

    /// Intersection with positive length, if any.
    pub fn meet(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = self.hi.clone().min(other.hi.clone());
        if lo < hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }

    /// Contains `x` (endpoints included).
    pub fn contains(&self, x: &Rat) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// Covers `other` entirely.
    pub fn covers(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", rat::format(&self.lo), rat::format(&self.hi))
    }
}

/// A finite union of intervals, kept sorted with disjoint interiors and with
/// touching parts merged. The canonical representation of a measurable set
/// used by branching systems.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { parts: Vec::new() }
    }

    pub fn from_interval(iv: Interval) -> Self {
        IntervalSet { parts: vec![iv] }
    }

    pub fn from_intervals<I: IntoIterator<Item = Interval>>(ivs: I) -> Self {
        let mut parts: Vec<Interval> = ivs.into_iter().collect();
        parts.sort();
        let mut merged: Vec<Interval> = Vec::with_capacity(parts.len());
        for iv in parts {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => merged.push(iv),
            }
        }
        IntervalSet { parts: merged }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn measure(&self) -> Rat {
        self.parts.iter().map(|iv| iv.len()).fold(Rat::zero(), |a, b| a + b)
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::from_intervals(self.parts.iter().chain(other.parts.iter()).cloned())
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        for a in &self.parts {
            for b in &other.parts {
                if let Some(iv) = a.meet(b) {
                    out.push(iv);
                }
            }
        }
        IntervalSet::from_intervals(out)
    }

    /// Set difference up to measure zero.
    pub fn minus(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        for a in &self.parts {
            let mut cursor = a.lo.clone();
            for b in &other.parts {
                if b.hi <= cursor {
                    continue;
                }
                if b.lo >= a.hi {
                    break;
                }
                if b.lo > cursor {
                    out.push(Interval {
                        lo: cursor.clone(),
                        hi: b.lo.clone().min(a.hi.clone()),
                    });
                }
                cursor = cursor.max(b.hi.clone());
                if cursor >= a.hi {
                    break;
                }
            }
            if cursor < a.hi {
                out.push(Interval {
                    lo: cursor,
                    hi: a.hi.clone(),
                });
            }
        }
        IntervalSet::from_intervals(out)
    }

    /// Length of the overlap with `other`.
    pub fn overlap_measure(&self, other: &IntervalSet) -> Rat {
        self.intersect(other).measure()
    }

    /// `other` is contained in `self` up to measure zero.
    pub fn covers(&self, other: &IntervalSet) -> bool {
        other.minus(self).measure().is_zero()
    }

    /// Equal up to measure zero.
    pub fn eq_ae(&self, other: &IntervalSet) -> bool {
        self.covers(other) && other.covers(self)
    }

    /// A positive-length witness of the overlap with `other`, if any.
    pub fn overlap_witness(&self, other: &IntervalSet) -> Option<Interval> {
        let meet = self.intersect(other);
        meet.parts.first().cloned()
    }

    /// Smallest interval containing the whole set.
    pub fn bounding(&self) -> Option<Interval> {
        let first = self.parts.first()?;
        let last = self.parts.last()?;
        Some(Interval {
            lo: first.lo.clone(),
            hi: last.hi.clone(),
        })
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "{{}}");
        }
        let mut first = true;
        for iv in &self.parts {
            if !first {
                write!(f, " u ")?;
            }
            write!(f, "{iv}")?;
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn iv(lo: i64, hi: i64) -> Interval {
        Interval::of_ints(lo, hi)
    }

    #[test]
    fn merge_and_measure() {
        let s = IntervalSet::from_intervals(vec![iv(1, 2), iv(0, 1), iv(3, 4)]);
        assert_eq!(s.parts().len(), 2);
        assert_eq!(s.measure(), rat(3, 1));
    }

    #[test]
    fn difference_carves_holes() {
        let a = IntervalSet::from_interval(iv(0, 10));
        let b = IntervalSet::from_intervals(vec![iv(2, 3), iv(5, 7)]);
        let d = a.minus(&b);
        assert_eq!(
            d,
            IntervalSet::from_intervals(vec![iv(0, 2), iv(3, 5), iv(7, 10)])
        );
        assert!(a.covers(&b));
        assert!(!b.covers(&a));
    }

    #[test]
    fn endpoint_touch_has_zero_overlap() {
        let a = IntervalSet::from_interval(iv(0, 1));
        let b = IntervalSet::from_interval(iv(1, 2));
        assert!(a.overlap_measure(&b).is_zero());
        assert!(a.union(&b).eq_ae(&IntervalSet::from_interval(iv(0, 2))));
    }
}
