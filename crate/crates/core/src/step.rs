//! Step functions: finitely many pieces with exact rational breakpoints and
//! real values, zero elsewhere. The dense test family on which all operator
//! identities are evaluated; geometry is exact, amplitudes are doubles.

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::rat::{self, Rat};
use serde::{Deserialize, Serialize};

/// Canonical form: pieces sorted by left endpoint, interiors disjoint,
/// touching pieces with equal values merged, zero-valued pieces dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    pieces: Vec<(Interval, f64)>,
}

/// Raw JSON shape of a step-function document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepFunctionDoc {
    pub pieces: Vec<PieceDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PieceDoc {
    pub from: String,
    pub to: String,
    pub value: f64,
}

impl StepFunction {
    pub fn zero() -> Self {
        StepFunction { pieces: Vec::new() }
    }

    /// Builds the canonical form; overlapping pieces are rejected.
    pub fn new(mut pieces: Vec<(Interval, f64)>) -> Result<Self> {
        pieces.sort_by(|a, b| a.0.cmp(&b.0));
        for pair in pieces.windows(2) {
            if pair[0].0.hi() > pair[1].0.lo() {
                return Err(Error::BadStepFunction(format!(
                    "pieces {} and {} overlap",
                    pair[0].0, pair[1].0
                )));
            }
        }
        let mut merged: Vec<(Interval, f64)> = Vec::with_capacity(pieces.len());
        for (iv, value) in pieces {
            if value == 0.0 {
                continue;
            }
            match merged.last_mut() {
                Some((last, v)) if *v == value && last.hi() == iv.lo() => {
                    *last = Interval::new(last.lo().clone(), iv.hi().clone())?;
                }
                _ => merged.push((iv, value)),
            }
        }
        Ok(StepFunction { pieces: merged })
    }

    pub fn indicator(iv: Interval) -> Self {
        StepFunction {
            pieces: vec![(iv, 1.0)],
        }
    }

    pub fn indicator_of(set: &IntervalSet) -> Self {
        StepFunction {
            pieces: set.parts().iter().map(|iv| (iv.clone(), 1.0)).collect(),
        }
    }

    pub fn pieces(&self) -> &[(Interval, f64)] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn support(&self) -> IntervalSet {
        IntervalSet::from_intervals(self.pieces.iter().map(|(iv, _)| iv.clone()))
    }

    /// Value at `x`, taking the piece whose interior or left endpoint covers
    /// it. Only meaningful away from breakpoints, which carry no measure.
    pub fn value_at(&self, x: &Rat) -> f64 {
        for (iv, v) in &self.pieces {
            if iv.lo() <= x && x < iv.hi() {
                return *v;
            }
        }
        0.0
    }

    fn merge_with<F: Fn(f64, f64) -> f64>(&self, other: &StepFunction, op: F) -> StepFunction {
        let mut cuts: Vec<Rat> = Vec::new();
        for (iv, _) in self.pieces.iter().chain(other.pieces.iter()) {
            cuts.push(iv.lo().clone());
            cuts.push(iv.hi().clone());
        }
        cuts.sort();
        cuts.dedup();
        let mut pieces = Vec::new();
        for pair in cuts.windows(2) {
            let mid = (&pair[0] + &pair[1]) / rat::rat_i(2);
            let value = op(self.value_at(&mid), other.value_at(&mid));
            if value != 0.0 {
                pieces.push((
                    Interval::new(pair[0].clone(), pair[1].clone()).expect("sorted cuts"),
                    value,
                ));
            }
        }
        StepFunction::new(pieces).expect("disjoint by construction")
    }

    pub fn add(&self, other: &StepFunction) -> StepFunction {
        self.merge_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &StepFunction) -> StepFunction {
        self.merge_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &StepFunction) -> StepFunction {
        self.merge_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> StepFunction {
        if c == 0.0 {
            return StepFunction::zero();
        }
        StepFunction::new(
            self.pieces
                .iter()
                .map(|(iv, v)| (iv.clone(), v * c))
                .collect(),
        )
        .expect("same geometry")
    }

    pub fn square(&self) -> StepFunction {
        StepFunction::new(
            self.pieces
                .iter()
                .map(|(iv, v)| (iv.clone(), v * v))
                .collect(),
        )
        .expect("same geometry")
    }

    /// Pointwise square root; values below `-1e-12` are rejected, tiny
    /// negatives from rounding clamp to zero.
    pub fn sqrt(&self) -> Result<StepFunction> {
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for (iv, v) in &self.pieces {
            if *v < -1e-12 {
                return Err(Error::BadStepFunction(format!(
                    "negative value {v} under a square root"
                )));
            }
            pieces.push((iv.clone(), v.max(0.0).sqrt()));
        }
        StepFunction::new(pieces)
    }

    /// Nonnegative and nonpositive parts; `self = pos - neg`.
    pub fn split_signs(&self) -> (StepFunction, StepFunction) {
        let pos = StepFunction::new(
            self.pieces
                .iter()
                .filter(|(_, v)| *v > 0.0)
                .cloned()
                .collect(),
        )
        .expect("subset of canonical pieces");
        let neg = StepFunction::new(
            self.pieces
                .iter()
                .filter(|(_, v)| *v < 0.0)
                .map(|(iv, v)| (iv.clone(), -v))
                .collect(),
        )
        .expect("subset of canonical pieces");
        (pos, neg)
    }

    /// Restriction to a set: multiplication by its indicator.
    pub fn restrict(&self, set: &IntervalSet) -> StepFunction {
        let mut pieces = Vec::new();
        for (iv, v) in &self.pieces {
            for part in set.parts() {
                if let Some(meet) = iv.meet(part) {
                    pieces.push((meet, *v));
                }
            }
        }
        StepFunction::new(pieces).expect("intersections of disjoint pieces stay disjoint")
    }

    /// Restriction to the complement of a set.
    pub fn restrict_outside(&self, set: &IntervalSet) -> StepFunction {
        let mut pieces = Vec::new();
        for (iv, v) in &self.pieces {
            let holes = IntervalSet::from_interval(iv.clone()).minus(set);
            for part in holes.parts() {
                pieces.push((part.clone(), *v));
            }
        }
        StepFunction::new(pieces).expect("pieces stay disjoint")
    }

    pub fn integral(&self) -> f64 {
        self.pieces
            .iter()
            .map(|(iv, v)| v * rat::to_f64(&iv.len()))
            .sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.pieces
            .iter()
            .map(|(iv, v)| v.abs() * rat::to_f64(&iv.len()))
            .sum()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.pieces
            .iter()
            .map(|(iv, v)| v * v * rat::to_f64(&iv.len()))
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn inner(&self, other: &StepFunction) -> f64 {
        self.mul(other).integral()
    }

    pub fn l1_distance(&self, other: &StepFunction) -> f64 {
        self.sub(other)
            .pieces
            .iter()
            .map(|(iv, v)| v.abs() * rat::to_f64(&iv.len()))
            .sum()
    }

    /// Largest absolute piece value of the difference.
    pub fn sup_distance(&self, other: &StepFunction) -> f64 {
        self.sub(other)
            .pieces
            .iter()
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.pieces.iter().map(|(_, v)| *v).fold(0.0, f64::min)
    }

    pub fn to_doc(&self) -> StepFunctionDoc {
        StepFunctionDoc {
            pieces: self
                .pieces
                .iter()
                .map(|(iv, v)| PieceDoc {
                    from: rat::format(iv.lo()),
                    to: rat::format(iv.hi()),
                    value: *v,
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &StepFunctionDoc) -> Result<StepFunction> {
        let mut pieces = Vec::with_capacity(doc.pieces.len());
        for p in &doc.pieces {
            let lo = rat::parse(&p.from)?;
            let hi = rat::parse(&p.to)?;
            if lo >= hi {
                return Err(Error::BadStepFunction(format!(
                    "piece [{}, {}] is empty or reversed",
                    p.from, p.to
                )));
            }
            pieces.push((Interval::new(lo, hi)?, p.value));
        }
        StepFunction::new(pieces)
    }

    pub fn from_json(text: &str) -> Result<StepFunction> {
        let doc: StepFunctionDoc =
            serde_json::from_str(text).map_err(|e| Error::BadDocument(e.to_string()))?;
        StepFunction::from_doc(&doc)
    }
}

/// Breakpoints of all pieces of all functions, sorted and deduplicated.
pub fn breakpoints(fns: &[&StepFunction]) -> Vec<Rat> {
    let mut cuts = Vec::new();
    for f in fns {
        for (iv, _) in f.pieces() {
            cuts.push(iv.lo().clone());
            cuts.push(iv.hi().clone());
        }
    }
    cuts.sort();
    cuts.dedup();
    cuts
}

/// The cells of the common refinement of a set of breakpoints.
pub fn refinement_cells(cuts: &[Rat]) -> Vec<Interval> {
    cuts.windows(2)
        .filter(|pair| pair[0] < pair[1])
        .map(|pair| Interval::new(pair[0].clone(), pair[1].clone()).expect("sorted"))
        .collect()
}

impl Default for StepFunction {
    fn default() -> Self {
        StepFunction::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_i};

    fn iv(lo: i64, hi: i64) -> Interval {
        Interval::of_ints(lo, hi)
    }

    #[test]
    fn canonical_form_merges_and_drops_zeros() {
        let f = StepFunction::new(vec![(iv(0, 1), 1.0), (iv(1, 2), 1.0), (iv(3, 4), 0.0)])
            .unwrap();
        assert_eq!(f.pieces().len(), 1);
        assert_eq!(f.pieces()[0].0, iv(0, 2));
        assert!(StepFunction::new(vec![(iv(0, 2), 1.0), (iv(1, 3), 1.0)]).is_err());
    }

    #[test]
    fn arithmetic_and_norms() {
        let f = StepFunction::indicator(iv(0, 2));
        let g = StepFunction::indicator(iv(1, 3)).scale(2.0);
        let sum = f.add(&g);
        assert_eq!(sum.value_at(&rat(1, 2)), 1.0);
        assert_eq!(sum.value_at(&rat(3, 2)), 3.0);
        assert_eq!(sum.value_at(&rat(5, 2)), 2.0);
        assert_eq!(sum.integral(), 1.0 + 3.0 + 2.0);
        assert_eq!(f.inner(&g), 2.0);
        assert_eq!(f.l2_norm_sq(), 2.0);
        assert!(f.sub(&f).is_zero());
        assert_eq!(f.l1_distance(&g), 1.0 + 1.0 + 2.0);
    }

    #[test]
    fn restrict_and_outside_partition() {
        let f = StepFunction::indicator(iv(0, 4)).scale(3.0);
        let set = IntervalSet::from_intervals(vec![iv(1, 2), iv(3, 5)]);
        let inside = f.restrict(&set);
        let outside = f.restrict_outside(&set);
        assert_eq!(inside.add(&outside), f);
        assert_eq!(inside.integral(), 6.0);
    }

    #[test]
    fn sqrt_and_split() {
        let f = StepFunction::new(vec![(iv(0, 1), 4.0), (iv(1, 2), -1.0)]).unwrap();
        let (pos, neg) = f.split_signs();
        assert_eq!(pos.sub(&neg), f);
        assert_eq!(pos.sqrt().unwrap().value_at(&rat(1, 2)), 2.0);
        assert!(f.sqrt().is_err());
    }

    #[test]
    fn doc_round_trip() {
        let f = StepFunction::new(vec![(
            Interval::new(rat_i(0), rat(1, 2)).unwrap(),
            1.5,
        )])
        .unwrap();
        let doc = serde_json::to_string(&f.to_doc()).unwrap();
        let back = StepFunction::from_json(&doc).unwrap();
        assert_eq!(f, back);
        assert!(doc.contains("\"0/1\""));
    }
}
