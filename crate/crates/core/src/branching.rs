//! Branching systems: ranges, domains and invertible fiber maps attached to
//! an ultragraph, either as intervals on the real line with piecewise-affine
//! maps or as finite index sets with bijections.
//!
//! The standard construction parks the range of the i-th edge on `[i-1, i]`
//! and the i-th sink on `[-i, 1-i]`; an emitter's domain is the union of the
//! ranges it emits. A fiber map carries the domain of the edge's range onto
//! the edge's range interval, one affine piece per unit component: equal
//! subdivision when there are finitely many components, the dyadic geometric
//! subdivision when a sink tail makes them infinite. Tail pieces accumulate
//! at the right endpoint of the range and are materialized on demand.
//!
//! The five defining conditions (disjoint ranges, a lattice-compatible
//! domain family, ranges inside their source domains, regular domains
//! exhausted by their ranges, and invertible fiber maps with positive
//! piecewise-constant derivatives) are validated exactly on the rational
//! interval data.

use crate::error::{Error, Result};
use crate::graph::{EdgeId, GraphDoc, Ultragraph, VertexId, VertexSet};
use crate::interval::{Interval, IntervalSet};
use crate::rat::{self, half_pow, rat_i, Rat};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Depth to which lazy tail data is materialized by validation and
/// verification routines.
pub const TAIL_DEPTH: u32 = 8;

/// One affine piece `x -> slope * x + offset` on a closed domain, strictly
/// increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffinePiece {
    dom: Interval,
    slope: Rat,
    offset: Rat,
}

impl AffinePiece {
    pub fn new(dom: Interval, slope: Rat, offset: Rat) -> Result<Self> {
        if slope <= Rat::zero() {
            return Err(Error::BadMap(format!(
                "slope {} is not positive",
                rat::format(&slope)
            )));
        }
        Ok(AffinePiece { dom, slope, offset })
    }

    /// The affine bijection from `dom` onto `img`.
    pub fn through(dom: Interval, img: Interval) -> Self {
        let slope = img.len() / dom.len();
        let offset = img.lo() - &slope * dom.lo();
        AffinePiece { dom, slope, offset }
    }

    pub fn dom(&self) -> &Interval {
        &self.dom
    }

    pub fn slope(&self) -> &Rat {
        &self.slope
    }

    pub fn offset(&self) -> &Rat {
        &self.offset
    }

    pub fn apply(&self, x: &Rat) -> Rat {
        &self.slope * x + &self.offset
    }

    pub fn image(&self) -> Interval {
        Interval::new(self.apply(self.dom.lo()), self.apply(self.dom.hi()))
            .expect("positive slope preserves orientation")
    }

    pub fn invert(&self) -> AffinePiece {
        let slope = rat_i(1) / &self.slope;
        let offset = -(&self.offset / &self.slope);
        AffinePiece {
            dom: self.image(),
            slope,
            offset,
        }
    }

    fn same_line(&self, other: &AffinePiece) -> bool {
        self.slope == other.slope && self.offset == other.offset
    }
}

/// A strictly increasing piecewise-affine map: pieces sorted by domain,
/// interiors disjoint, adjacent collinear pieces merged.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PiecewiseAffineMap {
    pieces: Vec<AffinePiece>,
}

impl PiecewiseAffineMap {
    pub fn new(mut pieces: Vec<AffinePiece>) -> Result<Self> {
        pieces.sort_by(|a, b| a.dom.cmp(&b.dom));
        for pair in pieces.windows(2) {
            if pair[0].dom.hi() > pair[1].dom.lo() {
                return Err(Error::BadMap(format!(
                    "domains {} and {} overlap",
                    pair[0].dom, pair[1].dom
                )));
            }
        }
        let mut merged: Vec<AffinePiece> = Vec::with_capacity(pieces.len());
        for p in pieces {
            match merged.last_mut() {
                Some(last) if last.same_line(&p) && last.dom.hi() == p.dom.lo() => {
                    last.dom = Interval::new(last.dom.lo().clone(), p.dom.hi().clone())?;
                }
                _ => merged.push(p),
            }
        }
        Ok(PiecewiseAffineMap { pieces: merged })
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn domain(&self) -> IntervalSet {
        IntervalSet::from_intervals(self.pieces.iter().map(|p| p.dom.clone()))
    }

    pub fn image(&self) -> IntervalSet {
        IntervalSet::from_intervals(self.pieces.iter().map(|p| p.image()))
    }

    /// Inverse map; fails when images overlap with positive measure.
    pub fn invert(&self) -> Result<PiecewiseAffineMap> {
        PiecewiseAffineMap::new(self.pieces.iter().map(|p| p.invert()).collect())
    }

    pub fn apply(&self, x: &Rat) -> Option<Rat> {
        self.pieces
            .iter()
            .find(|p| p.dom.contains(x))
            .map(|p| p.apply(x))
    }
}

/// Sink-tail placement: the tail sink with index `i` lives on
/// `[-(k), 1-k]` where `k = first_position + (i - start)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailSinkRule {
    pub start: u32,
    pub first_position: u32,
}

impl TailSinkRule {
    pub fn interval(&self, index: u32) -> Interval {
        let k = i64::from(self.first_position) + i64::from(index) - i64::from(self.start);
        Interval::of_ints(-k, 1 - k)
    }
}

/// The fiber map of one edge: fully materialized, or an explicit prefix plus
/// the lazily generated tail pieces.
#[derive(Debug, Clone, PartialEq, Eq)]
enum EdgeMap {
    Finite(PiecewiseAffineMap),
    Tailed(TailedEdgeMap),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct TailedEdgeMap {
    /// The edge's range interval `[n, n+1]`.
    target: Interval,
    /// Unit components contributed by explicit range members, ascending.
    explicit_units: Vec<Interval>,
    tail_from: u32,
}

impl TailedEdgeMap {
    /// Geometric slot `i` (1-based) inside the target.
    fn slot(&self, i: u32) -> Interval {
        let hi = self.target.hi();
        Interval::new(hi - half_pow(i - 1), hi - half_pow(i)).expect("dyadic slots are ordered")
    }

    fn component(&self, idx: u32, rule: &TailSinkRule) -> Interval {
        let m = self.explicit_units.len() as u32;
        if idx < m {
            self.explicit_units[idx as usize].clone()
        } else {
            rule.interval(self.tail_from + (idx - m))
        }
    }

    fn piece(&self, idx: u32, rule: &TailSinkRule) -> AffinePiece {
        AffinePiece::through(self.component(idx, rule), self.slot(idx + 1))
    }
}

/// A branching system on the real line with Lebesgue measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalBranchingSystem {
    graph: Ultragraph,
    r: BTreeMap<EdgeId, IntervalSet>,
    /// Domains of explicit vertices; tail sink domains come from the rule.
    d: BTreeMap<VertexId, IntervalSet>,
    f: BTreeMap<EdgeId, EdgeMap>,
    tail_rule: Option<TailSinkRule>,
}

impl IntervalBranchingSystem {
    pub fn graph(&self) -> &Ultragraph {
        &self.graph
    }

    pub fn r_set(&self, e: &str) -> Result<&IntervalSet> {
        self.r.get(e).ok_or_else(|| Error::UnknownEdge(e.to_string()))
    }

    pub fn r_union(&self) -> IntervalSet {
        self.r
            .values()
            .fold(IntervalSet::empty(), |acc, s| acc.union(s))
    }

    pub fn tail_rule(&self) -> Option<&TailSinkRule> {
        self.tail_rule.as_ref()
    }

    /// Domain of a single vertex.
    pub fn d_vertex(&self, v: &VertexId) -> Result<IntervalSet> {
        if let Some(set) = self.d.get(v) {
            return Ok(set.clone());
        }
        match (v, &self.tail_rule) {
            (VertexId::Tail(i), Some(rule)) => {
                Ok(IntervalSet::from_interval(rule.interval(*i)))
            }
            _ => Err(Error::UnknownVertex(v.to_string())),
        }
    }

    /// Domain of a vertex set. A set with a tail part needs a window to stay
    /// finite: only tail sinks whose home meets the window are materialized.
    pub fn d_set_within(&self, a: &VertexSet, window: Option<&Interval>) -> Result<IntervalSet> {
        let mut out = IntervalSet::empty();
        for v in a.explicit_members() {
            out = out.union(&self.d_vertex(v)?);
        }
        if let Some(t) = a.tail_from() {
            let rule = self
                .tail_rule
                .ok_or(Error::TailUnsupported("this branching system"))?;
            let window = window.ok_or_else(|| {
                Error::Precondition("a tailed domain needs a bounded window".into())
            })?;
            let mut i = t;
            loop {
                let home = rule.interval(i);
                if home.hi() <= window.lo() {
                    break;
                }
                if home.meet(window).is_some() {
                    out = out.union(&IntervalSet::from_interval(home));
                }
                i += 1;
            }
        }
        Ok(out)
    }

    /// Fiber-map pieces whose domain can matter for data supported in
    /// `[dmin, +inf)`. Finite maps return all pieces.
    pub fn map_pieces_for_domain(&self, e: &str, dmin: &Rat) -> Result<Vec<AffinePiece>> {
        match self.edge_map(e)? {
            EdgeMap::Finite(m) => Ok(m.pieces().to_vec()),
            EdgeMap::Tailed(t) => {
                let rule = self.tail_rule.expect("tailed map implies a tail rule");
                let mut out = Vec::new();
                let mut idx = 0u32;
                loop {
                    let comp = t.component(idx, &rule);
                    let beyond_tail = idx >= t.explicit_units.len() as u32;
                    if beyond_tail && comp.hi() <= dmin {
                        break;
                    }
                    out.push(t.piece(idx, &rule));
                    idx += 1;
                }
                Ok(out)
            }
        }
    }

    /// Fiber-map pieces whose image meets `needed` (a subset of the range
    /// interval). Fails when `needed` reaches the accumulation point of a
    /// tailed map, where infinitely many pieces would contribute.
    pub fn map_pieces_for_image(&self, e: &str, needed: &IntervalSet) -> Result<Vec<AffinePiece>> {
        match self.edge_map(e)? {
            EdgeMap::Finite(m) => Ok(m.pieces().to_vec()),
            EdgeMap::Tailed(t) => {
                let rule = self.tail_rule.expect("tailed map implies a tail rule");
                let Some(bound) = needed.bounding() else {
                    return Ok(Vec::new());
                };
                if bound.hi() >= t.target.hi() {
                    return Err(Error::InfinitePieces(e.to_string()));
                }
                let mut out = Vec::new();
                let mut idx = 0u32;
                loop {
                    let slot = t.slot(idx + 1);
                    if slot.lo() >= bound.hi() {
                        break;
                    }
                    out.push(t.piece(idx, &rule));
                    idx += 1;
                }
                Ok(out)
            }
        }
    }

    /// All pieces with the tail truncated at `depth`.
    pub fn map_pieces_to_depth(&self, e: &str, depth: u32) -> Result<Vec<AffinePiece>> {
        match self.edge_map(e)? {
            EdgeMap::Finite(m) => Ok(m.pieces().to_vec()),
            EdgeMap::Tailed(t) => {
                let rule = self.tail_rule.expect("tailed map implies a tail rule");
                Ok((0..t.explicit_units.len() as u32 + depth)
                    .map(|idx| t.piece(idx, &rule))
                    .collect())
            }
        }
    }

    /// The uncovered dyadic margin `[hi - 2^-depth, hi]` of a tailed edge.
    pub fn tail_margin(&self, e: &str, depth: u32) -> Result<Option<Interval>> {
        match self.edge_map(e)? {
            EdgeMap::Finite(_) => Ok(None),
            EdgeMap::Tailed(t) => {
                let m = t.explicit_units.len() as u32 + depth;
                Ok(Some(
                    Interval::new(t.target.hi() - half_pow(m), t.target.hi().clone())
                        .expect("positive margin"),
                ))
            }
        }
    }

    pub fn is_tailed_edge(&self, e: &str) -> Result<bool> {
        Ok(matches!(self.edge_map(e)?, EdgeMap::Tailed(_)))
    }

    fn edge_map(&self, e: &str) -> Result<&EdgeMap> {
        self.f.get(e).ok_or_else(|| Error::UnknownEdge(e.to_string()))
    }

    /// Breakpoint data for verification: endpoints of every range, every
    /// explicit domain, tail homes and map pieces to `depth`.
    pub fn breakpoints(&self, depth: u32) -> Result<Vec<Rat>> {
        let mut cuts = Vec::new();
        let mut push_set = |s: &IntervalSet| {
            for iv in s.parts() {
                cuts.push(iv.lo().clone());
                cuts.push(iv.hi().clone());
            }
        };
        for s in self.r.values() {
            push_set(s);
        }
        for s in self.d.values() {
            push_set(s);
        }
        if let Some(rule) = &self.tail_rule {
            for j in 0..depth {
                push_set(&IntervalSet::from_interval(rule.interval(rule.start + j)));
            }
        }
        for e in self.graph.edges() {
            for p in self.map_pieces_to_depth(&e.id, depth)? {
                cuts.push(p.dom().lo().clone());
                cuts.push(p.dom().hi().clone());
                let img = p.image();
                cuts.push(img.lo().clone());
                cuts.push(img.hi().clone());
            }
        }
        cuts.sort();
        cuts.dedup();
        Ok(cuts)
    }
}

fn unit_components(set: &IntervalSet) -> Result<Vec<Interval>> {
    // Slot construction yields integer endpoints; split merged runs back
    // into unit intervals so each component gets its own affine piece.
    let mut out = Vec::new();
    for part in set.parts() {
        let mut lo = part.lo().clone();
        let one = rat_i(1);
        while &lo + &one <= *part.hi() {
            let hi = &lo + &one;
            out.push(Interval::new(lo.clone(), hi.clone()).expect("unit"));
            lo = hi;
        }
        if lo != *part.hi() {
            return Err(Error::BadMap(format!(
                "domain component {part} does not split into unit intervals"
            )));
        }
    }
    Ok(out)
}

fn build_with_slots(g: &Ultragraph, slots: &[Interval]) -> IntervalBranchingSystem {
    assert_eq!(slots.len(), g.edges().len());
    let mut r = BTreeMap::new();
    for (edge, slot) in g.edges().iter().zip(slots) {
        r.insert(edge.id.clone(), IntervalSet::from_interval(slot.clone()));
    }

    let mut d: BTreeMap<VertexId, IntervalSet> = BTreeMap::new();
    let mut position = 0u32;
    for v in g.explicit_sinks() {
        position += 1;
        let k = i64::from(position);
        d.insert(v, IntervalSet::from_interval(Interval::of_ints(-k, 1 - k)));
    }
    let tail_rule = g.tail_start().map(|start| TailSinkRule {
        start,
        first_position: position + 1,
    });
    for v in g.explicit_vertices() {
        if g.is_sink(v) {
            continue;
        }
        let dom = g
            .out_edges(v)
            .fold(IntervalSet::empty(), |acc, e| acc.union(&r[&e.id]));
        d.insert(v.clone(), dom);
    }

    let mut f = BTreeMap::new();
    for edge in g.edges() {
        let explicit_units = {
            let mut set = IntervalSet::empty();
            for v in edge.range.explicit_members() {
                let home = match (d.get(v), v, &tail_rule) {
                    (Some(home), _, _) => home.clone(),
                    // A tail vertex listed below the range's threshold.
                    (None, VertexId::Tail(i), Some(rule)) => {
                        IntervalSet::from_interval(rule.interval(*i))
                    }
                    _ => unreachable!("validated graphs only mention known vertices"),
                };
                set = set.union(&home);
            }
            unit_components(&set).expect("builder slots have integer endpoints")
        };
        let target = r[&edge.id].parts()[0].clone();
        let map = match edge.range.tail_from() {
            Some(tail_from) => EdgeMap::Tailed(TailedEdgeMap {
                target,
                explicit_units,
                tail_from,
            }),
            None => {
                let m = explicit_units.len() as i64;
                let width = target.len() / rat_i(m);
                let pieces = explicit_units
                    .into_iter()
                    .enumerate()
                    .map(|(j, unit)| {
                        let lo = target.lo() + &width * rat_i(j as i64);
                        let hi = target.lo() + &width * rat_i(j as i64 + 1);
                        AffinePiece::through(unit, Interval::new(lo, hi).expect("ordered"))
                    })
                    .collect();
                EdgeMap::Finite(PiecewiseAffineMap::new(pieces).expect("disjoint units"))
            }
        };
        f.insert(edge.id.clone(), map);
    }

    IntervalBranchingSystem {
        graph: g.clone(),
        r,
        d,
        f,
        tail_rule,
    }
}

/// The standard system: edge `i` (declaration order) on `[i-1, i]`, sinks on
/// the negative axis, emitters over their ranges.
pub fn build_standard_interval_bs(g: &Ultragraph) -> IntervalBranchingSystem {
    let slots: Vec<Interval> = (0..g.edges().len() as i64)
        .map(|i| Interval::of_ints(i, i + 1))
        .collect();
    build_with_slots(g, &slots)
}

/// A standard system rearranged so the edges of a simple no-exit cycle
/// occupy the first slots in cycle order. The composed fiber map of the
/// cycle is then the identity on `[0, 1]` and its derivative is one.
pub fn build_no_exit_degenerate_bs(
    g: &Ultragraph,
    c: &crate::paths::Cycle,
) -> Result<IntervalBranchingSystem> {
    if !c.simple || !crate::paths::has_no_exits(g, c)? {
        return Err(Error::CycleHasExit);
    }
    let cycle_pos: BTreeMap<&EdgeId, usize> = c
        .edges()
        .iter()
        .enumerate()
        .map(|(i, id)| (id, i))
        .collect();
    let k = c.edges().len();
    let mut next = k as i64;
    let mut slots = Vec::with_capacity(g.edges().len());
    for edge in g.edges() {
        match cycle_pos.get(&edge.id) {
            Some(&i) => slots.push(Interval::of_ints(i as i64, i as i64 + 1)),
            None => {
                slots.push(Interval::of_ints(next, next + 1));
                next += 1;
            }
        }
    }
    Ok(build_with_slots(g, &slots))
}

/// A branching system on the positive integers with counting measure; all
/// derivatives are one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteBranchingSystem {
    graph: Ultragraph,
    r: BTreeMap<EdgeId, Vec<u64>>,
    d: BTreeMap<VertexId, Vec<u64>>,
    /// Bijection per edge as sorted (domain, image) pairs.
    f: BTreeMap<EdgeId, Vec<(u64, u64)>>,
}

impl DiscreteBranchingSystem {
    pub fn new(
        graph: Ultragraph,
        r: BTreeMap<EdgeId, Vec<u64>>,
        d: BTreeMap<VertexId, Vec<u64>>,
        f: BTreeMap<EdgeId, Vec<(u64, u64)>>,
    ) -> Self {
        let norm = |mut v: Vec<u64>| {
            v.sort();
            v.dedup();
            v
        };
        DiscreteBranchingSystem {
            graph,
            r: r.into_iter().map(|(k, v)| (k, norm(v))).collect(),
            d: d.into_iter().map(|(k, v)| (k, norm(v))).collect(),
            f: f.into_iter()
                .map(|(k, mut v)| {
                    v.sort();
                    v.dedup();
                    (k, v)
                })
                .collect(),
        }
    }

    pub fn graph(&self) -> &Ultragraph {
        &self.graph
    }

    pub fn r_set(&self, e: &str) -> Result<&[u64]> {
        self.r
            .get(e)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::UnknownEdge(e.to_string()))
    }

    pub fn d_vertex(&self, v: &VertexId) -> Result<&[u64]> {
        self.d
            .get(v)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::UnknownVertex(v.to_string()))
    }

    pub fn d_set(&self, a: &VertexSet) -> Result<Vec<u64>> {
        if a.has_tail() {
            return Err(Error::TailUnsupported("discrete domains"));
        }
        let mut out = Vec::new();
        for v in a.explicit_members() {
            out.extend_from_slice(self.d_vertex(v)?);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    pub fn forward(&self, e: &str) -> Result<&[(u64, u64)]> {
        self.f
            .get(e)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::UnknownEdge(e.to_string()))
    }

    pub fn apply(&self, e: &str, n: u64) -> Result<Option<u64>> {
        Ok(self
            .forward(e)?
            .iter()
            .find(|(a, _)| *a == n)
            .map(|(_, b)| *b))
    }

    pub fn apply_inverse(&self, e: &str, n: u64) -> Result<Option<u64>> {
        Ok(self
            .forward(e)?
            .iter()
            .find(|(_, b)| *b == n)
            .map(|(a, _)| *a))
    }

    /// Every index used anywhere, sorted.
    pub fn universe(&self) -> Vec<u64> {
        let mut out: Vec<u64> = self.d.values().flatten().copied().collect();
        out.extend(self.r.values().flatten().copied());
        for pairs in self.f.values() {
            for (a, b) in pairs {
                out.push(*a);
                out.push(*b);
            }
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn max_index(&self) -> u64 {
        self.universe().last().copied().unwrap_or(0)
    }
}

/// Synthesizes the discrete system realized by exhaustive peeling: sinks and
/// isolated vertices get singleton domains, an emitter's domain size is the
/// sum of its range sizes, computed against the topological order of the
/// vertex dependency graph. Fails on cyclic or non-peelable graphs.
pub fn build_discrete_bs_from_peeling(g: &Ultragraph) -> Result<DiscreteBranchingSystem> {
    if g.has_tail() {
        return Err(Error::TailUnsupported("discrete synthesis"));
    }
    let perm = crate::permutative::permutativity_condition(g)?;
    if !perm.holds {
        return Err(Error::NotPermutative);
    }
    // Vertex v depends on every vertex inside the ranges it emits onto.
    let vertices: Vec<&VertexId> = g.explicit_vertices().iter().collect();
    let index: BTreeMap<&VertexId, usize> =
        vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut indegree = vec![0usize; vertices.len()];
    let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
    for e in g.edges() {
        let src = index[&e.source];
        for u in e.range.explicit_members() {
            indegree[src] += 1;
            dependents[index[u]].push(src);
        }
    }
    let mut ready: Vec<usize> = (0..vertices.len()).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(vertices.len());
    while let Some(i) = ready.pop() {
        order.push(i);
        for &dep in &dependents[i] {
            indegree[dep] -= 1;
            if indegree[dep] == 0 {
                ready.push(dep);
            }
        }
    }
    if order.len() != vertices.len() {
        return Err(Error::CyclicGraph);
    }

    let mut d_size: BTreeMap<&VertexId, u64> = BTreeMap::new();
    let mut r_size: BTreeMap<&EdgeId, u64> = BTreeMap::new();
    for &i in &order {
        let v = vertices[i];
        if g.is_sink(v) {
            d_size.insert(v, 1);
            continue;
        }
        let mut total = 0;
        for e in g.out_edges(v) {
            let re: u64 = e
                .range
                .explicit_members()
                .map(|u| d_size[u])
                .sum();
            r_size.insert(&e.id, re);
            total += re;
        }
        d_size.insert(v, total);
    }

    // Contiguous blocks in canonical vertex order; an emitter's block is
    // partitioned among its edges in id order.
    let mut d: BTreeMap<VertexId, Vec<u64>> = BTreeMap::new();
    let mut next = 1u64;
    let mut sorted_vertices: Vec<&VertexId> = vertices.clone();
    sorted_vertices.sort();
    let mut r: BTreeMap<EdgeId, Vec<u64>> = BTreeMap::new();
    for v in &sorted_vertices {
        let size = d_size[*v];
        let block: Vec<u64> = (next..next + size).collect();
        next += size;
        if !g.is_sink(v) {
            let mut cursor = block[0];
            let mut ids: Vec<&EdgeId> = g.out_edges(v).map(|e| &e.id).collect();
            ids.sort();
            for id in ids {
                let re = r_size[id];
                r.insert((*id).clone(), (cursor..cursor + re).collect());
                cursor += re;
            }
        }
        d.insert((*v).clone(), block);
    }

    let mut f: BTreeMap<EdgeId, Vec<(u64, u64)>> = BTreeMap::new();
    for e in g.edges() {
        let mut dom: Vec<u64> = e
            .range
            .explicit_members()
            .flat_map(|u| d[u].iter().copied())
            .collect();
        dom.sort();
        let img = &r[&e.id];
        assert_eq!(dom.len(), img.len(), "sizes were computed bottom-up");
        f.insert(
            e.id.clone(),
            dom.into_iter().zip(img.iter().copied()).collect(),
        );
    }

    Ok(DiscreteBranchingSystem { graph: g.clone(), r, d, f })
}

/// Outcome of one defining condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionCheck {
    pub condition: u8,
    pub pass: bool,
    pub witness: Option<String>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BsReport {
    pub conditions: Vec<ConditionCheck>,
    pub pass: bool,
}

impl BsReport {
    fn from_conditions(conditions: Vec<ConditionCheck>) -> Self {
        let pass = conditions.iter().all(|c| c.pass);
        BsReport { conditions, pass }
    }
}

/// Exact validation of the five defining conditions of an interval system.
/// Tail data is checked on the materialized window, which the report notes.
pub fn validate_interval_bs(bs: &IntervalBranchingSystem) -> Result<BsReport> {
    let g = bs.graph();
    let mut conditions = Vec::with_capacity(5);

    // (1) ranges pairwise disjoint up to measure zero.
    let mut witness = None;
    let ids = g.edge_ids_sorted();
    'outer: for (i, a) in ids.iter().enumerate() {
        for b in &ids[i + 1..] {
            let overlap = bs.r_set(a)?.intersect(bs.r_set(b)?);
            if !overlap.measure().is_zero() {
                witness = Some(format!(
                    "ranges of `{a}` and `{b}` overlap on {}",
                    overlap.parts()[0]
                ));
                break 'outer;
            }
        }
    }
    conditions.push(ConditionCheck {
        condition: 1,
        pass: witness.is_none(),
        witness,
        note: None,
    });

    // (2) the domain family respects empty set, intersections and unions.
    // Domains of sets are unions of vertex domains, so this reduces to
    // pairwise disjointness of vertex domains.
    let mut homes: Vec<(String, IntervalSet)> = Vec::new();
    for v in g.explicit_vertices() {
        homes.push((g.vertex_name(v), bs.d_vertex(v)?));
    }
    if let Some(rule) = bs.tail_rule() {
        for j in 0..TAIL_DEPTH {
            let i = rule.start + j;
            homes.push((
                g.vertex_name(&VertexId::Tail(i)),
                IntervalSet::from_interval(rule.interval(i)),
            ));
        }
    }
    let mut witness = None;
    'outer2: for (i, (name_a, a)) in homes.iter().enumerate() {
        for (name_b, b) in &homes[i + 1..] {
            let overlap = a.intersect(b);
            if !overlap.measure().is_zero() {
                witness = Some(format!(
                    "domains of `{name_a}` and `{name_b}` overlap on {}",
                    overlap.parts()[0]
                ));
                break 'outer2;
            }
        }
    }
    conditions.push(ConditionCheck {
        condition: 2,
        pass: witness.is_none(),
        witness,
        note: bs
            .tail_rule()
            .map(|_| format!("tail sinks checked to depth {TAIL_DEPTH}")),
    });

    // (3) each range sits inside the domain of its source.
    let mut witness = None;
    for e in g.edges() {
        let d_source = bs.d_vertex(&e.source)?;
        let escape = bs.r_set(&e.id)?.minus(&d_source);
        if !escape.measure().is_zero() {
            witness = Some(format!(
                "range of `{}` leaves the source domain on {}",
                e.id,
                escape.parts()[0]
            ));
            break;
        }
    }
    conditions.push(ConditionCheck {
        condition: 3,
        pass: witness.is_none(),
        witness,
        note: None,
    });

    // (4) a regular vertex's domain is exhausted by its ranges.
    let mut witness = None;
    for v in g.explicit_vertices() {
        if g.is_sink(v) {
            continue;
        }
        let emitted = g
            .out_edges(v)
            .map(|e| bs.r_set(&e.id))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(IntervalSet::empty(), |acc, s| acc.union(s));
        let dv = bs.d_vertex(v)?;
        if !dv.eq_ae(&emitted) {
            let gap = dv.minus(&emitted).union(&emitted.minus(&dv));
            witness = Some(format!(
                "domain of `{}` and its emitted ranges differ on {}",
                g.vertex_name(v),
                gap.parts()[0]
            ));
            break;
        }
    }
    conditions.push(ConditionCheck {
        condition: 4,
        pass: witness.is_none(),
        witness,
        note: None,
    });

    // (5) fiber maps: disjoint increasing pieces, domain matching the
    // range's domain, image matching the range interval.
    let mut witness = None;
    let mut tailed_note = false;
    for e in g.edges() {
        let pieces = bs.map_pieces_to_depth(&e.id, TAIL_DEPTH)?;
        let map = match PiecewiseAffineMap::new(pieces) {
            Ok(m) => m,
            Err(err) => {
                witness = Some(format!("map of `{}` is not piecewise increasing: {err}", e.id));
                break;
            }
        };
        if map.invert().is_err() {
            witness = Some(format!("map of `{}` is not invertible", e.id));
            break;
        }
        let window = map.domain().bounding();
        let expected_dom = bs.d_set_within(&e.range, window.as_ref())?;
        let (dom_target, note_tail) = if bs.is_tailed_edge(&e.id)? {
            tailed_note = true;
            // Compare against the materialized components only.
            (expected_dom.intersect(&map.domain()), true)
        } else {
            (expected_dom, false)
        };
        if !map.domain().eq_ae(&dom_target) {
            let gap = map.domain().minus(&dom_target).union(&dom_target.minus(&map.domain()));
            witness = Some(format!(
                "map domain of `{}` mismatches the range domain on {}",
                e.id,
                gap.parts()[0]
            ));
            break;
        }
        let r_e = bs.r_set(&e.id)?;
        let covered = if note_tail {
            let margin = bs
                .tail_margin(&e.id, TAIL_DEPTH)?
                .expect("tailed edge has a margin");
            r_e.minus(&IntervalSet::from_interval(margin))
        } else {
            r_e.clone()
        };
        if !map.image().eq_ae(&covered) {
            let gap = map.image().minus(&covered).union(&covered.minus(&map.image()));
            witness = Some(format!(
                "map image of `{}` mismatches the range on {}",
                e.id,
                gap.parts()[0]
            ));
            break;
        }
    }
    conditions.push(ConditionCheck {
        condition: 5,
        pass: witness.is_none(),
        witness,
        note: tailed_note.then(|| format!("tail pieces checked to depth {TAIL_DEPTH}")),
    });

    Ok(BsReport::from_conditions(conditions))
}

/// Exact validation of the discrete transcription of the five conditions.
pub fn validate_discrete_bs(dbs: &DiscreteBranchingSystem) -> Result<BsReport> {
    let g = dbs.graph();
    let mut conditions = Vec::with_capacity(5);
    let ids = g.edge_ids_sorted();

    let mut witness = None;
    'outer: for (i, a) in ids.iter().enumerate() {
        for b in &ids[i + 1..] {
            let ra = dbs.r_set(a)?;
            if dbs.r_set(b)?.iter().any(|n| ra.contains(n)) {
                witness = Some(format!("ranges of `{a}` and `{b}` share an index"));
                break 'outer;
            }
        }
    }
    conditions.push(ConditionCheck {
        condition: 1,
        pass: witness.is_none(),
        witness,
        note: None,
    });

    let mut witness = None;
    let homes: Vec<(&VertexId, &Vec<u64>)> = dbs.d.iter().collect();
    'outer2: for (i, (va, a)) in homes.iter().enumerate() {
        for (vb, b) in &homes[i + 1..] {
            if b.iter().any(|n| a.contains(n)) {
                witness = Some(format!(
                    "domains of `{}` and `{}` share an index",
                    g.vertex_name(va),
                    g.vertex_name(vb)
                ));
                break 'outer2;
            }
        }
    }
    conditions.push(ConditionCheck {
        condition: 2,
        pass: witness.is_none(),
        witness,
        note: None,
    });

    let mut witness = None;
    for e in g.edges() {
        let ds = dbs.d_vertex(&e.source)?;
        if let Some(n) = dbs.r_set(&e.id)?.iter().find(|n| !ds.contains(n)) {
            witness = Some(format!("index {n} of range `{}` escapes the source domain", e.id));
            break;
        }
    }
    conditions.push(ConditionCheck {
        condition: 3,
        pass: witness.is_none(),
        witness,
        note: None,
    });

    let mut witness = None;
    for v in g.explicit_vertices() {
        if g.is_sink(v) {
            continue;
        }
        let mut emitted: Vec<u64> = Vec::new();
        for e in g.out_edges(v) {
            emitted.extend_from_slice(dbs.r_set(&e.id)?);
        }
        emitted.sort();
        emitted.dedup();
        if emitted != *dbs.d_vertex(v)? {
            witness = Some(format!(
                "domain of `{}` is not the union of its ranges",
                g.vertex_name(v)
            ));
            break;
        }
    }
    conditions.push(ConditionCheck {
        condition: 4,
        pass: witness.is_none(),
        witness,
        note: None,
    });

    let mut witness = None;
    for e in g.edges() {
        let pairs = dbs.forward(&e.id)?;
        let mut dom: Vec<u64> = pairs.iter().map(|(a, _)| *a).collect();
        let mut img: Vec<u64> = pairs.iter().map(|(_, b)| *b).collect();
        dom.sort();
        dom.dedup();
        img.sort();
        img.dedup();
        if dom.len() != pairs.len() || img.len() != pairs.len() {
            witness = Some(format!("map of `{}` is not a bijection", e.id));
            break;
        }
        let expected = dbs.d_set(&g.require_edge(&e.id)?.range)?;
        if dom != expected || img != *dbs.r_set(&e.id)? {
            witness = Some(format!(
                "map of `{}` does not carry the range domain onto the range",
                e.id
            ));
            break;
        }
    }
    conditions.push(ConditionCheck {
        condition: 5,
        pass: witness.is_none(),
        witness,
        note: None,
    });

    Ok(BsReport::from_conditions(conditions))
}

/// Global branch map of a finite system: the inverse fiber map on every
/// range interval, identity off their union. Tailed systems would need
/// infinitely many branches.
pub fn assemble_map(bs: &IntervalBranchingSystem) -> Result<PiecewiseAffineMap> {
    let mut pieces = Vec::new();
    for e in bs.graph().edges() {
        if bs.is_tailed_edge(&e.id)? {
            return Err(Error::TailUnsupported("assembling the global branch map"));
        }
        for p in bs.map_pieces_to_depth(&e.id, 0)? {
            pieces.push(p.invert());
        }
    }
    PiecewiseAffineMap::new(pieces)
}

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AffinePieceDoc {
    pub dom: [String; 2],
    pub slope: String,
    pub offset: String,
}

/// JSON shape shared by interval and discrete systems; `kind` dispatches.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchingDoc {
    pub kind: String,
    pub graph: GraphDoc,
    #[serde(rename = "R")]
    pub r: BTreeMap<String, serde_json::Value>,
    #[serde(rename = "D")]
    pub d: BTreeMap<String, serde_json::Value>,
    pub f: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_sinks: Option<TailSinkRule>,
}

#[derive(Debug, Clone)]
pub enum BranchingSystem {
    Interval(IntervalBranchingSystem),
    Discrete(DiscreteBranchingSystem),
}

fn interval_set_to_value(set: &IntervalSet) -> serde_json::Value {
    serde_json::Value::Array(
        set.parts()
            .iter()
            .map(|iv| {
                serde_json::json!([rat::format(iv.lo()), rat::format(iv.hi())])
            })
            .collect(),
    )
}

fn interval_set_from_value(value: &serde_json::Value) -> Result<IntervalSet> {
    let arr = value
        .as_array()
        .ok_or_else(|| Error::BadDocument("interval set must be an array".into()))?;
    let mut parts = Vec::with_capacity(arr.len());
    for pair in arr {
        let pair = pair
            .as_array()
            .filter(|p| p.len() == 2)
            .ok_or_else(|| Error::BadDocument("interval must be a [lo, hi] pair".into()))?;
        let lo = rat::parse(pair[0].as_str().ok_or_else(|| {
            Error::BadDocument("interval endpoints are p/q strings".into())
        })?)?;
        let hi = rat::parse(pair[1].as_str().ok_or_else(|| {
            Error::BadDocument("interval endpoints are p/q strings".into())
        })?)?;
        parts.push(Interval::new(lo, hi)?);
    }
    Ok(IntervalSet::from_intervals(parts))
}

impl IntervalBranchingSystem {
    pub fn to_doc(&self) -> BranchingDoc {
        let g = &self.graph;
        let mut f = BTreeMap::new();
        for (id, map) in &self.f {
            let pieces: Vec<AffinePieceDoc> = match map {
                EdgeMap::Finite(m) => m.pieces().iter().map(piece_doc).collect(),
                EdgeMap::Tailed(t) => {
                    let rule = self.tail_rule.expect("tailed map implies a tail rule");
                    (0..t.explicit_units.len() as u32 + TAIL_DEPTH)
                        .map(|idx| piece_doc(&t.piece(idx, &rule)))
                        .collect()
                }
            };
            f.insert(id.clone(), serde_json::to_value(pieces).expect("plain data"));
        }
        BranchingDoc {
            kind: "interval".into(),
            graph: g.to_doc(),
            r: self
                .r
                .iter()
                .map(|(id, s)| (id.clone(), interval_set_to_value(s)))
                .collect(),
            d: self
                .d
                .iter()
                .map(|(v, s)| (g.vertex_name(v), interval_set_to_value(s)))
                .collect(),
            f,
            tail_sinks: self.tail_rule,
        }
    }

    /// Rebuilds a system from its document. Finite fiber maps are taken from
    /// the document verbatim so corrupted systems stay representable;
    /// tail maps are regenerated from the rule.
    pub fn from_doc(doc: &BranchingDoc) -> Result<IntervalBranchingSystem> {
        if doc.kind != "interval" {
            return Err(Error::BadDocument(format!(
                "expected an interval system, got `{}`",
                doc.kind
            )));
        }
        let graph = crate::graph::validate_ultragraph(&doc.graph)?;
        let mut r = BTreeMap::new();
        for e in graph.edges() {
            let value = doc
                .r
                .get(&e.id)
                .ok_or_else(|| Error::BadDocument(format!("missing R for `{}`", e.id)))?;
            r.insert(e.id.clone(), interval_set_from_value(value)?);
        }
        let mut d = BTreeMap::new();
        for v in graph.explicit_vertices() {
            let name = graph.vertex_name(v);
            let value = doc
                .d
                .get(&name)
                .ok_or_else(|| Error::BadDocument(format!("missing D for `{name}`")))?;
            d.insert(v.clone(), interval_set_from_value(value)?);
        }
        let tail_rule = doc.tail_sinks;
        if graph.has_tail() && tail_rule.is_none() {
            return Err(Error::BadDocument("tailed graph needs tail_sinks".into()));
        }
        let mut f = BTreeMap::new();
        for e in graph.edges() {
            if let Some(t) = e.range.tail_from() {
                let explicit_units = {
                    let mut set = IntervalSet::empty();
                    for v in e.range.explicit_members() {
                        match d.get(v) {
                            Some(home) => set = set.union(home),
                            None => {
                                let rule =
                                    tail_rule.ok_or(Error::TailUnsupported("this document"))?;
                                if let VertexId::Tail(i) = v {
                                    set = set
                                        .union(&IntervalSet::from_interval(rule.interval(*i)));
                                }
                            }
                        }
                    }
                    unit_components(&set)?
                };
                let target = r[&e.id]
                    .bounding()
                    .ok_or_else(|| Error::BadDocument(format!("empty R for `{}`", e.id)))?;
                f.insert(
                    e.id.clone(),
                    EdgeMap::Tailed(TailedEdgeMap {
                        target,
                        explicit_units,
                        tail_from: t,
                    }),
                );
            } else {
                let value = doc
                    .f
                    .get(&e.id)
                    .ok_or_else(|| Error::BadDocument(format!("missing f for `{}`", e.id)))?;
                let pieces: Vec<AffinePieceDoc> = serde_json::from_value(value.clone())
                    .map_err(|err| Error::BadDocument(err.to_string()))?;
                let pieces = pieces
                    .iter()
                    .map(piece_from_doc)
                    .collect::<Result<Vec<_>>>()?;
                f.insert(e.id.clone(), EdgeMap::Finite(PiecewiseAffineMap::new(pieces)?));
            }
        }
        Ok(IntervalBranchingSystem {
            graph,
            r,
            d,
            f,
            tail_rule,
        })
    }
}

fn piece_doc(p: &AffinePiece) -> AffinePieceDoc {
    AffinePieceDoc {
        dom: [rat::format(p.dom().lo()), rat::format(p.dom().hi())],
        slope: rat::format(p.slope()),
        offset: rat::format(p.offset()),
    }
}

fn piece_from_doc(doc: &AffinePieceDoc) -> Result<AffinePiece> {
    AffinePiece::new(
        Interval::new(rat::parse(&doc.dom[0])?, rat::parse(&doc.dom[1])?)?,
        rat::parse(&doc.slope)?,
        rat::parse(&doc.offset)?,
    )
}

impl DiscreteBranchingSystem {
    pub fn to_doc(&self) -> BranchingDoc {
        let g = &self.graph;
        BranchingDoc {
            kind: "discrete".into(),
            graph: g.to_doc(),
            r: self
                .r
                .iter()
                .map(|(id, v)| (id.clone(), serde_json::json!(v)))
                .collect(),
            d: self
                .d
                .iter()
                .map(|(v, s)| (g.vertex_name(v), serde_json::json!(s)))
                .collect(),
            f: self
                .f
                .iter()
                .map(|(id, pairs)| (id.clone(), serde_json::json!(pairs)))
                .collect(),
            tail_sinks: None,
        }
    }

    pub fn from_doc(doc: &BranchingDoc) -> Result<DiscreteBranchingSystem> {
        if doc.kind != "discrete" {
            return Err(Error::BadDocument(format!(
                "expected a discrete system, got `{}`",
                doc.kind
            )));
        }
        let graph = crate::graph::validate_ultragraph(&doc.graph)?;
        let parse_indices = |v: &serde_json::Value| -> Result<Vec<u64>> {
            serde_json::from_value(v.clone()).map_err(|e| Error::BadDocument(e.to_string()))
        };
        let mut r = BTreeMap::new();
        for e in graph.edges() {
            let value = doc
                .r
                .get(&e.id)
                .ok_or_else(|| Error::BadDocument(format!("missing R for `{}`", e.id)))?;
            r.insert(e.id.clone(), parse_indices(value)?);
        }
        let mut d = BTreeMap::new();
        for v in graph.explicit_vertices() {
            let name = graph.vertex_name(v);
            let value = doc
                .d
                .get(&name)
                .ok_or_else(|| Error::BadDocument(format!("missing D for `{name}`")))?;
            d.insert(v.clone(), parse_indices(value)?);
        }
        let mut f = BTreeMap::new();
        for e in graph.edges() {
            let value = doc
                .f
                .get(&e.id)
                .ok_or_else(|| Error::BadDocument(format!("missing f for `{}`", e.id)))?;
            let pairs: Vec<(u64, u64)> = serde_json::from_value(value.clone())
                .map_err(|err| Error::BadDocument(err.to_string()))?;
            f.insert(e.id.clone(), pairs);
        }
        Ok(DiscreteBranchingSystem::new(graph, r, d, f))
    }
}

/// Loads either kind of system from JSON text.
pub fn load_branching_doc(text: &str) -> Result<BranchingSystem> {
    let doc: BranchingDoc =
        serde_json::from_str(text).map_err(|e| Error::BadDocument(e.to_string()))?;
    match doc.kind.as_str() {
        "interval" => Ok(BranchingSystem::Interval(IntervalBranchingSystem::from_doc(&doc)?)),
        "discrete" => Ok(BranchingSystem::Discrete(DiscreteBranchingSystem::from_doc(&doc)?)),
        other => Err(Error::BadDocument(format!("unknown system kind `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::Cycle;
    use crate::rat::rat;
    use crate::samples;

    fn iv(lo: i64, hi: i64) -> Interval {
        Interval::of_ints(lo, hi)
    }

    #[test]
    fn standard_system_on_the_demo_graph() {
        let g = samples::ten_vertex_demo();
        let bs = build_standard_interval_bs(&g);
        for (i, e) in g.edges().iter().enumerate() {
            assert_eq!(
                bs.r_set(&e.id).unwrap(),
                &IntervalSet::from_interval(iv(i as i64, i as i64 + 1))
            );
        }
        // Sinks v3, v4, v5, v7, v8, v9 in declaration order on the negative axis.
        let sink = |name: &str| bs.d_vertex(&VertexId::explicit(name)).unwrap();
        assert_eq!(sink("v3"), IntervalSet::from_interval(iv(-1, 0)));
        assert_eq!(sink("v9"), IntervalSet::from_interval(iv(-6, -5)));
        assert_eq!(sink("v2"), IntervalSet::from_interval(iv(2, 3)));
        assert_eq!(
            sink("v6"),
            IntervalSet::from_intervals(vec![iv(1, 2), iv(3, 4)])
        );
        // f_e1: [-1,0] -> [0,1/2] and [2,3] -> [1/2,1], slopes 1/2.
        let pieces = bs.map_pieces_to_depth("e1", 0).unwrap();
        assert_eq!(pieces.len(), 2);
        assert_eq!(pieces[0].dom(), &iv(-1, 0));
        assert_eq!(pieces[0].image(), Interval::new(rat_i(0), rat(1, 2)).unwrap());
        assert_eq!(pieces[0].slope(), &rat(1, 2));
        assert_eq!(pieces[1].dom(), &iv(2, 3));
        assert_eq!(pieces[1].image(), Interval::new(rat(1, 2), rat_i(1)).unwrap());
        assert!(validate_interval_bs(&bs).unwrap().pass);
    }

    #[test]
    fn single_loop_gets_the_identity() {
        let bs = build_standard_interval_bs(&samples::single_loop());
        let pieces = bs.map_pieces_to_depth("e", 0).unwrap();
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0].dom(), &iv(0, 1));
        assert_eq!(pieces[0].slope(), &rat_i(1));
        assert_eq!(pieces[0].offset(), &rat_i(0));
        assert!(validate_interval_bs(&bs).unwrap().pass);
    }

    #[test]
    fn tail_range_pieces_follow_the_dyadic_ladder() {
        let g = samples::tail_range();
        let bs = build_standard_interval_bs(&g);
        let pieces = bs.map_pieces_to_depth("e", 3).unwrap();
        assert_eq!(pieces[0].dom(), &iv(-1, 0));
        assert_eq!(
            pieces[0].image(),
            Interval::new(rat_i(0), rat(1, 2)).unwrap()
        );
        assert_eq!(pieces[1].dom(), &iv(-2, -1));
        assert_eq!(
            pieces[1].image(),
            Interval::new(rat(1, 2), rat(3, 4)).unwrap()
        );
        assert!(validate_interval_bs(&bs).unwrap().pass);
    }

    #[test]
    fn degenerate_two_cycle_is_a_pair_of_shifts() {
        let g = samples::two_cycle();
        let c = Cycle::new(&g, vec!["e".into(), "f".into()]).unwrap();
        let bs = build_no_exit_degenerate_bs(&g, &c).unwrap();
        let fe = bs.map_pieces_to_depth("e", 0).unwrap();
        assert_eq!(fe[0].dom(), &iv(1, 2));
        assert_eq!(fe[0].image(), iv(0, 1));
        assert_eq!(fe[0].slope(), &rat_i(1));
        let ff = bs.map_pieces_to_depth("f", 0).unwrap();
        assert_eq!(ff[0].dom(), &iv(0, 1));
        assert_eq!(ff[0].image(), iv(1, 2));
        assert!(validate_interval_bs(&bs).unwrap().pass);

        // Composed map is the identity on [0, 1].
        let x = rat(1, 3);
        let after_f = ff[0].apply(&x);
        let after_e = fe[0].apply(&after_f);
        assert_eq!(after_e, x);
    }

    #[test]
    fn degenerate_builder_rejects_exits() {
        let g = samples::loop_with_branch();
        let c = Cycle::new(&g, vec!["e".into()]).unwrap();
        assert!(matches!(
            build_no_exit_degenerate_bs(&g, &c),
            Err(Error::CycleHasExit)
        ));
    }

    #[test]
    fn corrupted_system_fails_condition_one() {
        let g = samples::two_loops();
        let bs = build_standard_interval_bs(&g);
        let mut doc = bs.to_doc();
        doc.r.insert("f".into(), doc.r["e"].clone());
        let broken = IntervalBranchingSystem::from_doc(&doc).unwrap();
        let report = validate_interval_bs(&broken).unwrap();
        assert!(!report.pass);
        assert!(!report.conditions[0].pass);
        assert!(report.conditions[0].witness.is_some());
    }

    #[test]
    fn assemble_demo_map() {
        let g = samples::ten_vertex_demo();
        let bs = build_standard_interval_bs(&g);
        let map = assemble_map(&bs).unwrap();
        // Branch pieces after collinear merging; identity elsewhere.
        assert_eq!(map.pieces().len(), 6);
        assert_eq!(map.domain(), IntervalSet::from_interval(iv(0, 5)));

        let bs = build_standard_interval_bs(&samples::two_loops());
        let map = assemble_map(&bs).unwrap();
        assert_eq!(map.pieces().len(), 2);
        assert_eq!(map.pieces()[0].slope(), &rat_i(2));
        assert_eq!(map.pieces()[0].offset(), &rat_i(0));
        assert_eq!(map.pieces()[1].slope(), &rat_i(2));
        assert_eq!(map.pieces()[1].offset(), &rat_i(-2));

        let bs = build_standard_interval_bs(&samples::single_loop());
        let map = assemble_map(&bs).unwrap();
        assert_eq!(map.pieces().len(), 1);
        assert_eq!(map.pieces()[0].slope(), &rat_i(1));
    }

    #[test]
    fn discrete_synthesis_sizes_on_the_demo_graph() {
        let g = samples::ten_vertex_demo();
        let dbs = build_discrete_bs_from_peeling(&g).unwrap();
        let size = |name: &str| dbs.d_vertex(&VertexId::explicit(name)).unwrap().len();
        assert_eq!(size("v3"), 1);
        assert_eq!(size("v2"), 1);
        assert_eq!(size("v10"), 2);
        assert_eq!(size("v1"), 2);
        assert_eq!(size("v6"), 5);
        assert_eq!(dbs.universe().len(), 16);
        assert!(validate_discrete_bs(&dbs).unwrap().pass);
    }

    #[test]
    fn discrete_synthesis_single_edge_and_rejections() {
        let g = samples::single_edge();
        let dbs = build_discrete_bs_from_peeling(&g).unwrap();
        assert_eq!(dbs.d_vertex(&VertexId::explicit("w")).unwrap().len(), 1);
        assert_eq!(dbs.d_vertex(&VertexId::explicit("u")).unwrap().len(), 1);
        let dw = dbs.d_vertex(&VertexId::explicit("w")).unwrap()[0];
        assert_eq!(dbs.apply("e", dw).unwrap(), Some(dbs.r_set("e").unwrap()[0]));
        assert!(validate_discrete_bs(&dbs).unwrap().pass);

        assert!(matches!(
            build_discrete_bs_from_peeling(&samples::single_loop()),
            Err(Error::NotPermutative) | Err(Error::CyclicGraph)
        ));
    }

    #[test]
    fn discrete_validation_catches_broken_bijection() {
        let g = samples::single_edge();
        let dbs = build_discrete_bs_from_peeling(&g).unwrap();
        let mut doc = dbs.to_doc();
        // Send the domain somewhere outside the range.
        doc.f.insert("e".into(), serde_json::json!([[1, 99]]));
        let broken = DiscreteBranchingSystem::from_doc(&doc).unwrap();
        let report = validate_discrete_bs(&broken).unwrap();
        assert!(!report.conditions[4].pass);
    }

    #[test]
    fn interval_doc_round_trip() {
        let g = samples::ten_vertex_demo();
        let bs = build_standard_interval_bs(&g);
        let text = serde_json::to_string(&bs.to_doc()).unwrap();
        let back = match load_branching_doc(&text).unwrap() {
            BranchingSystem::Interval(b) => b,
            _ => panic!("expected interval"),
        };
        assert_eq!(bs, back);
    }

    #[test]
    fn tailed_doc_round_trip() {
        let bs = build_standard_interval_bs(&samples::tail_range());
        let text = serde_json::to_string(&bs.to_doc()).unwrap();
        let back = match load_branching_doc(&text).unwrap() {
            BranchingSystem::Interval(b) => b,
            _ => panic!("expected interval"),
        };
        assert_eq!(bs, back);
    }

    #[test]
    fn slope_products_cancel_exactly() {
        for g in [
            samples::ten_vertex_demo(),
            samples::two_loops(),
            samples::tail_range(),
        ] {
            let bs = build_standard_interval_bs(&g);
            for e in g.edges() {
                for p in bs.map_pieces_to_depth(&e.id, 6).unwrap() {
                    let forward = p.slope().clone();
                    let backward = p.invert().slope().clone();
                    assert_eq!(forward * backward, rat_i(1));
                }
            }
        }
    }
}
