//! The representation induced by a branching system on step functions, the
//! defining-relation verifier, the transfer operator and its two evaluation
//! routes, and the orbit-separation test behind the faithfulness criterion.
//!
//! On an interval system the edge generator carries a function through the
//! inverse fiber map and scales it by the square root of the inverse
//! derivative; the adjoint carries it forward and scales by the square root
//! of the forward derivative; a set generator multiplies by the indicator of
//! the set's domain. Breakpoints stay rational throughout, so the geometric
//! side of every identity is exact and only amplitudes see rounding.

use crate::branching::{
    AffinePiece, BranchingSystem, DiscreteBranchingSystem, IntervalBranchingSystem,
    PiecewiseAffineMap, TAIL_DEPTH,
};
use crate::error::{Error, Result};
use crate::exec;
use crate::graph::{EdgeId, VertexId, VertexSet};
use crate::interval::{Interval, IntervalSet};
use crate::paths::{has_no_exits, Cycle, Path};
use crate::rat::{self, Rat};
use crate::step::{refinement_cells, StepFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

/// Fixed seed for the deterministic pseudo-random test family.
pub const DEFAULT_SEED: u64 = 0x5547_4b49_5431_3031;

/// Number of pseudo-random step functions mixed into the test family.
pub const RANDOM_TEST_FUNCTIONS: usize = 10;

/// A generator of the algebra: edge isometries, their adjoints, set
/// projections, and their path products.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generator {
    S(EdgeId),
    SStar(EdgeId),
    P(VertexSet),
    SPath(Path),
    SPathStar(Path),
}

/// Pieces of `phi` restricted to the domain of `p`, pushed through `p`, with
/// values scaled by `factor`.
fn push_through(phi: &StepFunction, p: &AffinePiece, factor: f64) -> Vec<(Interval, f64)> {
    let mut out = Vec::new();
    for (iv, v) in phi.pieces() {
        if let Some(meet) = iv.meet(p.dom()) {
            let lo = p.apply(meet.lo());
            let hi = p.apply(meet.hi());
            out.push((
                Interval::new(lo, hi).expect("increasing pieces preserve order"),
                v * factor,
            ));
        }
    }
    out
}

/// Applies a generator of the induced representation to a step function.
pub fn rep_apply(
    bs: &IntervalBranchingSystem,
    gen: &Generator,
    phi: &StepFunction,
) -> Result<StepFunction> {
    match gen {
        Generator::P(a) => {
            if a.is_empty() || phi.is_zero() {
                return Ok(StepFunction::zero());
            }
            let window = phi.support().bounding();
            let d = bs.d_set_within(a, window.as_ref())?;
            Ok(phi.restrict(&d))
        }
        Generator::S(e) => {
            bs.graph().require_edge(e)?;
            if phi.is_zero() {
                return Ok(StepFunction::zero());
            }
            let dmin = phi
                .support()
                .bounding()
                .expect("nonzero function has support")
                .lo()
                .clone();
            let mut pieces = Vec::new();
            for p in bs.map_pieces_for_domain(e, &dmin)? {
                let factor = 1.0 / rat::to_f64(p.slope()).sqrt();
                pieces.extend(push_through(phi, &p, factor));
            }
            StepFunction::new(pieces)
        }
        Generator::SStar(e) => {
            bs.graph().require_edge(e)?;
            let needed = phi.support().intersect(bs.r_set(e)?);
            if needed.is_empty() {
                return Ok(StepFunction::zero());
            }
            let mut pieces = Vec::new();
            for p in bs.map_pieces_for_image(e, &needed)? {
                let factor = rat::to_f64(p.slope()).sqrt();
                pieces.extend(push_through(phi, &p.invert(), factor));
            }
            StepFunction::new(pieces)
        }
        Generator::SPath(path) => {
            let mut acc = phi.clone();
            for e in path.edges().iter().rev() {
                acc = rep_apply(bs, &Generator::S(e.clone()), &acc)?;
            }
            Ok(acc)
        }
        Generator::SPathStar(path) => {
            let mut acc = phi.clone();
            for e in path.edges() {
                acc = rep_apply(bs, &Generator::SStar(e.clone()), &acc)?;
            }
            Ok(acc)
        }
    }
}

/// An explicit nonzero vector in the image of the projection of a nonempty
/// set: the indicator of one member's domain component.
pub fn nonzero_projection_witness(
    bs: &IntervalBranchingSystem,
    a: &VertexSet,
) -> Result<Option<StepFunction>> {
    if a.is_empty() {
        return Ok(None);
    }
    let home = match a.explicit_members().next() {
        Some(v) => bs.d_vertex(v)?,
        None => {
            let t = a.tail_from().expect("nonempty set without members has a tail");
            let rule = bs
                .tail_rule()
                .ok_or(Error::TailUnsupported("this branching system"))?;
            IntervalSet::from_interval(rule.interval(t))
        }
    };
    Ok(home
        .parts()
        .first()
        .map(|iv| StepFunction::indicator(iv.clone())))
}

// ---------------------------------------------------------------------------
// Test family
// ---------------------------------------------------------------------------

/// The family every operator identity is evaluated on: indicators of all
/// cells of the common breakpoint refinement inside a bounding box, plus a
/// fixed number of seeded pseudo-random step functions. Cells falling into
/// the unmaterialized dyadic margin of a tailed edge are skipped and
/// reported.
#[derive(Debug, Clone)]
pub struct TestFamily {
    pub functions: Vec<StepFunction>,
    pub cells: usize,
    pub skipped_margins: Vec<Interval>,
}

pub fn interval_test_family(
    bs: &IntervalBranchingSystem,
    seed: u64,
    randoms: usize,
) -> Result<TestFamily> {
    let mut cuts = bs.breakpoints(TAIL_DEPTH)?;
    let mut margins = Vec::new();
    for e in bs.graph().edges() {
        if let Some(margin) = bs.tail_margin(&e.id, TAIL_DEPTH)? {
            cuts.push(margin.lo().clone());
            margins.push(margin);
        }
    }
    cuts.sort();
    cuts.dedup();
    let margin_set = IntervalSet::from_intervals(margins.iter().cloned());
    let cells: Vec<Interval> = refinement_cells(&cuts)
        .into_iter()
        .filter(|cell| {
            IntervalSet::from_interval(cell.clone())
                .minus(&margin_set)
                .measure()
                != num_traits::Zero::zero()
        })
        .collect();

    let mut functions: Vec<StepFunction> =
        cells.iter().cloned().map(StepFunction::indicator).collect();
    let n_cells = functions.len();

    if let (Some(first), Some(last)) = (cuts.first(), cuts.last()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let span = last - first;
        for _ in 0..randoms {
            let n_pieces = rng.gen_range(2..=6usize);
            let mut marks: Vec<Rat> = (0..n_pieces * 2)
                .map(|_| first + &span * rat::rat(rng.gen_range(0..=64), 64))
                .collect();
            marks.sort();
            marks.dedup();
            let mut pieces = Vec::new();
            for pair in marks.chunks(2) {
                if pair.len() == 2 && pair[0] < pair[1] {
                    let value = rng.gen_range(-100..=100i32) as f64 / 50.0;
                    pieces.push((
                        Interval::new(pair[0].clone(), pair[1].clone()).expect("sorted"),
                        value,
                    ));
                }
            }
            let f = StepFunction::new(pieces)
                .expect("disjoint chunks")
                .restrict_outside(&margin_set);
            functions.push(f);
        }
    }

    Ok(TestFamily {
        functions,
        cells: n_cells,
        skipped_margins: margins,
    })
}

/// Deterministic sample of lattice members used for the projection-algebra
/// relation: the empty set, singletons, ranges, and their meets and joins.
pub fn sample_sets(g: &crate::graph::Ultragraph, cap: usize) -> Vec<VertexSet> {
    let mut out: Vec<VertexSet> = vec![VertexSet::empty()];
    for v in g.explicit_vertices() {
        out.push(VertexSet::singleton(v.clone()));
    }
    if let Some(start) = g.tail_start() {
        out.push(VertexSet::singleton(VertexId::Tail(start)));
    }
    let ranges: Vec<VertexSet> = g.edges().iter().map(|e| e.range.clone()).collect();
    out.extend(ranges.clone());
    'pairs: for (i, a) in ranges.iter().enumerate() {
        for b in &ranges[i + 1..] {
            if out.len() >= cap {
                break 'pairs;
            }
            out.push(a.union(b));
            let meet = a.intersect(b);
            if !meet.is_empty() {
                out.push(meet);
            }
        }
    }
    out.truncate(cap);
    out.sort();
    out.dedup();
    out
}

// ---------------------------------------------------------------------------
// Defining-relation verification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RelationCheck {
    pub relation: String,
    pub checks: usize,
    pub max_deviation: f64,
    pub pass: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CkReport {
    pub relations: Vec<RelationCheck>,
    pub pass: bool,
    pub tolerance: f64,
    pub test_functions: usize,
    pub skipped_margins: Vec<String>,
}

/// Per-function deviations of the four defining relations.
#[derive(Debug, Clone, Default)]
struct Deviations {
    values: [f64; 4],
    checks: [usize; 4],
    witnesses: [Option<String>; 4],
}

impl Deviations {
    fn record(&mut self, relation: usize, deviation: f64, witness: impl Fn() -> String) {
        self.checks[relation] += 1;
        if deviation > self.values[relation] {
            self.values[relation] = deviation;
            self.witnesses[relation] = Some(witness());
        }
    }

    fn merge(mut self, other: Deviations) -> Deviations {
        for i in 0..4 {
            self.checks[i] += other.checks[i];
            if other.values[i] > self.values[i] {
                self.values[i] = other.values[i];
                self.witnesses[i] = other.witnesses[i].clone();
            }
        }
        self
    }
}

const RELATION_NAMES: [&str; 4] = [
    "projection algebra: p_A p_B = p_(A meet B), p_(A join B) = p_A + p_B - p_(A meet B)",
    "isometry: s_e* s_e = p_r(e)",
    "positivity: s_e s_e* <= p_s(e)",
    "regular vertex sum: p_v = sum of s_e s_e* over edges at v",
];

fn report_from(
    devs: Deviations,
    tol: f64,
    n_functions: usize,
    skipped: Vec<String>,
) -> CkReport {
    let relations: Vec<RelationCheck> = (0..4)
        .map(|i| RelationCheck {
            relation: RELATION_NAMES[i].to_string(),
            checks: devs.checks[i],
            max_deviation: devs.values[i],
            pass: devs.values[i] <= tol,
            witness: (devs.values[i] > tol)
                .then(|| devs.witnesses[i].clone().unwrap_or_default()),
        })
        .collect();
    let pass = relations.iter().all(|r| r.pass);
    CkReport {
        relations,
        pass,
        tolerance: tol,
        test_functions: n_functions,
        skipped_margins: skipped,
    }
}

fn interval_deviations(
    bs: &IntervalBranchingSystem,
    sets: &[VertexSet],
    phi: &StepFunction,
    idx: usize,
) -> Result<Deviations> {
    let g = bs.graph();
    let mut devs = Deviations::default();
    let p = |a: &VertexSet, f: &StepFunction| rep_apply(bs, &Generator::P(a.clone()), f);

    // (1) the projection algebra on sampled pairs.
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i..] {
            let pa = p(a, phi)?;
            let pb = p(b, phi)?;
            let meet = a.intersect(b);
            let join = a.union(b);
            let p_meet = p(&meet, phi)?;
            let p_join = p(&join, phi)?;
            let d1 = p(a, &pb)?.sup_distance(&p_meet);
            let d2 = p_join.sup_distance(&pa.add(&pb).sub(&p_meet));
            devs.record(0, d1.max(d2), || {
                format!(
                    "phi #{idx}, A = {}, B = {}",
                    g.format_vertex_set(a),
                    g.format_vertex_set(b)
                )
            });
        }
    }

    for e in g.edges() {
        // (2) s_e* s_e = p_r(e).
        let s_phi = rep_apply(bs, &Generator::S(e.id.clone()), phi)?;
        let lhs = rep_apply(bs, &Generator::SStar(e.id.clone()), &s_phi)?;
        let rhs = p(&e.range, phi)?;
        devs.record(1, lhs.sup_distance(&rhs), || {
            format!("phi #{idx}, edge {}", e.id)
        });

        // (3) <(p_s(e) - s_e s_e*) phi, phi> >= 0 on the test family.
        let star = rep_apply(bs, &Generator::SStar(e.id.clone()), phi)?;
        let ss = rep_apply(bs, &Generator::S(e.id.clone()), &star)?;
        let p_src = p(&VertexSet::singleton(e.source.clone()), phi)?;
        let quad = p_src.inner(phi) - ss.inner(phi);
        devs.record(2, (-quad).max(0.0), || {
            format!("phi #{idx}, edge {}", e.id)
        });
    }

    // (4) regular vertices are exhausted by their edges.
    for v in g.explicit_vertices() {
        if g.is_sink(v) {
            continue;
        }
        let mut total = StepFunction::zero();
        for e in g.out_edges(v) {
            let star = rep_apply(bs, &Generator::SStar(e.id.clone()), phi)?;
            let term = rep_apply(bs, &Generator::S(e.id.clone()), &star)?;
            total = total.add(&term);
        }
        let pv = p(&VertexSet::singleton(v.clone()), phi)?;
        devs.record(3, total.sup_distance(&pv), || {
            format!("phi #{idx}, vertex {}", g.vertex_name(v))
        });
    }

    Ok(devs)
}

fn verify_interval(
    bs: &IntervalBranchingSystem,
    tol: f64,
    seed: u64,
    parallel: bool,
) -> Result<CkReport> {
    let family = interval_test_family(bs, seed, RANDOM_TEST_FUNCTIONS)?;
    let sets = sample_sets(bs.graph(), 14);
    let tasks: Vec<(usize, StepFunction)> =
        family.functions.into_iter().enumerate().collect();
    let results: Vec<Result<Deviations>> = exec::map_slice(&tasks, parallel, |(idx, phi)| {
        interval_deviations(bs, &sets, phi, *idx)
    });
    let mut devs = Deviations::default();
    for r in results {
        devs = devs.merge(r?);
    }
    Ok(report_from(
        devs,
        tol,
        tasks.len(),
        family
            .skipped_margins
            .iter()
            .map(|m| m.to_string())
            .collect(),
    ))
}

// Discrete systems: functions with finite support on the positive integers.
type DiscreteFn = BTreeMap<u64, f64>;

fn d_apply(dbs: &DiscreteBranchingSystem, gen: &Generator, phi: &DiscreteFn) -> Result<DiscreteFn> {
    let mut out = DiscreteFn::new();
    match gen {
        Generator::P(a) => {
            let d = dbs.d_set(a)?;
            for (n, v) in phi {
                if d.binary_search(n).is_ok() && *v != 0.0 {
                    out.insert(*n, *v);
                }
            }
        }
        Generator::S(e) => {
            for (dom, img) in dbs.forward(e)? {
                let v = phi.get(dom).copied().unwrap_or(0.0);
                if v != 0.0 {
                    out.insert(*img, v);
                }
            }
        }
        Generator::SStar(e) => {
            for (dom, img) in dbs.forward(e)? {
                let v = phi.get(img).copied().unwrap_or(0.0);
                if v != 0.0 {
                    out.insert(*dom, v);
                }
            }
        }
        Generator::SPath(path) => {
            let mut acc = phi.clone();
            for e in path.edges().iter().rev() {
                acc = d_apply(dbs, &Generator::S(e.clone()), &acc)?;
            }
            return Ok(acc);
        }
        Generator::SPathStar(path) => {
            let mut acc = phi.clone();
            for e in path.edges() {
                acc = d_apply(dbs, &Generator::SStar(e.clone()), &acc)?;
            }
            return Ok(acc);
        }
    }
    Ok(out)
}

fn d_sup_distance(a: &DiscreteFn, b: &DiscreteFn) -> f64 {
    let keys: BTreeSet<&u64> = a.keys().chain(b.keys()).collect();
    keys.into_iter()
        .map(|k| {
            (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs()
        })
        .fold(0.0, f64::max)
}

fn d_inner(a: &DiscreteFn, b: &DiscreteFn) -> f64 {
    a.iter()
        .map(|(k, v)| v * b.get(k).copied().unwrap_or(0.0))
        .sum()
}

fn d_add(a: &DiscreteFn, b: &DiscreteFn) -> DiscreteFn {
    let mut out = a.clone();
    for (k, v) in b {
        let entry = out.entry(*k).or_insert(0.0);
        *entry += v;
        if *entry == 0.0 {
            out.remove(k);
        }
    }
    out
}

fn discrete_deviations(
    dbs: &DiscreteBranchingSystem,
    sets: &[VertexSet],
    phi: &DiscreteFn,
    idx: usize,
) -> Result<Deviations> {
    let g = dbs.graph();
    let mut devs = Deviations::default();
    let p = |a: &VertexSet, f: &DiscreteFn| d_apply(dbs, &Generator::P(a.clone()), f);

    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i..] {
            let pb = p(b, phi)?;
            let meet = p(&a.intersect(b), phi)?;
            let join = p(&a.union(b), phi)?;
            let d1 = d_sup_distance(&p(a, &pb)?, &meet);
            let mut rhs = d_add(&p(a, phi)?, &p(b, phi)?);
            for (k, v) in &meet {
                let entry = rhs.entry(*k).or_insert(0.0);
                *entry -= v;
                if *entry == 0.0 {
                    rhs.remove(k);
                }
            }
            let d2 = d_sup_distance(&join, &rhs);
            devs.record(0, d1.max(d2), || {
                format!(
                    "phi #{idx}, A = {}, B = {}",
                    g.format_vertex_set(a),
                    g.format_vertex_set(b)
                )
            });
        }
    }

    for e in g.edges() {
        let s_phi = d_apply(dbs, &Generator::S(e.id.clone()), phi)?;
        let lhs = d_apply(dbs, &Generator::SStar(e.id.clone()), &s_phi)?;
        let rhs = p(&e.range, phi)?;
        devs.record(1, d_sup_distance(&lhs, &rhs), || {
            format!("phi #{idx}, edge {}", e.id)
        });

        let star = d_apply(dbs, &Generator::SStar(e.id.clone()), phi)?;
        let ss = d_apply(dbs, &Generator::S(e.id.clone()), &star)?;
        let p_src = p(&VertexSet::singleton(e.source.clone()), phi)?;
        let quad = d_inner(&p_src, phi) - d_inner(&ss, phi);
        devs.record(2, (-quad).max(0.0), || {
            format!("phi #{idx}, edge {}", e.id)
        });
    }

    for v in g.explicit_vertices() {
        if g.is_sink(v) {
            continue;
        }
        let mut total = DiscreteFn::new();
        for e in g.out_edges(v) {
            let star = d_apply(dbs, &Generator::SStar(e.id.clone()), phi)?;
            let term = d_apply(dbs, &Generator::S(e.id.clone()), &star)?;
            total = d_add(&total, &term);
        }
        let pv = p(&VertexSet::singleton(v.clone()), phi)?;
        devs.record(3, d_sup_distance(&total, &pv), || {
            format!("phi #{idx}, vertex {}", g.vertex_name(v))
        });
    }

    Ok(devs)
}

fn verify_discrete(
    dbs: &DiscreteBranchingSystem,
    tol: f64,
    seed: u64,
    parallel: bool,
) -> Result<CkReport> {
    let universe = dbs.universe();
    let mut functions: Vec<DiscreteFn> = universe
        .iter()
        .map(|n| DiscreteFn::from([(*n, 1.0)]))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_TEST_FUNCTIONS.min(universe.len().max(1)) {
        let mut f = DiscreteFn::new();
        for n in &universe {
            if rng.gen_bool(0.5) {
                let v = rng.gen_range(-4..=4i32) as f64 / 2.0;
                if v != 0.0 {
                    f.insert(*n, v);
                }
            }
        }
        functions.push(f);
    }
    let sets = sample_sets(dbs.graph(), 14);
    let tasks: Vec<(usize, DiscreteFn)> = functions.into_iter().enumerate().collect();
    let results: Vec<Result<Deviations>> = exec::map_slice(&tasks, parallel, |(idx, phi)| {
        discrete_deviations(dbs, &sets, phi, *idx)
    });
    let mut devs = Deviations::default();
    for r in results {
        devs = devs.merge(r?);
    }
    Ok(report_from(devs, tol, tasks.len(), Vec::new()))
}

/// Verifies the four defining relations on the test family, reporting the
/// largest deviation per relation. Interval systems pass up to rounding of
/// the square-root amplitudes; discrete systems are exact.
pub fn verify_ck_relations(sys: &BranchingSystem, tol: f64) -> Result<CkReport> {
    verify_ck_relations_seeded(sys, tol, DEFAULT_SEED)
}

pub fn verify_ck_relations_seeded(sys: &BranchingSystem, tol: f64, seed: u64) -> Result<CkReport> {
    match sys {
        BranchingSystem::Interval(bs) => verify_interval(bs, tol, seed, true),
        BranchingSystem::Discrete(dbs) => verify_discrete(dbs, tol, seed, true),
    }
}

/// Sequential twin of [`verify_ck_relations_seeded`]; same output, no
/// work-stealing. Kept for the benches and as the fallback path.
pub fn verify_ck_relations_seq(sys: &BranchingSystem, tol: f64, seed: u64) -> Result<CkReport> {
    match sys {
        BranchingSystem::Interval(bs) => verify_interval(bs, tol, seed, false),
        BranchingSystem::Discrete(dbs) => verify_discrete(dbs, tol, seed, false),
    }
}

// ---------------------------------------------------------------------------
// Transfer operator
// ---------------------------------------------------------------------------

/// Direct evaluation of the transfer operator of the assembled branch map:
/// each branch pulls the function back and weighs it by the branch
/// derivative, the identity region passes through untouched.
pub fn pf_direct(map: &PiecewiseAffineMap, phi: &StepFunction) -> StepFunction {
    let mut out = phi.restrict_outside(&map.domain());
    for p in map.pieces() {
        // Branch p sends y in R_e to x = p(y); mass at x gathers phi(y)/p'.
        let weight = 1.0 / rat::to_f64(p.slope());
        let pieces = push_through(phi, p, weight);
        out = out.add(&StepFunction::new(pieces).expect("within one branch pieces stay disjoint"));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfMode {
    /// Evaluate the operator on `phi^2` as the sum of squared adjoint terms.
    Squared,
    /// Split a signed function into nonnegative parts and use the
    /// square-root trick on each.
    General,
}

/// Transfer-operator evaluation through the representation.
pub fn pf_via_rep(
    bs: &IntervalBranchingSystem,
    phi: &StepFunction,
    mode: PfMode,
) -> Result<StepFunction> {
    pf_via_rep_inner(bs, phi, mode, true)
}

/// Sequential twin of [`pf_via_rep`].
pub fn pf_via_rep_seq(
    bs: &IntervalBranchingSystem,
    phi: &StepFunction,
    mode: PfMode,
) -> Result<StepFunction> {
    pf_via_rep_inner(bs, phi, mode, false)
}

fn pf_via_rep_inner(
    bs: &IntervalBranchingSystem,
    phi: &StepFunction,
    mode: PfMode,
    parallel: bool,
) -> Result<StepFunction> {
    let uncovered = phi.support().minus(&bs.r_union());
    if !uncovered.measure().eq(&num_traits::Zero::zero()) {
        return Err(Error::SupportNotCovered(uncovered.parts()[0].to_string()));
    }
    match mode {
        PfMode::Squared => squared_terms_sum(bs, phi, parallel),
        PfMode::General => {
            let (pos, neg) = phi.split_signs();
            let a = squared_terms_sum(bs, &pos.sqrt()?, parallel)?;
            let b = squared_terms_sum(bs, &neg.sqrt()?, parallel)?;
            Ok(a.sub(&b))
        }
    }
}

/// Sum over edges meeting the support of the squared adjoint image,
/// combined in canonical edge order so the result is identical for the
/// parallel and sequential paths.
fn squared_terms_sum(
    bs: &IntervalBranchingSystem,
    phi: &StepFunction,
    parallel: bool,
) -> Result<StepFunction> {
    let support = phi.support();
    let edges: Vec<EdgeId> = bs
        .graph()
        .edge_ids_sorted()
        .into_iter()
        .filter(|e| {
            bs.r_set(e)
                .map(|r| !r.intersect(&support).is_empty())
                .unwrap_or(false)
        })
        .collect();
    let terms: Vec<Result<StepFunction>> = exec::map_slice(&edges, parallel, |e| {
        let star = rep_apply(bs, &Generator::SStar(e.clone()), phi)?;
        Ok(star.square())
    });
    let mut out = StepFunction::zero();
    for t in terms {
        out = out.add(&t?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Faithfulness hypothesis on discrete systems
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaithfulnessOutcome {
    /// A one-point set whose iterates avoid it for every order in the
    /// requested family, when one exists.
    pub witness: Option<Vec<u64>>,
    /// Largest orbit length of the composed cycle map.
    pub orbit_bound: u64,
}

/// Searches for a set separating a no-exit cycle's iterates, as required by
/// the faithfulness criterion for one finite family of powers. A point works
/// exactly when its orbit length divides none of the powers; finite systems
/// can never satisfy the hypothesis for all families at once, which the
/// orbit bound makes visible.
pub fn faithfulness_witness(
    dbs: &DiscreteBranchingSystem,
    c: &Cycle,
    powers: &BTreeSet<u32>,
) -> Result<FaithfulnessOutcome> {
    let g = dbs.graph();
    if !c.simple || !has_no_exits(g, c)? {
        return Err(Error::CycleHasExit);
    }
    let base = dbs.d_set(&VertexSet::singleton(
        g.require_edge(&c.edges()[0])?.source.clone(),
    ))?;
    let step = |x: u64| -> Result<u64> {
        // Composed map: the last cycle edge acts first.
        let mut y = x;
        for e in c.edges().iter().rev() {
            y = dbs
                .apply(e, y)?
                .ok_or_else(|| Error::Precondition(format!("{y} leaves the cycle map domain")))?;
        }
        Ok(y)
    };
    let mut orbit_len: BTreeMap<u64, u64> = BTreeMap::new();
    for &x in &base {
        let mut y = x;
        let mut len = 0u64;
        loop {
            y = step(y)?;
            len += 1;
            if y == x {
                break;
            }
            if len > base.len() as u64 {
                return Err(Error::Precondition(
                    "cycle map is not a permutation of the base domain".into(),
                ));
            }
        }
        orbit_len.insert(x, len);
    }
    let orbit_bound = orbit_len.values().copied().max().unwrap_or(0);
    let witness = base
        .iter()
        .find(|x| {
            let len = orbit_len[x];
            powers.iter().all(|&n| u64::from(n) % len != 0)
        })
        .map(|x| vec![*x]);
    Ok(FaithfulnessOutcome {
        witness,
        orbit_bound,
    })
}

// ---------------------------------------------------------------------------
// Matrix shadow of a discrete representation
// ---------------------------------------------------------------------------

/// Dense integer matrix acting on the first `n` basis vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    n: usize,
    data: Vec<i64>,
}

impl Matrix {
    pub fn zero(n: usize) -> Matrix {
        Matrix {
            n,
            data: vec![0; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.data[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: i64) {
        self.data[row * self.n + col] = value;
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        let mut out = Matrix::zero(self.n);
        for i in 0..self.n {
            for k in 0..self.n {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..self.n {
                    out.data[i * self.n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zero(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        Matrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        Matrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == 0)
    }

    /// At most one 1 per row and per column, all entries 0 or 1.
    pub fn is_partial_permutation(&self) -> bool {
        if !self.data.iter().all(|v| *v == 0 || *v == 1) {
            return false;
        }
        for i in 0..self.n {
            let row: i64 = (0..self.n).map(|j| self.get(i, j)).sum();
            let col: i64 = (0..self.n).map(|j| self.get(j, i)).sum();
            if row > 1 || col > 1 {
                return false;
            }
        }
        true
    }
}

/// The generator as a 0/1 matrix on the first `n` basis vectors, exact
/// integer arithmetic. Index `k` occupies row and column `k - 1`.
pub fn discrete_rep_matrix(
    dbs: &DiscreteBranchingSystem,
    gen: &Generator,
    n: usize,
) -> Result<Matrix> {
    let needed = dbs.max_index();
    if (n as u64) < needed {
        return Err(Error::TruncationTooSmall {
            given: n as u64,
            needed,
        });
    }
    let mut m = Matrix::zero(n);
    match gen {
        Generator::P(a) => {
            for k in dbs.d_set(a)? {
                m.set(k as usize - 1, k as usize - 1, 1);
            }
        }
        Generator::S(e) => {
            for (dom, img) in dbs.forward(e)? {
                m.set(*img as usize - 1, *dom as usize - 1, 1);
            }
        }
        Generator::SStar(e) => {
            return Ok(discrete_rep_matrix(dbs, &Generator::S(e.clone()), n)?.transpose());
        }
        Generator::SPath(path) => {
            let mut acc = discrete_rep_matrix(dbs, &Generator::S(path.edges()[0].clone()), n)?;
            for e in &path.edges()[1..] {
                acc = acc.mul(&discrete_rep_matrix(dbs, &Generator::S(e.clone()), n)?);
            }
            return Ok(acc);
        }
        Generator::SPathStar(path) => {
            return Ok(discrete_rep_matrix(dbs, &Generator::SPath(path.clone()), n)?.transpose());
        }
    }
    Ok(m)
}
