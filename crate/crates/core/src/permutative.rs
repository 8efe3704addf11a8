//! Extreme-vertex peeling and the permutativity condition.
//!
//! An extreme vertex is a range or a source singleton disjoint from every
//! other range and source; removing extreme data and isolated vertices level
//! by level peels the graph. When the peeling exhausts every vertex that is
//! a source or lies in a range, a large class of representations is
//! permutative, and the trace drives the discrete-system synthesis.

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Ultragraph, VertexId, VertexSet};
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ExtremeTag {
    /// The source singleton of its extreme edge.
    Ini,
    /// The range of its extreme edge.
    Fin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremeVertex {
    pub set: VertexSet,
    pub edge: EdgeId,
    pub tag: ExtremeTag,
}

/// The view of the graph after removing some vertices and edges; ranges and
/// sources of surviving edges never mention removed vertices.
#[derive(Debug, Clone)]
struct View {
    vertices: BTreeSet<VertexId>,
    edges: BTreeSet<EdgeId>,
}

impl View {
    fn full(g: &Ultragraph) -> View {
        View {
            vertices: g.explicit_vertices().iter().cloned().collect(),
            edges: g.edges().iter().map(|e| e.id.clone()).collect(),
        }
    }

    fn isolated(&self, g: &Ultragraph) -> BTreeSet<VertexId> {
        self.vertices
            .iter()
            .filter(|v| {
                !self
                    .live_edges(g)
                    .any(|e| e.range.contains(v) || &e.source == *v)
            })
            .cloned()
            .collect()
    }

    fn live_edges<'g>(&'g self, g: &'g Ultragraph) -> impl Iterator<Item = &'g crate::graph::Edge> {
        g.edges().iter().filter(|e| self.edges.contains(&e.id))
    }

    fn extremes(&self, g: &Ultragraph) -> Vec<ExtremeVertex> {
        let mut out = Vec::new();
        for e in self.live_edges(g) {
            let other_ranges_hit = |a: &VertexSet| {
                self.live_edges(g)
                    .any(|f| f.id != e.id && !f.range.intersect(a).is_empty())
            };
            let any_range_hits = |a: &VertexSet| {
                self.live_edges(g).any(|f| !f.range.intersect(a).is_empty())
            };
            let fin = {
                let a = &e.range;
                let hits_source = self
                    .live_edges(g)
                    .any(|f| a.contains(&f.source));
                !other_ranges_hit(a) && !hits_source
            };
            let ini = {
                let a = VertexSet::singleton(e.source.clone());
                let other_source = self
                    .live_edges(g)
                    .any(|f| f.id != e.id && f.source == e.source);
                !other_source && !any_range_hits(&a)
            };
            if fin {
                out.push(ExtremeVertex {
                    set: e.range.clone(),
                    edge: e.id.clone(),
                    tag: ExtremeTag::Fin,
                });
            }
            if ini {
                out.push(ExtremeVertex {
                    set: VertexSet::singleton(e.source.clone()),
                    edge: e.id.clone(),
                    tag: ExtremeTag::Ini,
                });
            }
        }
        // Ranges sort before source singletons within one edge; the peeling
        // relies on this to apply its range-first tie rule.
        out.sort_by_key(|xv| (xv.edge.clone(), xv.tag == ExtremeTag::Ini));
        out
    }
}

fn require_finite(g: &Ultragraph, what: &'static str) -> Result<()> {
    if g.has_tail() {
        return Err(Error::TailUnsupported(what));
    }
    Ok(())
}

/// Vertices in no range and under no edge.
pub fn isolated_vertices(g: &Ultragraph) -> Result<BTreeSet<VertexId>> {
    require_finite(g, "peeling")?;
    Ok(View::full(g).isolated(g))
}

/// All extreme vertices with their extreme edges. An edge whose range and
/// source singleton both qualify contributes two entries here; the peeling
/// keeps only one per edge.
pub fn extreme_vertices(g: &Ultragraph) -> Result<Vec<ExtremeVertex>> {
    require_finite(g, "peeling")?;
    Ok(View::full(g).extremes(g))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeelLevel {
    /// Extreme vertices of this level, one per extreme edge.
    pub x: Vec<ExtremeVertex>,
    /// The extreme edges.
    pub y: BTreeSet<EdgeId>,
    /// Vertices isolated after removing this level's extreme data.
    pub i: BTreeSet<VertexId>,
    pub remaining_vertices: BTreeSet<VertexId>,
    pub remaining_edges: BTreeSet<EdgeId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeelTrace {
    /// Vertices isolated before any peeling.
    pub i0: BTreeSet<VertexId>,
    pub levels: Vec<PeelLevel>,
}

impl PeelLevel {
    pub fn x_union(&self) -> VertexSet {
        self.x
            .iter()
            .fold(VertexSet::empty(), |acc, xv| acc.union(&xv.set))
    }

    fn fin_sets(&self) -> impl Iterator<Item = &VertexSet> {
        self.x
            .iter()
            .filter(|xv| xv.tag == ExtremeTag::Fin)
            .map(|xv| &xv.set)
    }

    fn ini_union(&self) -> VertexSet {
        self.x
            .iter()
            .filter(|xv| xv.tag == ExtremeTag::Ini)
            .fold(VertexSet::empty(), |acc, xv| acc.union(&xv.set))
    }

    fn fin_union(&self) -> VertexSet {
        self.x
            .iter()
            .filter(|xv| xv.tag == ExtremeTag::Fin)
            .fold(VertexSet::empty(), |acc, xv| acc.union(&xv.set))
    }
}

/// Runs the peeling until no extreme vertex is left. Terminates because
/// each recorded level removes at least one edge. When one edge makes both
/// its range and its source singleton extreme, the range wins, keeping the
/// level's sets in bijection with its edges.
pub fn peel_sequence(g: &Ultragraph) -> Result<PeelTrace> {
    require_finite(g, "peeling")?;
    let mut view = View::full(g);
    let i0 = view.isolated(g);
    for v in &i0 {
        view.vertices.remove(v);
    }
    let mut levels = Vec::new();
    loop {
        let mut per_edge: Vec<ExtremeVertex> = Vec::new();
        for xv in view.extremes(g) {
            match per_edge.last_mut() {
                // Fin sorts before Ini per edge; keep the range.
                Some(last) if last.edge == xv.edge => {}
                _ => per_edge.push(xv),
            }
        }
        if per_edge.is_empty() {
            break;
        }
        let y: BTreeSet<EdgeId> = per_edge.iter().map(|xv| xv.edge.clone()).collect();
        for xv in &per_edge {
            for v in xv.set.explicit_members() {
                view.vertices.remove(v);
            }
        }
        for id in &y {
            view.edges.remove(id);
        }
        let i = view.isolated(g);
        for v in &i {
            view.vertices.remove(v);
        }
        levels.push(PeelLevel {
            x: per_edge,
            y,
            i,
            remaining_vertices: view.vertices.clone(),
            remaining_edges: view.edges.clone(),
        });
    }
    Ok(PeelTrace { i0, levels })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PermutativityReport {
    pub holds: bool,
    /// Least level count whose peeled data covers every ranged or source
    /// vertex.
    pub n: Option<usize>,
    pub certificate: Option<String>,
}

/// The peeling condition: some prefix of levels covers the union of all
/// ranges and sources. When it holds, every representation whose range
/// spaces decompose as direct sums over range members is permutative.
pub fn permutativity_condition(g: &Ultragraph) -> Result<PermutativityReport> {
    let trace = peel_sequence(g)?;
    let target: BTreeSet<VertexId> = {
        let mut t = BTreeSet::new();
        let all = g.range_union().union(&g.source_set());
        t.extend(all.explicit_members().cloned());
        t
    };
    let mut covered: BTreeSet<VertexId> = BTreeSet::new();
    for (idx, level) in trace.levels.iter().enumerate() {
        covered.extend(level.x_union().explicit_members().cloned());
        covered.extend(level.i.iter().cloned());
        if covered == target {
            let n = idx + 1;
            return Ok(PermutativityReport {
                holds: true,
                n: Some(n),
                certificate: Some(format!(
                    "peeling exhausts all ranged and source vertices in {n} level(s); \
                     every representation whose range spaces split as direct sums over \
                     range members is permutative"
                )),
            });
        }
    }
    Ok(PermutativityReport {
        holds: false,
        n: None,
        certificate: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct L1ItemCheck {
    pub item: u8,
    pub pass: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct L1Report {
    pub items: Vec<L1ItemCheck>,
    pub pass: bool,
}

/// Verifies the four structural facts the peeling guarantees once the
/// permutativity condition holds: level sets are pairwise disjoint, edges
/// out of final sets land on earlier final sets, edges out of isolated
/// vertices land on final sets up to their level, and edges out of initial
/// vertices avoid initial data up to their level.
pub fn check_l1_invariants(g: &Ultragraph, trace: &PeelTrace) -> Result<L1Report> {
    if *trace != peel_sequence(g)? {
        return Err(Error::TraceMismatch);
    }
    let perm = permutativity_condition(g)?;
    let Some(n) = perm.n else {
        return Err(Error::Precondition(
            "the permutativity condition does not hold for this graph".into(),
        ));
    };
    let levels = &trace.levels[..n];
    let mut items = Vec::with_capacity(4);

    // (1) pairwise disjointness inside each level.
    let mut witness = None;
    'one: for (li, level) in levels.iter().enumerate() {
        for (i, a) in level.x.iter().enumerate() {
            for b in &level.x[i + 1..] {
                if !a.set.intersect(&b.set).is_empty() {
                    witness = Some(format!(
                        "level {}: {} meets {}",
                        li + 1,
                        g.format_vertex_set(&a.set),
                        g.format_vertex_set(&b.set)
                    ));
                    break 'one;
                }
            }
        }
    }
    items.push(L1ItemCheck {
        item: 1,
        pass: witness.is_none(),
        witness,
    });

    // (2) edges out of a final set have ranges equal to earlier final sets.
    let mut witness = None;
    'two: for (li, level) in levels.iter().enumerate() {
        for a in level.fin_sets() {
            for id in g.edges_from_set(a) {
                let e = g.require_edge(&id)?;
                let earlier = levels[..li]
                    .iter()
                    .any(|lv| lv.fin_sets().any(|fin| *fin == e.range));
                if !earlier {
                    witness = Some(format!(
                        "level {}: edge {} out of {} has range {}",
                        li + 1,
                        id,
                        g.format_vertex_set(a),
                        g.format_vertex_set(&e.range)
                    ));
                    break 'two;
                }
            }
        }
    }
    items.push(L1ItemCheck {
        item: 2,
        pass: witness.is_none(),
        witness,
    });

    // (3) edges out of isolated vertices land on final sets up to the level.
    let mut witness = None;
    'three: for (li, level) in levels.iter().enumerate() {
        for v in &level.i {
            for e in g.out_edges(v) {
                let seen = levels[..=li]
                    .iter()
                    .any(|lv| lv.fin_sets().any(|fin| *fin == e.range));
                if !seen {
                    witness = Some(format!(
                        "level {}: edge {} out of {} has range {}",
                        li + 1,
                        e.id,
                        g.vertex_name(v),
                        g.format_vertex_set(&e.range)
                    ));
                    break 'three;
                }
            }
        }
    }
    items.push(L1ItemCheck {
        item: 3,
        pass: witness.is_none(),
        witness,
    });

    // (4) edges out of an initial vertex stay inside final data, isolated
    // data, and strictly later initial data.
    let mut witness = None;
    let fin_and_isolated: VertexSet = levels.iter().fold(VertexSet::empty(), |acc, lv| {
        let isolated = VertexSet::from_vertices(lv.i.iter().cloned());
        acc.union(&lv.fin_union()).union(&isolated)
    });
    'four: for (li, level) in levels.iter().enumerate() {
        let later_ini = levels[li + 1..]
            .iter()
            .fold(VertexSet::empty(), |acc, lv| acc.union(&lv.ini_union()));
        let allowed = fin_and_isolated.union(&later_ini);
        for xv in level.x.iter().filter(|xv| xv.tag == ExtremeTag::Ini) {
            for id in g.edges_from_set(&xv.set) {
                let e = g.require_edge(&id)?;
                if !e.range.is_subset(&allowed) {
                    witness = Some(format!(
                        "level {}: edge {} out of {} reaches {}",
                        li + 1,
                        id,
                        g.format_vertex_set(&xv.set),
                        g.format_vertex_set(&e.range.minus(&allowed))
                    ));
                    break 'four;
                }
            }
        }
    }
    items.push(L1ItemCheck {
        item: 4,
        pass: witness.is_none(),
        witness,
    });

    let pass = items.iter().all(|i| i.pass);
    Ok(L1Report { items, pass })
}
