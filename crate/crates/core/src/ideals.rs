//! Hereditary and saturated vertex data, closures, essentiality of the
//! generated ideal, and the two-part decomposition behind the general
//! uniqueness theorem.
//!
//! A hereditary and saturated family of generalized vertices over finite
//! data is determined by the union of its members, so everything here works
//! on plain vertex sets: hereditary means following edges out of the set
//! stays in the set, saturated means a regular vertex whose ranges all land
//! in the set belongs to it.

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Ultragraph, VertexId};
use crate::paths::{condition_l, cycle_exits, enumerate_simple_cycles, Cycle};
use std::collections::BTreeSet;

/// The union of a hereditary and saturated family; the family itself is
/// every member of the lattice contained in `w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HsSet {
    w: BTreeSet<VertexId>,
}

impl HsSet {
    /// Wraps a vertex set after checking both closure properties.
    pub fn new(g: &Ultragraph, w: BTreeSet<VertexId>) -> Result<HsSet> {
        let check = is_hereditary_saturated(g, &w)?;
        if !check.hereditary || !check.saturated {
            return Err(Error::Precondition(format!(
                "vertex set is not hereditary and saturated ({check:?})"
            )));
        }
        Ok(HsSet { w })
    }

    pub fn vertices(&self) -> &BTreeSet<VertexId> {
        &self.w
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        self.w.contains(v)
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HsCheck {
    pub hereditary: bool,
    pub saturated: bool,
    /// Edge whose range escapes the set.
    pub hereditary_witness: Option<EdgeId>,
    /// Regular vertex that should have been absorbed.
    pub saturated_witness: Option<VertexId>,
}

fn reject_tail_members(w: &BTreeSet<VertexId>) -> Result<()> {
    if let Some(v) = w.iter().find(|v| v.is_tail()) {
        return Err(Error::TailClosure(format!("tail vertex {v} in the seed")));
    }
    Ok(())
}

/// Checks the two defining closure properties of `w`, with witnesses.
pub fn is_hereditary_saturated(g: &Ultragraph, w: &BTreeSet<VertexId>) -> Result<HsCheck> {
    reject_tail_members(w)?;
    let range_inside = |e: &crate::graph::Edge| -> bool {
        !e.range.has_tail() && e.range.explicit_members().all(|v| w.contains(v))
    };
    let mut hereditary = true;
    let mut hereditary_witness = None;
    for e in g.edges() {
        if w.contains(&e.source) && !range_inside(e) {
            hereditary = false;
            hereditary_witness = Some(e.id.clone());
            break;
        }
    }
    let mut saturated = true;
    let mut saturated_witness = None;
    for v in g.explicit_vertices() {
        if w.contains(v) || g.is_sink(v) {
            continue;
        }
        if g.out_edges(v).all(range_inside) {
            saturated = false;
            saturated_witness = Some(v.clone());
            break;
        }
    }
    Ok(HsCheck {
        hereditary,
        saturated,
        hereditary_witness,
        saturated_witness,
    })
}

/// Least hereditary and saturated superset of `w0`: alternately add ranges
/// of edges sourced inside and regular vertices whose ranges all landed
/// inside, until stable.
pub fn hs_closure(g: &Ultragraph, w0: &BTreeSet<VertexId>) -> Result<HsSet> {
    reject_tail_members(w0)?;
    for v in w0 {
        if !g.contains_vertex(v) {
            return Err(Error::UnknownVertex(v.to_string()));
        }
    }
    let mut w = w0.clone();
    loop {
        let mut changed = false;
        for e in g.edges() {
            if !w.contains(&e.source) {
                continue;
            }
            if e.range.has_tail() {
                return Err(Error::TailClosure(format!("edge `{}` pulls the tail in", e.id)));
            }
            for v in e.range.explicit_members() {
                if v.is_tail() {
                    return Err(Error::TailClosure(format!(
                        "edge `{}` pulls the tail in",
                        e.id
                    )));
                }
                changed |= w.insert(v.clone());
            }
        }
        for v in g.explicit_vertices() {
            if w.contains(v) || g.is_sink(v) {
                continue;
            }
            let absorbed = g.out_edges(v).all(|e| {
                !e.range.has_tail() && e.range.explicit_members().all(|u| w.contains(u))
            });
            if absorbed {
                w.insert(v.clone());
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(HsSet { w })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EssentialReport {
    pub essential: bool,
    /// A vertex outside the set with no path into it.
    pub orphan: Option<VertexId>,
}

/// The generated ideal is essential exactly when every vertex outside the
/// set starts a path whose final range meets the set. Decided by a reverse
/// reachability fixpoint.
pub fn is_essential(g: &Ultragraph, sh: &HsSet) -> EssentialReport {
    let w = sh.vertices();
    // can_reach(v): some edge out of v ends in the set or in a vertex that
    // can reach it.
    let mut can_reach: BTreeSet<VertexId> = BTreeSet::new();
    loop {
        let mut changed = false;
        for e in g.edges() {
            if can_reach.contains(&e.source) {
                continue;
            }
            let hits = e.range.explicit_members().any(|v| w.contains(v))
                || e.range
                    .explicit_members()
                    .any(|v| can_reach.contains(v));
            if hits {
                can_reach.insert(e.source.clone());
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    // Tail vertices are sinks, so with a tail present any proper set leaves
    // orphans; surface the first one.
    if let Some(start) = g.tail_start() {
        return EssentialReport {
            essential: false,
            orphan: Some(VertexId::Tail(start)),
        };
    }
    for v in g.explicit_vertices() {
        if !w.contains(v) && !can_reach.contains(v) {
            return EssentialReport {
                essential: false,
                orphan: Some(v.clone()),
            };
        }
    }
    EssentialReport {
        essential: true,
        orphan: None,
    }
}

/// Sources of simple no-exit cycles, their closure, and the complementary
/// no-way-back set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub x1: BTreeSet<VertexId>,
    pub w1: HsSet,
    pub w2: HsSet,
    pub disjoint: bool,
}

pub fn uniqueness_decomposition(g: &Ultragraph) -> Result<Decomposition> {
    if g.has_tail() {
        return Err(Error::TailUnsupported("uniqueness decomposition"));
    }
    let mut x1: BTreeSet<VertexId> = BTreeSet::new();
    for c in no_exit_cycles(g) {
        for id in c.edges() {
            x1.insert(g.require_edge(id)?.source.clone());
        }
    }
    let w1 = hs_closure(g, &x1)?;
    // Vertices from which no path ever meets w1.
    let mut reach: BTreeSet<VertexId> = BTreeSet::new();
    loop {
        let mut changed = false;
        for e in g.edges() {
            if reach.contains(&e.source) {
                continue;
            }
            let hits = e
                .range
                .explicit_members()
                .any(|v| w1.contains(v) || reach.contains(v));
            if hits {
                reach.insert(e.source.clone());
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let w2_vertices: BTreeSet<VertexId> = g
        .explicit_vertices()
        .iter()
        .filter(|v| !reach.contains(v))
        .cloned()
        .collect();
    let disjoint = w1.vertices().is_disjoint(&w2_vertices);
    let w2 = HsSet::new(g, w2_vertices)?;
    Ok(Decomposition {
        x1,
        w1,
        w2,
        disjoint,
    })
}

fn no_exit_cycles(g: &Ultragraph) -> Vec<Cycle> {
    enumerate_simple_cycles(g)
        .into_iter()
        .filter(|c| {
            cycle_exits(g, c)
                .map(|exits| exits.is_empty())
                .unwrap_or(false)
        })
        .collect()
}

/// Aggregate report: Condition (L), no-exit cycles, the decomposition,
/// essentiality of the combined closure, and the injectivity obligations a
/// concrete homomorphism has to meet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniquenessReport {
    pub condition_l: bool,
    pub no_exit_cycles: Vec<Cycle>,
    pub x1: BTreeSet<VertexId>,
    pub w1: HsSet,
    pub w2: HsSet,
    pub disjoint: bool,
    pub essential: bool,
    pub obligations: Vec<String>,
}

pub fn uniqueness_report(g: &Ultragraph) -> Result<UniquenessReport> {
    let cl = condition_l(g);
    let cycles = no_exit_cycles(g);
    let dec = uniqueness_decomposition(g)?;
    let combined: BTreeSet<VertexId> = dec
        .w1
        .vertices()
        .union(dec.w2.vertices())
        .cloned()
        .collect();
    let combined = hs_closure(g, &combined)?;
    let essential = is_essential(g, &combined).essential;
    let mut obligations =
        vec!["p_A is nonzero for every nonempty A in the generalized-vertex family".to_string()];
    for c in &cycles {
        obligations.push(format!(
            "the spectrum of the image of s_({}) contains the unit circle",
            c.edges().join(" ")
        ));
    }
    Ok(UniquenessReport {
        condition_l: cl.holds,
        no_exit_cycles: cycles,
        x1: dec.x1,
        w1: dec.w1,
        w2: dec.w2,
        disjoint: dec.disjoint,
        essential,
        obligations,
    })
}
