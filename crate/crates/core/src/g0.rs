//! Membership and enumeration for the generalized-vertex family: the
//! smallest collection of vertex sets containing every singleton and every
//! edge range, closed under finite unions and nonempty finite intersections.
//!
//! For a tailed universe the question is settled on a finite quotient. Pick a
//! cut above every index mentioned by the graph or the query; beyond the cut
//! each range contains either the whole tail or none of it, so the far tail
//! collapses to a single token. Every finite set belongs to the family
//! (singletons and unions), so a tailed target is a member exactly when the
//! intersection of all tail-carrying ranges fits inside it: that intersection
//! is the smallest token-carrying element of the quotient closure, and finite
//! padding covers the rest.

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Ultragraph, VertexId, VertexSet};

/// Default cap on the number of closure elements materialized by
/// [`g0_enumerate`].
pub const DEFAULT_CLOSURE_CAP: u128 = 1 << 20;

/// A witness that a set lies in the family: a union of intersections of edge
/// ranges plus a finite set. Evaluating it with the set algebra reproduces
/// the target exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct G0Witness {
    /// Each inner list is one nonempty intersection of ranges.
    pub terms: Vec<Vec<EdgeId>>,
    pub finite_part: VertexSet,
}

/// Evaluates a witness expression with `vs_combine`.
pub fn g0_evaluate(g: &Ultragraph, witness: &G0Witness) -> Result<VertexSet> {
    let mut out = witness.finite_part.clone();
    for term in &witness.terms {
        let mut iter = term.iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::Precondition("empty intersection term".into()))?;
        let mut acc = g.require_edge(first)?.range.clone();
        for id in iter {
            acc = acc.intersect(&g.require_edge(id)?.range);
        }
        out = out.union(&acc);
    }
    Ok(out)
}

/// Decides membership of `target` in the family; `Some` carries a witness.
pub fn g0_membership(g: &Ultragraph, target: &VertexSet) -> Option<G0Witness> {
    if !target.has_tail() {
        // Finite sets are unions of singletons.
        return Some(G0Witness {
            terms: Vec::new(),
            finite_part: target.clone(),
        });
    }
    let tailed: Vec<&crate::graph::Edge> =
        g.edges().iter().filter(|e| e.range.has_tail()).collect();
    if tailed.is_empty() {
        return None;
    }
    let mut meet = tailed[0].range.clone();
    for e in &tailed[1..] {
        meet = meet.intersect(&e.range);
    }
    if !meet.is_subset(target) {
        return None;
    }
    let mut ids: Vec<EdgeId> = tailed.iter().map(|e| e.id.clone()).collect();
    ids.sort();
    Some(G0Witness {
        terms: vec![ids],
        finite_part: target.minus(&meet),
    })
}

/// Enumerates the closure over the quotient universe (explicit vertices,
/// tail indices below `cut`, one token for the rest of the tail), realized
/// as normalized vertex sets in canonical order. The empty set is included.
pub fn g0_enumerate(g: &Ultragraph, cut: u32) -> Result<Vec<VertexSet>> {
    g0_enumerate_with_cap(g, cut, DEFAULT_CLOSURE_CAP)
}

pub fn g0_enumerate_with_cap(g: &Ultragraph, cut: u32, cap: u128) -> Result<Vec<VertexSet>> {
    if let Some(max) = g.max_tail_index() {
        if cut < max {
            return Err(Error::Precondition(format!(
                "cut {cut} is below index {max} used by the graph"
            )));
        }
    }
    let mut atoms: Vec<VertexId> = g.explicit_vertices().to_vec();
    if let Some(start) = g.tail_start() {
        for i in start..cut {
            atoms.push(VertexId::Tail(i));
        }
    }
    atoms.sort();
    let k = atoms.len();
    if k >= 100 {
        return Err(Error::ClosureTooLarge {
            size: u128::MAX,
            cap,
        });
    }

    // Smallest token-carrying element: the meet of all tail-carrying ranges.
    let tail_meet: Option<VertexSet> = {
        let tailed: Vec<&crate::graph::Edge> =
            g.edges().iter().filter(|e| e.range.has_tail()).collect();
        if tailed.is_empty() {
            None
        } else {
            let mut meet = tailed[0].range.clone();
            for e in &tailed[1..] {
                meet = meet.intersect(&e.range);
            }
            Some(meet)
        }
    };

    let meet_atoms: Vec<bool> = match &tail_meet {
        None => Vec::new(),
        Some(m) => atoms.iter().map(|a| m.contains(a)).collect(),
    };
    let free = meet_atoms.iter().filter(|x| !**x).count();

    let mut size: u128 = 1u128 << k;
    if tail_meet.is_some() {
        size += 1u128 << free;
    }
    if size > cap {
        return Err(Error::ClosureTooLarge { size, cap });
    }

    let mut out = Vec::with_capacity(size as usize);
    for mask in 0u128..(1u128 << k) {
        let members = atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, v)| v.clone());
        out.push(VertexSet::from_vertices(members));
    }
    if let Some(meet) = &tail_meet {
        let free_atoms: Vec<&VertexId> = atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| !meet_atoms[*i])
            .map(|(_, v)| v)
            .collect();
        for mask in 0u128..(1u128 << free) {
            let extra = free_atoms
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, v)| (*v).clone());
            out.push(meet.union(&VertexSet::from_vertices(extra)));
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Ultragraph;

    fn single_tail_edge() -> Ultragraph {
        Ultragraph::from_json(
            r#"{
                "vertices": ["u"],
                "tail": {"prefix": "w", "start": 1},
                "edges": [{"id": "e", "source": "u", "range": {"tail_from": 3}}]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn finite_targets_are_members() {
        let g = crate::samples::ten_vertex_demo();
        let target = g.parse_vertex_set("v3,v7").unwrap();
        let w = g0_membership(&g, &target).unwrap();
        assert!(w.terms.is_empty());
        assert_eq!(w.finite_part, target);
        assert_eq!(g0_evaluate(&g, &w).unwrap(), target);
    }

    #[test]
    fn tail_membership_matches_spec_examples() {
        let g = single_tail_edge();
        // tail_from 5 misses w3, w4 of the range meet.
        let t5 = g.parse_vertex_set("+tail:5").unwrap();
        assert!(g0_membership(&g, &t5).is_none());
        // {w1} u tail_from 3 is r(e) plus a finite set.
        let t = g.parse_vertex_set("w1+tail:3").unwrap();
        let w = g0_membership(&g, &t).unwrap();
        assert_eq!(w.terms, vec![vec!["e".to_string()]]);
        assert_eq!(w.finite_part, g.parse_vertex_set("w1").unwrap());
        assert_eq!(g0_evaluate(&g, &w).unwrap(), t);
    }

    #[test]
    fn enumerate_small_families() {
        // No edges, two vertices: all four subsets.
        let g = Ultragraph::from_json(r#"{"vertices": ["a", "b"], "edges": []}"#).unwrap();
        let family = g0_enumerate(&g, 1).unwrap();
        assert_eq!(family.len(), 4);

        // Single edge u -> {v}: {}, {u}, {v}, {u,v}.
        let g = Ultragraph::from_json(
            r#"{"vertices": ["u", "v"], "edges": [{"id": "e", "source": "u", "range": {"vertices": ["v"]}}]}"#,
        )
        .unwrap();
        let family = g0_enumerate(&g, 1).unwrap();
        assert_eq!(family.len(), 4);
        assert!(family.contains(&g.parse_vertex_set("v").unwrap()));
    }

    #[test]
    fn demo_graph_collapses_to_the_power_set() {
        let g = crate::samples::ten_vertex_demo();
        let family = g0_enumerate(&g, 1).unwrap();
        assert_eq!(family.len(), 1 << 10);
    }

    #[test]
    fn enumerate_respects_the_cap() {
        let g = crate::samples::ten_vertex_demo();
        let err = g0_enumerate_with_cap(&g, 1, 100).unwrap_err();
        assert!(matches!(err, Error::ClosureTooLarge { .. }));
    }

    #[test]
    fn tailed_enumeration_contains_the_meet_supersets() {
        let g = single_tail_edge();
        let family = g0_enumerate(&g, 4).unwrap();
        // Atoms: u, w1, w2, w3; plus token sets above tail_from 3.
        assert_eq!(family.len(), (1 << 4) + (1 << 3));
        assert!(family.contains(&g.parse_vertex_set("+tail:3").unwrap()));
        assert!(!family.contains(&g.parse_vertex_set("+tail:4").unwrap()));
    }
}
