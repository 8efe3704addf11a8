//! Independent brute-force oracles used by the acceptance and property
//! suites. Everything here recomputes answers from first principles on
//! truncated universes, deliberately avoiding the library's own algorithms.

#![allow(dead_code)]

use std::collections::BTreeSet;
use ugkit_core::graph::{Ultragraph, VertexId, VertexSet};

/// Truncated model of a vertex set: explicit members plus tail indices
/// below `k`.
pub fn truncate(set: &VertexSet, k: u32) -> BTreeSet<VertexId> {
    set.members_below(k).into_iter().collect()
}

/// Membership oracle for the generalized-vertex family, straight from its
/// union-of-range-intersections description. `j` bounds all indices used by
/// the graph and the target; padding by finite sets is allowed below `j`
/// and the model is truncated at `k > j`. A union of admissible terms is
/// admissible, so the union of every term inside the target is the best
/// possible cover of the high region.
pub fn g0_expression_oracle(g: &Ultragraph, target: &VertexSet, j: u32, k: u32) -> bool {
    assert!(k > j);
    if !target.has_tail() {
        return true;
    }
    let target_t = truncate(target, k);
    let edges = g.edges();
    let mut best: BTreeSet<VertexId> = BTreeSet::new();
    for mask in 1u32..(1 << edges.len()) {
        let mut term: Option<BTreeSet<VertexId>> = None;
        for (i, e) in edges.iter().enumerate() {
            if mask >> i & 1 == 0 {
                continue;
            }
            let t = truncate(&e.range, k);
            term = Some(match term {
                None => t,
                Some(prev) => prev.intersection(&t).cloned().collect(),
            });
        }
        let term = term.expect("mask is nonzero");
        if term.is_empty() {
            continue;
        }
        if term.is_subset(&target_t) {
            best.extend(term);
        }
    }
    // The high region must be covered by range terms; everything below j is
    // finite padding.
    target_t.iter().all(|v| match v {
        VertexId::Tail(i) if *i >= j => best.contains(v),
        _ => true,
    })
}

/// Naive fixpoint closure of the quotient family: singleton atoms, the
/// quotiented ranges, closed under union and nonempty intersection, plus
/// the empty set. Sets are bitmasks over the atoms with one extra token bit
/// for the far tail.
pub struct QuotientClosure {
    pub atoms: Vec<VertexId>,
    pub token_bit: u64,
    pub members: BTreeSet<u64>,
}

pub fn closure_fixpoint_oracle(g: &Ultragraph, cut: u32) -> QuotientClosure {
    let mut atoms: Vec<VertexId> = g.explicit_vertices().to_vec();
    if let Some(start) = g.tail_start() {
        for i in start..cut {
            atoms.push(VertexId::Tail(i));
        }
    }
    atoms.sort();
    assert!(atoms.len() < 63, "oracle universes stay tiny");
    let token_bit = 1u64 << atoms.len();
    let encode = |set: &VertexSet| -> u64 {
        let mut bits = 0u64;
        for (i, a) in atoms.iter().enumerate() {
            if set.contains(a) {
                bits |= 1 << i;
            }
        }
        if set.has_tail() {
            bits |= token_bit;
        }
        bits
    };

    let mut members: BTreeSet<u64> = BTreeSet::new();
    for (i, _) in atoms.iter().enumerate() {
        members.insert(1 << i);
    }
    for e in g.edges() {
        members.insert(encode(&e.range));
    }
    loop {
        let snapshot: Vec<u64> = members.iter().copied().collect();
        let before = members.len();
        for (i, a) in snapshot.iter().enumerate() {
            for b in &snapshot[i..] {
                members.insert(a | b);
                if a & b != 0 {
                    members.insert(a & b);
                }
            }
        }
        if members.len() == before {
            break;
        }
    }
    members.insert(0);
    QuotientClosure {
        atoms,
        token_bit,
        members,
    }
}

impl QuotientClosure {
    /// Realizes a bitmask as a normalized vertex set, the token standing
    /// for the tail from `cut`.
    pub fn realize(&self, bits: u64, cut: u32) -> VertexSet {
        let members = self
            .atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| bits >> i & 1 == 1)
            .map(|(_, v)| v.clone());
        let tail = (bits & self.token_bit != 0).then_some(cut);
        VertexSet::with_tail(members, tail)
    }
}

/// Smallest hereditary and saturated superset by exhaustive enumeration of
/// all subsets of the (tail-free) vertex set.
pub fn hs_minimal_oracle(g: &Ultragraph, seed: &BTreeSet<VertexId>) -> BTreeSet<VertexId> {
    let vertices: Vec<&VertexId> = g.explicit_vertices().iter().collect();
    assert!(vertices.len() <= 16);
    let contains = |mask: u32, v: &VertexId| -> bool {
        vertices
            .iter()
            .position(|u| *u == v)
            .map(|i| mask >> i & 1 == 1)
            .unwrap_or(false)
    };
    let mut best: Option<u32> = None;
    'masks: for mask in 0u32..(1 << vertices.len()) {
        for v in seed {
            if !contains(mask, v) {
                continue 'masks;
            }
        }
        for e in g.edges() {
            if contains(mask, &e.source)
                && !e.range.explicit_members().all(|v| contains(mask, v))
            {
                continue 'masks;
            }
        }
        for (i, v) in vertices.iter().enumerate() {
            if mask >> i & 1 == 1 || g.is_sink(v) {
                continue;
            }
            let absorbed = g
                .out_edges(v)
                .all(|e| e.range.explicit_members().all(|u| contains(mask, u)));
            if absorbed {
                continue 'masks;
            }
        }
        best = Some(match best {
            None => mask,
            Some(b) => {
                // Valid sets are closed under intersection, so the least
                // one is the intersection of all of them.
                b & mask
            }
        });
    }
    let best = best.expect("the full vertex set is always valid");
    vertices
        .iter()
        .enumerate()
        .filter(|(i, _)| best >> i & 1 == 1)
        .map(|(_, v)| (*v).clone())
        .collect()
}

/// Essentiality oracle: enumerate every path of length up to the edge count
/// from each outside vertex and look for a final range meeting the set.
pub fn essential_oracle(g: &Ultragraph, w: &BTreeSet<VertexId>) -> bool {
    let max_len = g.edges().len();
    for v in g.explicit_vertices() {
        if w.contains(v) {
            continue;
        }
        if !some_path_reaches(g, v, w, max_len) {
            return false;
        }
    }
    !g.has_tail()
}

fn some_path_reaches(
    g: &Ultragraph,
    from: &VertexId,
    w: &BTreeSet<VertexId>,
    budget: usize,
) -> bool {
    if budget == 0 {
        return false;
    }
    for e in g.out_edges(from) {
        if e.range.explicit_members().any(|u| w.contains(u)) {
            return true;
        }
        for u in e.range.explicit_members() {
            if some_path_reaches(g, u, w, budget - 1) {
                return true;
            }
        }
    }
    false
}

/// Exhaustive search over nonempty subsets for the separation property of
/// the faithfulness criterion: some set whose iterates under the cycle map
/// avoid it for every power in the family.
pub fn separation_oracle(domain: &[u64], step: impl Fn(u64) -> u64, powers: &[u32]) -> bool {
    assert!(domain.len() <= 16);
    let iterate = |x: u64, n: u32| -> u64 {
        let mut y = x;
        for _ in 0..n {
            y = step(y);
        }
        y
    };
    'subsets: for mask in 1u32..(1 << domain.len()) {
        let set: Vec<u64> = domain
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, x)| *x)
            .collect();
        for &n in powers {
            for &x in &set {
                if set.contains(&iterate(x, n)) {
                    continue 'subsets;
                }
            }
        }
        return true;
    }
    false
}
