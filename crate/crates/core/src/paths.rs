//! The path space, cycle enumeration, exits and Condition (L).
//!
//! Edges compose when the source of the next edge lies in the range of the
//! previous one, so paths and cycles live on the composability digraph whose
//! nodes are edge ids. A digraph cycle closes automatically: the arc from the
//! last edge back to the first is exactly the closing condition.

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Ultragraph, VertexId, VertexSet};
use std::collections::{BTreeMap, BTreeSet};

pub const DEFAULT_PATH_CAP: usize = 1 << 20;

/// A composable sequence of edges of positive length.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Path {
    edges: Vec<EdgeId>,
}

impl Path {
    /// Builds a path, checking composability of consecutive edges.
    pub fn new(g: &Ultragraph, edges: Vec<EdgeId>) -> Result<Path> {
        if edges.is_empty() {
            return Err(Error::Precondition("a path needs at least one edge".into()));
        }
        for id in &edges {
            g.require_edge(id)?;
        }
        for i in 0..edges.len() - 1 {
            let prev = g.require_edge(&edges[i])?;
            let next = g.require_edge(&edges[i + 1])?;
            if !prev.range.contains(&next.source) {
                return Err(Error::NotComposable(i + 1));
            }
        }
        Ok(Path { edges })
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn source<'g>(&self, g: &'g Ultragraph) -> &'g VertexId {
        &g.edge(&self.edges[0]).expect("validated").source
    }

    pub fn range<'g>(&self, g: &'g Ultragraph) -> &'g VertexSet {
        &g.edge(self.edges.last().expect("nonempty"))
            .expect("validated")
            .range
    }
}

/// A path whose first source lies in the last range.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cycle {
    pub path: Path,
    pub simple: bool,
}

impl Cycle {
    /// Builds a cycle, checking the closing condition; `simple` is derived.
    pub fn new(g: &Ultragraph, edges: Vec<EdgeId>) -> Result<Cycle> {
        let path = Path::new(g, edges)?;
        let first = g.require_edge(&path.edges[0])?;
        if !path.range(g).contains(&first.source) {
            return Err(Error::NotACycle);
        }
        let distinct: BTreeSet<&EdgeId> = path.edges.iter().collect();
        let simple = distinct.len() == path.edges.len();
        Ok(Cycle { path, simple })
    }

    pub fn edges(&self) -> &[EdgeId] {
        self.path.edges()
    }
}

/// Arc `e -> f` when `s(f)` is in `r(e)`; adjacency lists sorted by id.
pub fn composability_graph(g: &Ultragraph) -> BTreeMap<EdgeId, Vec<EdgeId>> {
    let mut out = BTreeMap::new();
    for e in g.edges() {
        let mut arcs: Vec<EdgeId> = g
            .edges()
            .iter()
            .filter(|f| e.range.contains(&f.source))
            .map(|f| f.id.clone())
            .collect();
        arcs.sort();
        out.insert(e.id.clone(), arcs);
    }
    out
}

/// All composable edge sequences of length `1..=max_len` in lexicographic
/// order, capped at [`DEFAULT_PATH_CAP`].
pub fn enumerate_paths(g: &Ultragraph, max_len: usize) -> Result<Vec<Path>> {
    enumerate_paths_with_cap(g, max_len, DEFAULT_PATH_CAP)
}

pub fn enumerate_paths_with_cap(g: &Ultragraph, max_len: usize, cap: usize) -> Result<Vec<Path>> {
    if max_len == 0 {
        return Err(Error::Precondition("max_len must be positive".into()));
    }
    let comp = composability_graph(g);
    let ids = g.edge_ids_sorted();
    let mut out: Vec<Path> = Vec::new();
    // Depth-first in id order yields lexicographic output directly.
    let mut stack: Vec<Vec<EdgeId>> = ids.iter().rev().map(|id| vec![id.clone()]).collect();
    while let Some(prefix) = stack.pop() {
        if out.len() == cap {
            return Err(Error::PathCapExceeded { cap });
        }
        out.push(Path {
            edges: prefix.clone(),
        });
        if prefix.len() < max_len {
            let last = prefix.last().expect("nonempty");
            for next in comp[last].iter().rev() {
                let mut ext = prefix.clone();
                ext.push(next.clone());
                stack.push(ext);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Johnson-style elementary circuit search on the composability digraph.
///
/// Each cycle is reported once, rotated so the smallest edge id comes first,
/// and the list is sorted by (length, edge sequence).
pub fn enumerate_simple_cycles(g: &Ultragraph) -> Vec<Cycle> {
    let ids = g.edge_ids_sorted();
    let index: BTreeMap<&EdgeId, usize> = ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
    let comp = composability_graph(g);
    let adj: Vec<Vec<usize>> = ids
        .iter()
        .map(|id| comp[id].iter().map(|f| index[f]).collect())
        .collect();
    let n = ids.len();

    let mut found: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        // Circuits through `start` using only nodes >= start.
        let mut blocked = vec![false; n];
        let mut block_list: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut path: Vec<usize> = Vec::new();
        circuit(
            start,
            start,
            &adj,
            &mut blocked,
            &mut block_list,
            &mut path,
            &mut found,
        );
    }

    let mut cycles: Vec<Cycle> = found
        .into_iter()
        .map(|nodes| {
            let edges: Vec<EdgeId> = nodes.into_iter().map(|i| ids[i].clone()).collect();
            Cycle::new(g, edges).expect("arcs encode membership")
        })
        .collect();
    cycles.sort_by(|a, b| {
        (a.edges().len(), a.edges()).cmp(&(b.edges().len(), b.edges()))
    });
    cycles
}

fn circuit(
    v: usize,
    start: usize,
    adj: &[Vec<usize>],
    blocked: &mut Vec<bool>,
    block_list: &mut Vec<Vec<usize>>,
    path: &mut Vec<usize>,
    found: &mut Vec<Vec<usize>>,
) -> bool {
    let mut closed = false;
    path.push(v);
    blocked[v] = true;
    for &w in &adj[v] {
        if w < start {
            continue;
        }
        if w == start {
            found.push(path.clone());
            closed = true;
        } else if !blocked[w] && circuit(w, start, adj, blocked, block_list, path, found) {
            closed = true;
        }
    }
    if closed {
        unblock(v, blocked, block_list);
    } else {
        for &w in &adj[v] {
            if w < start {
                continue;
            }
            if !block_list[w].contains(&v) {
                block_list[w].push(v);
            }
        }
    }
    path.pop();
    closed
}

fn unblock(v: usize, blocked: &mut Vec<bool>, block_list: &mut Vec<Vec<usize>>) {
    blocked[v] = false;
    while let Some(w) = block_list[v].pop() {
        if blocked[w] {
            unblock(w, blocked, block_list);
        }
    }
}

/// How a cycle escapes: an extra branch inside, an extra branch at the
/// closing step, or a sink inside a range.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitWitness {
    Edge(EdgeId),
    Sink(VertexId),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Exit {
    /// Which clause of the exit definition fires (1, 2 or 3).
    pub condition: u8,
    /// One-based position `i` along the cycle.
    pub position: usize,
    pub witness: ExitWitness,
}

/// All exits of a cycle with witnesses; an empty list means no exits.
///
/// Clauses 1 and 2 compare the edge set `s^{-1}(r(alpha_i))` with the
/// singleton of the following cycle edge; composability guarantees the
/// following edge is always present, so a witness edge exists whenever the
/// sets differ.
pub fn cycle_exits(g: &Ultragraph, c: &Cycle) -> Result<Vec<Exit>> {
    // Revalidate so stale cycles are rejected.
    let c = Cycle::new(g, c.edges().to_vec())?;
    let n = c.edges().len();
    let mut exits = Vec::new();
    for i in 0..n {
        let edge = g.require_edge(&c.edges()[i])?;
        let next = &c.edges()[(i + 1) % n];
        let condition = if i + 1 < n { 1 } else { 2 };
        for id in g.edges_from_set(&edge.range) {
            if &id != next {
                exits.push(Exit {
                    condition,
                    position: i + 1,
                    witness: ExitWitness::Edge(id),
                });
            }
        }
        // Clause 3: a sink inside the range. A tail part always provides one.
        for v in edge.range.explicit_members() {
            if g.is_sink(v) {
                exits.push(Exit {
                    condition: 3,
                    position: i + 1,
                    witness: ExitWitness::Sink(v.clone()),
                });
            }
        }
        if let Some(t) = edge.range.tail_from() {
            exits.push(Exit {
                condition: 3,
                position: i + 1,
                witness: ExitWitness::Sink(VertexId::Tail(t)),
            });
        }
    }
    exits.sort();
    exits.dedup();
    Ok(exits)
}

/// Closed-form no-exit test: every range along the cycle is a singleton and
/// every source emits exactly its cycle edge.
pub fn has_no_exits(g: &Ultragraph, c: &Cycle) -> Result<bool> {
    let c = Cycle::new(g, c.edges().to_vec())?;
    for id in c.edges() {
        let edge = g.require_edge(id)?;
        if edge.range.has_tail() || edge.range.explicit_len() != 1 {
            return Ok(false);
        }
        let out: Vec<&EdgeId> = g.out_edges(&edge.source).map(|e| &e.id).collect();
        if out != vec![id] {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionLReport {
    pub holds: bool,
    /// Simple cycles with no exits.
    pub violations: Vec<Cycle>,
}

/// Condition (L): every cycle has an exit. Decided on simple cycles; a
/// non-simple cycle without exits forces its simple subcycle to lack exits
/// too, which the property tests cross-check.
pub fn condition_l(g: &Ultragraph) -> ConditionLReport {
    let violations: Vec<Cycle> = enumerate_simple_cycles(g)
        .into_iter()
        .filter(|c| {
            cycle_exits(g, c)
                .map(|exits| exits.is_empty())
                .unwrap_or(false)
        })
        .collect();
    ConditionLReport {
        holds: violations.is_empty(),
        violations,
    }
}
