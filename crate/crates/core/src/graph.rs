//! Ultragraph data model: vertices, edges whose ranges are nonempty vertex
//! sets, and the normalized vertex-set algebra.
//!
//! The vertex universe is a finite explicit list, optionally extended by one
//! countable sink tail `{w_i : i >= start}`. Subsets of the universe are
//! represented in the normalized form "finite explicit part plus an optional
//! tail threshold", which is closed under union, intersection and difference.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub type EdgeId = String;

/// A vertex: either an explicitly declared one or the `index`-th tail sink.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexId {
    Explicit(String),
    Tail(u32),
}

impl VertexId {
    pub fn explicit(name: &str) -> Self {
        VertexId::Explicit(name.to_string())
    }

    pub fn is_tail(&self) -> bool {
        matches!(self, VertexId::Tail(_))
    }
}

/// The optional countable sink tail `{prefix}{start}, {prefix}{start+1}, ...`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailSpec {
    pub prefix: String,
    pub start: u32,
}

/// A normalized subset of the vertex universe.
///
/// If `tail_from = Some(t)` the set contains every tail vertex with index
/// `>= t`. Normalization keeps the explicit part free of such vertices and
/// absorbs a listed `t - 1` by decrementing the threshold, so equal sets have
/// equal representations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct VertexSet {
    explicit: BTreeSet<VertexId>,
    tail_from: Option<u32>,
}

impl VertexSet {
    pub fn empty() -> Self {
        VertexSet::default()
    }

    pub fn from_vertices<I: IntoIterator<Item = VertexId>>(vs: I) -> Self {
        VertexSet {
            explicit: vs.into_iter().collect(),
            tail_from: None,
        }
        .normalized()
    }

    pub fn with_tail<I: IntoIterator<Item = VertexId>>(vs: I, tail_from: Option<u32>) -> Self {
        VertexSet {
            explicit: vs.into_iter().collect(),
            tail_from,
        }
        .normalized()
    }

    pub fn singleton(v: VertexId) -> Self {
        VertexSet::from_vertices([v])
    }

    fn normalized(mut self) -> Self {
        if let Some(mut t) = self.tail_from {
            self.explicit.retain(|v| match v {
                VertexId::Tail(i) => *i < t,
                _ => true,
            });
            while t > 1 && self.explicit.contains(&VertexId::Tail(t - 1)) {
                self.explicit.remove(&VertexId::Tail(t - 1));
                t -= 1;
            }
            self.tail_from = Some(t);
        }
        self
    }

    pub fn is_empty(&self) -> bool {
        self.explicit.is_empty() && self.tail_from.is_none()
    }

    pub fn has_tail(&self) -> bool {
        self.tail_from.is_some()
    }

    pub fn tail_from(&self) -> Option<u32> {
        self.tail_from
    }

    pub fn explicit_members(&self) -> impl Iterator<Item = &VertexId> {
        self.explicit.iter()
    }

    /// Number of explicit members; the tail part is infinite and not counted.
    pub fn explicit_len(&self) -> usize {
        self.explicit.len()
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        if self.explicit.contains(v) {
            return true;
        }
        match (v, self.tail_from) {
            (VertexId::Tail(i), Some(t)) => *i >= t,
            _ => false,
        }
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let tail_from = match (self.tail_from, other.tail_from) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        VertexSet {
            explicit: self.explicit.union(&other.explicit).cloned().collect(),
            tail_from,
        }
        .normalized()
    }

    pub fn intersect(&self, other: &VertexSet) -> VertexSet {
        let mut explicit: BTreeSet<VertexId> = self
            .explicit
            .iter()
            .filter(|v| other.contains(v))
            .cloned()
            .collect();
        explicit.extend(other.explicit.iter().filter(|v| self.contains(v)).cloned());
        let tail_from = match (self.tail_from, other.tail_from) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        VertexSet { explicit, tail_from }.normalized()
    }

    /// Set difference; always representable in normalized form.
    pub fn minus(&self, other: &VertexSet) -> VertexSet {
        let explicit: BTreeSet<VertexId> = self
            .explicit
            .iter()
            .filter(|v| !other.contains(v))
            .cloned()
            .collect();
        let mut out = VertexSet {
            explicit,
            tail_from: None,
        };
        if let Some(t) = self.tail_from {
            match other.tail_from {
                None => {
                    // Finitely many tail members of `other` can be listed
                    // explicitly; the rest of the tail survives.
                    let removed: BTreeSet<u32> = other
                        .explicit
                        .iter()
                        .filter_map(|v| match v {
                            VertexId::Tail(i) if *i >= t => Some(*i),
                            _ => None,
                        })
                        .collect();
                    let horizon = removed.iter().max().map_or(t, |m| m + 1);
                    for i in t..horizon {
                        if !removed.contains(&i) {
                            out.explicit.insert(VertexId::Tail(i));
                        }
                    }
                    out.tail_from = Some(horizon);
                }
                Some(u) => {
                    for i in t..u {
                        if !other.contains(&VertexId::Tail(i)) {
                            out.explicit.insert(VertexId::Tail(i));
                        }
                    }
                }
            }
        }
        out.normalized()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        if let Some(t) = self.tail_from {
            match other.tail_from {
                // A normalized superset must swallow the whole tail.
                None => return false,
                Some(u) => {
                    if u > t {
                        return false;
                    }
                }
            }
        }
        self.explicit.iter().all(|v| other.contains(v))
    }

    /// Members with tail indices below `cut`, in canonical order.
    pub fn members_below(&self, cut: u32) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = self.explicit.iter().cloned().collect();
        if let Some(t) = self.tail_from {
            for i in t..cut {
                out.push(VertexId::Tail(i));
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Largest tail index mentioned explicitly or as a threshold.
    pub fn max_tail_index(&self) -> Option<u32> {
        let explicit_max = self
            .explicit
            .iter()
            .filter_map(|v| match v {
                VertexId::Tail(i) => Some(*i),
                _ => None,
            })
            .max();
        match (explicit_max, self.tail_from) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Binary vertex-set operation selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Intersect,
}

/// Combines two normalized sets; the workhorse of the generalized-vertex
/// lattice.
pub fn vs_combine(op: SetOp, a: &VertexSet, b: &VertexSet) -> VertexSet {
    match op {
        SetOp::Union => a.union(b),
        SetOp::Intersect => a.intersect(b),
    }
}

/// An edge `e` with source `s(e)` and nonempty range `r(e)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub source: VertexId,
    pub range: VertexSet,
}

/// An ultragraph over a finite explicit vertex list plus an optional sink
/// tail. Edge sources are explicit vertices; tail vertices are sinks by
/// construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ultragraph {
    vertices: Vec<VertexId>,
    vertex_lookup: BTreeSet<VertexId>,
    tail: Option<TailSpec>,
    edges: Vec<Edge>,
    by_id: BTreeMap<EdgeId, usize>,
    out: BTreeMap<VertexId, Vec<usize>>,
}

/// Raw JSON shape of a graph document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailSpec>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub id: String,
    pub source: String,
    pub range: RangeDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct RangeDoc {
    #[serde(default)]
    pub vertices: Vec<String>,
    #[serde(default)]
    pub tail_from: Option<u32>,
}

/// Validates a graph document and returns the graph with all vertex sets
/// normalized.
pub fn validate_ultragraph(doc: &GraphDoc) -> Result<Ultragraph> {
    if let Some(tail) = &doc.tail {
        if tail.prefix.is_empty() || tail.start == 0 {
            return Err(Error::BadDocument(
                "tail needs a nonempty prefix and a positive start".into(),
            ));
        }
    }
    let tail = doc.tail.clone();
    let parse_tail_name = |name: &str| -> Option<u32> {
        let tail = tail.as_ref()?;
        let rest = name.strip_prefix(&tail.prefix)?;
        if rest.is_empty() || rest.starts_with('0') || !rest.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        rest.parse::<u32>().ok()
    };

    let mut vertices = Vec::with_capacity(doc.vertices.len());
    let mut vertex_lookup = BTreeSet::new();
    for name in &doc.vertices {
        if parse_tail_name(name).is_some() {
            return Err(Error::TailNameCollision(name.clone()));
        }
        let v = VertexId::explicit(name);
        if !vertex_lookup.insert(v.clone()) {
            return Err(Error::DuplicateId(name.clone()));
        }
        vertices.push(v);
    }

    let resolve = |name: &str| -> Result<VertexId> {
        if let Some(i) = parse_tail_name(name) {
            let start = tail.as_ref().map(|t| t.start).unwrap_or(1);
            if i < start {
                return Err(Error::TailIndexBelowStart { index: i, start });
            }
            return Ok(VertexId::Tail(i));
        }
        let v = VertexId::explicit(name);
        if vertex_lookup.contains(&v) {
            Ok(v)
        } else {
            Err(Error::UnknownVertex(name.to_string()))
        }
    };

    let mut edges = Vec::with_capacity(doc.edges.len());
    let mut by_id = BTreeMap::new();
    let mut out: BTreeMap<VertexId, Vec<usize>> = BTreeMap::new();
    for edge_doc in &doc.edges {
        if by_id.contains_key(&edge_doc.id) {
            return Err(Error::DuplicateId(edge_doc.id.clone()));
        }
        let source = resolve(&edge_doc.source)?;
        if source.is_tail() {
            return Err(Error::TailSource(edge_doc.id.clone(), edge_doc.source.clone()));
        }
        if let Some(t) = edge_doc.range.tail_from {
            if tail.is_none() {
                return Err(Error::NoTailDeclared(format!("range of `{}`", edge_doc.id)));
            }
            let start = tail.as_ref().map(|t| t.start).unwrap_or(1);
            if t < start {
                return Err(Error::TailIndexBelowStart { index: t, start });
            }
        }
        let mut members = Vec::new();
        for name in &edge_doc.range.vertices {
            members.push(resolve(name)?);
        }
        let range = VertexSet::with_tail(members, edge_doc.range.tail_from);
        if range.is_empty() {
            return Err(Error::EmptyRange(edge_doc.id.clone()));
        }
        by_id.insert(edge_doc.id.clone(), edges.len());
        out.entry(source.clone()).or_default().push(edges.len());
        edges.push(Edge {
            id: edge_doc.id.clone(),
            source,
            range,
        });
    }

    Ok(Ultragraph {
        vertices,
        vertex_lookup,
        tail,
        edges,
        by_id,
        out,
    })
}

impl Ultragraph {
    pub fn from_json(text: &str) -> Result<Ultragraph> {
        let doc: GraphDoc =
            serde_json::from_str(text).map_err(|e| Error::BadDocument(e.to_string()))?;
        validate_ultragraph(&doc)
    }

    pub fn to_doc(&self) -> GraphDoc {
        GraphDoc {
            vertices: self
                .vertices
                .iter()
                .map(|v| self.vertex_name(v))
                .collect(),
            tail: self.tail.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    id: e.id.clone(),
                    source: self.vertex_name(&e.source),
                    range: self.set_to_doc(&e.range),
                })
                .collect(),
        }
    }

    /// Explicit vertices in declaration order.
    pub fn explicit_vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn tail(&self) -> Option<&TailSpec> {
        self.tail.as_ref()
    }

    pub fn has_tail(&self) -> bool {
        self.tail.is_some()
    }

    pub fn tail_start(&self) -> Option<u32> {
        self.tail.as_ref().map(|t| t.start)
    }

    /// Edges in declaration order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.by_id.get(id).map(|&i| &self.edges[i])
    }

    pub fn require_edge(&self, id: &str) -> Result<&Edge> {
        self.edge(id).ok_or_else(|| Error::UnknownEdge(id.to_string()))
    }

    pub fn edge_ids_sorted(&self) -> Vec<EdgeId> {
        self.by_id.keys().cloned().collect()
    }

    pub fn contains_vertex(&self, v: &VertexId) -> bool {
        match v {
            VertexId::Explicit(_) => self.vertex_lookup.contains(v),
            VertexId::Tail(i) => self
                .tail
                .as_ref()
                .map(|t| *i >= t.start)
                .unwrap_or(false),
        }
    }

    /// Edges with source `v`, in declaration order.
    pub fn out_edges(&self, v: &VertexId) -> impl Iterator<Item = &Edge> {
        self.out
            .get(v)
            .map(|ix| ix.as_slice())
            .unwrap_or(&[])
            .iter()
            .map(|&i| &self.edges[i])
    }

    pub fn is_sink(&self, v: &VertexId) -> bool {
        self.out.get(v).is_none_or(|ix| ix.is_empty())
    }

    /// Explicit sinks in declaration order.
    pub fn explicit_sinks(&self) -> Vec<VertexId> {
        self.vertices
            .iter()
            .filter(|v| self.is_sink(v))
            .cloned()
            .collect()
    }

    /// Edges whose source lies in `a`, sorted by id.
    pub fn edges_from_set(&self, a: &VertexSet) -> Vec<EdgeId> {
        let mut out: Vec<EdgeId> = self
            .edges
            .iter()
            .filter(|e| a.contains(&e.source))
            .map(|e| e.id.clone())
            .collect();
        out.sort();
        out
    }

    /// `s(G^1)` as a vertex set.
    pub fn source_set(&self) -> VertexSet {
        VertexSet::from_vertices(self.edges.iter().map(|e| e.source.clone()))
    }

    /// Union of all ranges.
    pub fn range_union(&self) -> VertexSet {
        self.edges
            .iter()
            .fold(VertexSet::empty(), |acc, e| acc.union(&e.range))
    }

    /// Largest tail index mentioned anywhere in the graph.
    pub fn max_tail_index(&self) -> Option<u32> {
        self.edges
            .iter()
            .filter_map(|e| e.range.max_tail_index())
            .max()
    }

    pub fn vertex_name(&self, v: &VertexId) -> String {
        match v {
            VertexId::Explicit(name) => name.clone(),
            VertexId::Tail(i) => {
                let prefix = self.tail.as_ref().map(|t| t.prefix.as_str()).unwrap_or("w");
                format!("{prefix}{i}")
            }
        }
    }

    pub fn parse_vertex_name(&self, name: &str) -> Result<VertexId> {
        if let Some(tail) = &self.tail {
            if let Some(rest) = name.strip_prefix(&tail.prefix) {
                if !rest.is_empty()
                    && !rest.starts_with('0')
                    && rest.bytes().all(|b| b.is_ascii_digit())
                {
                    let i: u32 = rest
                        .parse()
                        .map_err(|_| Error::UnknownVertex(name.to_string()))?;
                    if i < tail.start {
                        return Err(Error::TailIndexBelowStart {
                            index: i,
                            start: tail.start,
                        });
                    }
                    return Ok(VertexId::Tail(i));
                }
            }
        }
        let v = VertexId::explicit(name);
        if self.vertex_lookup.contains(&v) {
            Ok(v)
        } else {
            Err(Error::UnknownVertex(name.to_string()))
        }
    }

    /// Parses the CLI literal `v1,v2+tail:3`; the empty string is the empty
    /// set.
    pub fn parse_vertex_set(&self, literal: &str) -> Result<VertexSet> {
        let bad = || Error::BadSetLiteral(literal.to_string());
        let (list, tail_from) = match literal.split_once("+tail:") {
            Some((list, t)) => {
                if self.tail.is_none() {
                    return Err(Error::NoTailDeclared(literal.to_string()));
                }
                let t: u32 = t.trim().parse().map_err(|_| bad())?;
                if t == 0 {
                    return Err(bad());
                }
                let start = self.tail_start().unwrap_or(1);
                if t < start {
                    return Err(Error::TailIndexBelowStart { index: t, start });
                }
                (list, Some(t))
            }
            None => (literal, None),
        };
        let mut members = Vec::new();
        for name in list.split(',') {
            let name = name.trim();
            if name.is_empty() {
                continue;
            }
            members.push(self.parse_vertex_name(name)?);
        }
        Ok(VertexSet::with_tail(members, tail_from))
    }

    pub fn set_to_doc(&self, set: &VertexSet) -> RangeDoc {
        RangeDoc {
            vertices: set
                .explicit_members()
                .map(|v| self.vertex_name(v))
                .collect(),
            tail_from: set.tail_from(),
        }
    }

    /// Canonical display form of a set, members sorted and the tail last.
    pub fn format_vertex_set(&self, set: &VertexSet) -> String {
        let mut parts: Vec<String> = set
            .explicit_members()
            .map(|v| self.vertex_name(v))
            .collect();
        if let Some(t) = set.tail_from() {
            parts.push(format!("+tail:{t}"));
        }
        format!("{{{}}}", parts.join(","))
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexId::Explicit(name) => write!(f, "{name}"),
            VertexId::Tail(i) => write!(f, "tail:{i}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph_with_tail() -> Ultragraph {
        Ultragraph::from_json(
            r#"{
                "vertices": ["u"],
                "tail": {"prefix": "w", "start": 1},
                "edges": [
                    {"id": "e", "source": "u", "range": {"vertices": [], "tail_from": 3}}
                ]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn validates_demo_document() {
        let g = crate::samples::ten_vertex_demo();
        assert_eq!(g.edges().len(), 5);
        assert_eq!(g.explicit_vertices().len(), 10);
        assert_eq!(g.edge("e1").unwrap().source, VertexId::explicit("v1"));
    }

    #[test]
    fn zero_edges_is_valid() {
        let g = Ultragraph::from_json(r#"{"vertices": ["v"], "edges": []}"#).unwrap();
        assert!(g.edges().is_empty());
        assert!(g.is_sink(&VertexId::explicit("v")));
    }

    #[test]
    fn empty_range_is_rejected() {
        let err = Ultragraph::from_json(
            r#"{"vertices": ["v"], "edges": [{"id": "e", "source": "v", "range": {"vertices": []}}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::EmptyRange(_)));
    }

    #[test]
    fn duplicate_and_unknown_are_rejected() {
        assert!(matches!(
            Ultragraph::from_json(r#"{"vertices": ["v", "v"], "edges": []}"#).unwrap_err(),
            Error::DuplicateId(_)
        ));
        assert!(matches!(
            Ultragraph::from_json(
                r#"{"vertices": ["v"], "edges": [{"id": "e", "source": "x", "range": {"vertices": ["v"]}}]}"#
            )
            .unwrap_err(),
            Error::UnknownVertex(_)
        ));
    }

    #[test]
    fn tail_vertices_cannot_be_sources() {
        let err = Ultragraph::from_json(
            r#"{
                "vertices": [],
                "tail": {"prefix": "w", "start": 1},
                "edges": [{"id": "e", "source": "w1", "range": {"vertices": ["w2"]}}]
            }"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::TailSource(_, _)));
    }

    #[test]
    fn set_normalization_absorbs_adjacent_tail_members() {
        let s = VertexSet::with_tail(
            [VertexId::Tail(2), VertexId::explicit("a"), VertexId::Tail(5)],
            Some(3),
        );
        // w5 is swallowed by the tail, w2 lowers the threshold to 2.
        assert_eq!(s.tail_from(), Some(2));
        assert_eq!(s.explicit_len(), 1);
        assert!(s.contains(&VertexId::Tail(2)));
        assert!(s.contains(&VertexId::Tail(9)));
    }

    #[test]
    fn combine_matches_spec_examples() {
        let v = |n: &str| VertexId::explicit(n);
        let a = VertexSet::from_vertices([v("v2"), v("v3")]);
        let b = VertexSet::from_vertices([v("v3"), v("v4"), v("v5")]);
        let u = vs_combine(SetOp::Union, &a, &b);
        assert_eq!(
            u,
            VertexSet::from_vertices([v("v2"), v("v3"), v("v4"), v("v5")])
        );

        let t3 = VertexSet::with_tail([], Some(3));
        let t5 = VertexSet::with_tail([], Some(5));
        assert_eq!(vs_combine(SetOp::Intersect, &t3, &t5), t5);

        let w2 = VertexSet::singleton(VertexId::Tail(2));
        let got = vs_combine(SetOp::Union, &w2, &t3);
        assert_eq!(got, VertexSet::with_tail([], Some(2)));
    }

    #[test]
    fn subset_and_minus_are_consistent() {
        let t3 = VertexSet::with_tail([], Some(3));
        let t5 = VertexSet::with_tail([], Some(5));
        assert!(t5.is_subset(&t3));
        assert!(!t3.is_subset(&t5));
        let d = t3.minus(&t5);
        assert_eq!(
            d,
            VertexSet::from_vertices([VertexId::Tail(3), VertexId::Tail(4)])
        );
        assert!(t3.minus(&t3).is_empty());
    }

    #[test]
    fn parse_set_literals() {
        let g = graph_with_tail();
        let s = g.parse_vertex_set("u,w2+tail:4").unwrap();
        assert!(s.contains(&VertexId::explicit("u")));
        assert!(s.contains(&VertexId::Tail(2)));
        assert!(!s.contains(&VertexId::Tail(3)));
        assert!(s.contains(&VertexId::Tail(4)));
        assert!(g.parse_vertex_set("").unwrap().is_empty());
        assert!(g.parse_vertex_set("zz").is_err());
    }
}
