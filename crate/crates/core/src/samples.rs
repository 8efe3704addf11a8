//! Ready-made graphs for tests, benches and experimentation, plus a seeded
//! random ultragraph generator.

use crate::graph::{GraphDoc, Ultragraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn parse(text: &str) -> Ultragraph {
    Ultragraph::from_json(text).expect("sample graphs are valid")
}

/// Ten vertices, five edges, two of them with multi-vertex ranges. The
/// standard walkthrough graph used across the test suite.
pub fn ten_vertex_demo() -> Ultragraph {
    parse(
        r#"{
            "vertices": ["v1","v2","v3","v4","v5","v6","v7","v8","v9","v10"],
            "edges": [
                {"id": "e1", "source": "v1",  "range": {"vertices": ["v2","v3"]}},
                {"id": "e2", "source": "v6",  "range": {"vertices": ["v3","v4","v5"]}},
                {"id": "e3", "source": "v2",  "range": {"vertices": ["v7"]}},
                {"id": "e4", "source": "v6",  "range": {"vertices": ["v10"]}},
                {"id": "e5", "source": "v10", "range": {"vertices": ["v8","v9"]}}
            ]
        }"#,
    )
}

/// One vertex with a single loop; the canonical no-exit cycle.
pub fn single_loop() -> Ultragraph {
    parse(
        r#"{"vertices": ["v"],
            "edges": [{"id": "e", "source": "v", "range": {"vertices": ["v"]}}]}"#,
    )
}

/// Two loops at one vertex.
pub fn two_loops() -> Ultragraph {
    parse(
        r#"{"vertices": ["v"],
            "edges": [
                {"id": "e", "source": "v", "range": {"vertices": ["v"]}},
                {"id": "f", "source": "v", "range": {"vertices": ["v"]}}
            ]}"#,
    )
}

/// `k` loops at one vertex; the wide branch workload for the transfer
/// operator benches.
pub fn k_loops(k: usize) -> Ultragraph {
    let edges: Vec<String> = (1..=k)
        .map(|i| format!(r#"{{"id": "l{i:03}", "source": "v", "range": {{"vertices": ["v"]}}}}"#))
        .collect();
    parse(&format!(
        r#"{{"vertices": ["v"], "edges": [{}]}}"#,
        edges.join(",")
    ))
}

/// Two-edge cycle v -> w -> v.
pub fn two_cycle() -> Ultragraph {
    parse(
        r#"{"vertices": ["v", "w"],
            "edges": [
                {"id": "e", "source": "v", "range": {"vertices": ["w"]}},
                {"id": "f", "source": "w", "range": {"vertices": ["v"]}}
            ]}"#,
    )
}

/// Loop at v plus a second edge v -> u; the loop gains a closing-step exit.
pub fn loop_with_branch() -> Ultragraph {
    parse(
        r#"{"vertices": ["v", "u"],
            "edges": [
                {"id": "e", "source": "v", "range": {"vertices": ["v"]}},
                {"id": "g", "source": "v", "range": {"vertices": ["u"]}}
            ]}"#,
    )
}

/// Loop whose range also contains the sink u; the loop exits through u.
pub fn loop_with_sink_in_range() -> Ultragraph {
    parse(
        r#"{"vertices": ["v", "u"],
            "edges": [{"id": "e", "source": "v", "range": {"vertices": ["v", "u"]}}]}"#,
    )
}

/// Loop at v next to an unrelated edge a -> b.
pub fn loop_plus_disjoint_edge() -> Ultragraph {
    parse(
        r#"{"vertices": ["v", "a", "b"],
            "edges": [
                {"id": "e", "source": "v", "range": {"vertices": ["v"]}},
                {"id": "f", "source": "a", "range": {"vertices": ["b"]}}
            ]}"#,
    )
}

/// Chain u -> v -> w.
pub fn chain3() -> Ultragraph {
    parse(
        r#"{"vertices": ["u", "v", "w"],
            "edges": [
                {"id": "e", "source": "u", "range": {"vertices": ["v"]}},
                {"id": "f", "source": "v", "range": {"vertices": ["w"]}}
            ]}"#,
    )
}

/// Chain u -> v -> w plus an isolated vertex z.
pub fn chain3_with_isolated() -> Ultragraph {
    parse(
        r#"{"vertices": ["u", "v", "w", "z"],
            "edges": [
                {"id": "e", "source": "u", "range": {"vertices": ["v"]}},
                {"id": "f", "source": "v", "range": {"vertices": ["w"]}}
            ]}"#,
    )
}

/// Single edge u -> {w}.
pub fn single_edge() -> Ultragraph {
    parse(
        r#"{"vertices": ["u", "w"],
            "edges": [{"id": "e", "source": "u", "range": {"vertices": ["w"]}}]}"#,
    )
}

/// One edge whose range is the whole sink tail.
pub fn tail_range() -> Ultragraph {
    parse(
        r#"{"vertices": ["u"],
            "tail": {"prefix": "w", "start": 1},
            "edges": [{"id": "e", "source": "u", "range": {"tail_from": 1}}]}"#,
    )
}

#[derive(Debug, Clone)]
pub struct RandomGraphOptions {
    pub max_vertices: usize,
    pub max_edges: usize,
    /// Allow a sink tail and tailed ranges.
    pub allow_tail: bool,
}

impl RandomGraphOptions {
    /// At most 6 vertices and 6 edges, no tail.
    pub fn small() -> Self {
        RandomGraphOptions {
            max_vertices: 6,
            max_edges: 6,
            allow_tail: false,
        }
    }

    /// At most 5 explicit vertices plus a tail.
    pub fn small_tailed() -> Self {
        RandomGraphOptions {
            max_vertices: 5,
            max_edges: 5,
            allow_tail: true,
        }
    }
}

/// Deterministic pseudo-random ultragraph; equal seeds give equal graphs.
pub fn random_ultragraph(seed: u64, opts: &RandomGraphOptions) -> Ultragraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_v = rng.gen_range(1..=opts.max_vertices);
    let n_e = rng.gen_range(0..=opts.max_edges);
    let with_tail = opts.allow_tail && rng.gen_bool(0.6);
    let vertices: Vec<String> = (1..=n_v).map(|i| format!("v{i}")).collect();
    let mut doc = GraphDoc {
        vertices: vertices.clone(),
        tail: with_tail.then(|| crate::graph::TailSpec {
            prefix: "w".into(),
            start: 1,
        }),
        edges: Vec::new(),
    };
    for i in 1..=n_e {
        let source = vertices[rng.gen_range(0..n_v)].clone();
        let mut members: Vec<String> = vertices
            .iter()
            .filter(|_| rng.gen_bool(0.3))
            .cloned()
            .collect();
        let mut tail_from = None;
        if with_tail && rng.gen_bool(0.5) {
            tail_from = Some(rng.gen_range(1..=4u32));
        } else if with_tail && rng.gen_bool(0.3) {
            members.push(format!("w{}", rng.gen_range(1..=4u32)));
        }
        if members.is_empty() && tail_from.is_none() {
            members.push(vertices[rng.gen_range(0..n_v)].clone());
        }
        doc.edges.push(crate::graph::EdgeDoc {
            id: format!("e{i}"),
            source,
            range: crate::graph::RangeDoc {
                vertices: members,
                tail_from,
            },
        });
    }
    crate::graph::validate_ultragraph(&doc).expect("generated graphs are valid")
}
