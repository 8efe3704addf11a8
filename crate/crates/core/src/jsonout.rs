//! Canonical JSON payloads for reports. `serde_json` maps are ordered, so
//! serializing these values gives byte-identical output for identical
//! inputs; the command-line front end prints them verbatim.

use crate::g0::G0Witness;
use crate::graph::{Ultragraph, VertexId, VertexSet};
use crate::ideals::{EssentialReport, HsSet, UniquenessReport};
use crate::paths::{ConditionLReport, Cycle, Exit, ExitWitness};
use crate::permutative::{ExtremeTag, PeelTrace};
use serde_json::{json, Value};
use std::collections::BTreeSet;

pub fn vertex_set(g: &Ultragraph, set: &VertexSet) -> Value {
    json!({
        "vertices": set.explicit_members().map(|v| g.vertex_name(v)).collect::<Vec<_>>(),
        "tail_from": set.tail_from(),
    })
}

pub fn vertex_list(g: &Ultragraph, set: &BTreeSet<VertexId>) -> Value {
    json!(set.iter().map(|v| g.vertex_name(v)).collect::<Vec<_>>())
}

pub fn cycle(c: &Cycle) -> Value {
    json!({"edges": c.edges(), "simple": c.simple})
}

pub fn exits(g: &Ultragraph, list: &[Exit]) -> Value {
    json!(list
        .iter()
        .map(|e| {
            let witness = match &e.witness {
                ExitWitness::Edge(id) => json!({"edge": id}),
                ExitWitness::Sink(v) => json!({"sink": g.vertex_name(v)}),
            };
            json!({"condition": e.condition, "position": e.position, "witness": witness})
        })
        .collect::<Vec<_>>())
}

pub fn condition_l(report: &ConditionLReport) -> Value {
    json!({
        "holds": report.holds,
        "violations": report.violations.iter().map(cycle).collect::<Vec<_>>(),
    })
}

pub fn g0_membership(g: &Ultragraph, target: &VertexSet, witness: &Option<G0Witness>) -> Value {
    match witness {
        None => json!({"target": vertex_set(g, target), "member": false}),
        Some(w) => json!({
            "target": vertex_set(g, target),
            "member": true,
            "witness": {
                "range_intersections": w.terms,
                "finite_part": vertex_set(g, &w.finite_part),
            },
        }),
    }
}

pub fn hs_set(g: &Ultragraph, set: &HsSet) -> Value {
    vertex_list(g, set.vertices())
}

pub fn essential(g: &Ultragraph, report: &EssentialReport) -> Value {
    json!({
        "essential": report.essential,
        "orphan": report.orphan.as_ref().map(|v| g.vertex_name(v)),
    })
}

pub fn uniqueness(g: &Ultragraph, report: &UniquenessReport) -> Value {
    json!({
        "condition_l": report.condition_l,
        "no_exit_cycles": report.no_exit_cycles.iter().map(cycle).collect::<Vec<_>>(),
        "x1": vertex_list(g, &report.x1),
        "w1": hs_set(g, &report.w1),
        "w2": hs_set(g, &report.w2),
        "disjoint": report.disjoint,
        "essential": report.essential,
        "obligations": report.obligations,
    })
}

pub fn peel_trace(g: &Ultragraph, trace: &PeelTrace) -> Value {
    let levels: Vec<Value> = trace
        .levels
        .iter()
        .enumerate()
        .map(|(idx, level)| {
            let x: Vec<Value> = level
                .x
                .iter()
                .map(|xv| {
                    json!({
                        "set": vertex_set(g, &xv.set),
                        "edge": xv.edge,
                        "tag": match xv.tag {
                            ExtremeTag::Ini => "ini",
                            ExtremeTag::Fin => "fin",
                        },
                    })
                })
                .collect();
            json!({
                "level": idx + 1,
                "x": x,
                "y": level.y,
                "i": vertex_list(g, &level.i),
                "remaining": {
                    "vertices": vertex_list(g, &level.remaining_vertices),
                    "edges": level.remaining_edges,
                },
            })
        })
        .collect();
    json!({"i0": vertex_list(g, &trace.i0), "levels": levels})
}

/// Wraps a payload in the standard report envelope.
pub fn report(command: &str, inputs: Value, status: &str, result: Value) -> Value {
    json!({
        "command": command,
        "inputs": inputs,
        "status": status,
        "result": result,
    })
}

/// Canonical text rendering: sorted keys, two-space indentation, trailing
/// newline.
pub fn to_canonical_string(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports are plain data");
    text.push('\n');
    text
}
