//! Acceptance suite. Each test prints one pass/fail line; tolerances are
//! pinned in the assertions.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, UnwindSafe};
use ugkit_core::branching::{
    build_discrete_bs_from_peeling, build_no_exit_degenerate_bs, build_standard_interval_bs,
    validate_discrete_bs, BranchingSystem, DiscreteBranchingSystem,
};
use ugkit_core::graph::{GraphDoc, Ultragraph, VertexId, VertexSet};
use ugkit_core::paths::{condition_l, cycle_exits, enumerate_simple_cycles, Cycle, Path};
use ugkit_core::rep::{
    self, faithfulness_witness, interval_test_family, nonzero_projection_witness, pf_direct,
    pf_via_rep, rep_apply, sample_sets, verify_ck_relations, Generator, PfMode,
};
use ugkit_core::samples::{self, RandomGraphOptions};
use ugkit_core::step::StepFunction;
use ugkit_core::{assemble_map, g0_membership, hs_closure, is_essential};

fn criterion(n: u32, title: &str, body: impl FnOnce() + UnwindSafe) {
    match catch_unwind(body) {
        Ok(()) => println!("acceptance criterion {n} ({title}): PASS"),
        Err(err) => {
            println!("acceptance criterion {n} ({title}): FAIL");
            std::panic::resume_unwind(err);
        }
    }
}

#[test]
fn criterion_1_peel_reproduction() {
    criterion(1, "walkthrough peel trace, byte-stable", || {
        let g = samples::ten_vertex_demo();
        let trace = ugkit_core::peel_sequence(&g).unwrap();

        assert!(trace.i0.is_empty());
        assert!(trace.levels.len() >= 2);
        let l1 = &trace.levels[0];
        let x1: BTreeSet<String> = l1
            .x
            .iter()
            .map(|xv| g.format_vertex_set(&xv.set))
            .collect();
        assert_eq!(
            x1,
            ["{v1}", "{v7}", "{v8,v9}"]
                .iter()
                .map(|s| s.to_string())
                .collect::<BTreeSet<_>>()
        );
        assert_eq!(
            l1.y,
            ["e1", "e3", "e5"].iter().map(|s| s.to_string()).collect()
        );
        assert_eq!(
            l1.i,
            [VertexId::explicit("v2")].into_iter().collect()
        );

        // Byte-stable report: two fresh computations render identically.
        let render = || {
            let g = samples::ten_vertex_demo();
            let trace = ugkit_core::peel_sequence(&g).unwrap();
            ugkit_core::jsonout::to_canonical_string(&ugkit_core::jsonout::peel_trace(&g, &trace))
        };
        assert_eq!(render(), render());
    });
}

#[test]
fn criterion_2_ck_relation_suite() {
    criterion(2, "defining relations on interval and discrete systems", || {
        let demo = samples::ten_vertex_demo();
        let report = verify_ck_relations(
            &BranchingSystem::Interval(build_standard_interval_bs(&demo)),
            1e-10,
        )
        .unwrap();
        assert!(report.pass, "walkthrough system: {report:?}");

        let mut interval_checked = 0;
        for seed in 0..25u64 {
            let g = samples::random_ultragraph(seed, &RandomGraphOptions::small());
            let bs = BranchingSystem::Interval(build_standard_interval_bs(&g));
            let report = verify_ck_relations(&bs, 1e-10).unwrap();
            assert!(report.pass, "seed {seed}: {report:?}");
            interval_checked += 1;
        }
        assert!(interval_checked >= 20, "only {interval_checked} interval cases");

        let mut discrete_checked = 0;
        for seed in 0..400u64 {
            if discrete_checked >= 12 {
                break;
            }
            let g = samples::random_ultragraph(seed, &RandomGraphOptions::small());
            if let Ok(dbs) = build_discrete_bs_from_peeling(&g) {
                let report = verify_ck_relations(&BranchingSystem::Discrete(dbs), 1e-10).unwrap();
                assert!(report.pass, "discrete seed {seed}: {report:?}");
                assert!(
                    report.relations.iter().all(|r| r.max_deviation == 0.0),
                    "discrete seed {seed} deviates: {report:?}"
                );
                discrete_checked += 1;
            }
        }
        assert!(discrete_checked >= 12, "only {discrete_checked} discrete cases");
    });
}

#[test]
fn criterion_3_transfer_operator_identity() {
    criterion(3, "transfer operator via representation vs direct", || {
        let bs = build_standard_interval_bs(&samples::two_loops());
        let map = assemble_map(&bs).unwrap();
        let box_cells = 16u32;
        let mut checked = 0;
        for seed in 0..24u64 {
            let phi = random_step_on_grid(seed, 0, 2, box_cells);
            let via = pf_via_rep(&bs, &phi, PfMode::Squared).unwrap();
            let direct = pf_direct(&map, &phi.square());
            assert!(
                via.l1_distance(&direct) < 1e-10,
                "seed {seed}: gap {}",
                via.l1_distance(&direct)
            );

            let general = pf_via_rep(&bs, &phi, PfMode::General).unwrap();
            let direct_general = pf_direct(&map, &phi);
            assert!(general.l1_distance(&direct_general) < 1e-10, "seed {seed}");

            // Mass preservation and positivity.
            assert!(
                (direct_general.integral() - phi.integral()).abs() < 1e-12,
                "seed {seed}"
            );
            let nonneg = phi.split_signs().0;
            assert!(pf_direct(&map, &nonneg).min_value() >= 0.0, "seed {seed}");
            checked += 1;
        }
        assert!(checked >= 20);
    });
}

#[test]
fn criterion_4_degenerate_cycles() {
    criterion(4, "no-exit cycles degenerate to source projections", || {
        let family = cyclic_family();
        assert!(family.len() >= 10, "only {} cyclic graphs", family.len());
        let mut cycles_checked = 0;
        for g in &family {
            let no_exit: Vec<Cycle> = enumerate_simple_cycles(g)
                .into_iter()
                .filter(|c| cycle_exits(g, c).unwrap().is_empty())
                .collect();
            assert!(!no_exit.is_empty(), "family member lost its cycle");
            for c in no_exit {
                let bs = build_no_exit_degenerate_bs(g, &c).unwrap();
                let path = Path::new(g, c.edges().to_vec()).unwrap();
                let source =
                    VertexSet::singleton(g.require_edge(&c.edges()[0]).unwrap().source.clone());
                let tests = interval_test_family(&bs, rep::DEFAULT_SEED, 10).unwrap();
                for phi in &tests.functions {
                    let lhs = rep_apply(&bs, &Generator::SPathStar(path.clone()), phi).unwrap();
                    let rhs = rep_apply(&bs, &Generator::P(source.clone()), phi).unwrap();
                    assert_eq!(lhs, rhs, "cycle {:?}", c.edges());
                }
                // Projections of nonempty sets are nonzero, witnessed.
                for a in sample_sets(g, 14) {
                    if a.is_empty() {
                        continue;
                    }
                    let w = nonzero_projection_witness(&bs, &a).unwrap().unwrap();
                    let projected = rep_apply(&bs, &Generator::P(a.clone()), &w).unwrap();
                    assert!(!projected.is_zero(), "set {}", g.format_vertex_set(&a));
                }
                cycles_checked += 1;
            }
        }
        assert!(cycles_checked >= 10);
    });
}

#[test]
fn criterion_5_oracle_equivalence() {
    criterion(5, "membership, closure and essentiality against brute force", || {
        // Generalized-vertex membership against the expression oracle, all
        // candidate subsets of a truncated universe per case.
        let mut cases = 0;
        for seed in 0..200u64 {
            if cases >= 55 {
                break;
            }
            let g = samples::random_ultragraph(seed, &RandomGraphOptions::small_tailed());
            if !g.has_tail() {
                continue;
            }
            let j = 1 + g.max_tail_index().unwrap_or(0).max(4);
            let k = j + 2;
            let mut atoms: Vec<VertexId> = g.explicit_vertices().to_vec();
            for i in 1..=3u32 {
                atoms.push(VertexId::Tail(i));
            }
            assert!(atoms.len() <= 8);
            for mask in 0u32..(1 << atoms.len()) {
                let picked: Vec<VertexId> = atoms
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, v)| v.clone())
                    .collect();
                for tail_from in [None, Some(1), Some(4)] {
                    let target = VertexSet::with_tail(picked.clone(), tail_from);
                    let got = g0_membership(&g, &target).is_some();
                    let want = common::g0_expression_oracle(&g, &target, j, k);
                    assert_eq!(got, want, "seed {seed}, target {}", g.format_vertex_set(&target));
                    if let Some(witness) = g0_membership(&g, &target) {
                        let back = ugkit_core::g0_evaluate(&g, &witness).unwrap();
                        assert_eq!(back, target, "witness does not evaluate back");
                    }
                }
            }
            // Enumeration against the naive closure fixpoint.
            let cut = 1 + g.max_tail_index().unwrap_or(1);
            let family = ugkit_core::g0_enumerate(&g, cut).unwrap();
            let oracle = common::closure_fixpoint_oracle(&g, cut);
            let expected: BTreeSet<VertexSet> = oracle
                .members
                .iter()
                .map(|bits| oracle.realize(*bits, cut))
                .collect();
            assert_eq!(
                family.into_iter().collect::<BTreeSet<_>>(),
                expected,
                "seed {seed} closure mismatch"
            );
            cases += 1;
        }
        assert!(cases >= 50, "only {cases} tailed cases");

        // Hereditary-saturated closure and essentiality on tail-free graphs,
        // every seed subset of up to six vertices.
        let mut hs_graphs = 0;
        for seed in 0..25u64 {
            let g = samples::random_ultragraph(seed, &RandomGraphOptions::small());
            let vertices: Vec<VertexId> = g.explicit_vertices().to_vec();
            for mask in 0u32..(1 << vertices.len()) {
                let w0: BTreeSet<VertexId> = vertices
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, v)| v.clone())
                    .collect();
                let sh = hs_closure(&g, &w0).unwrap();
                let want = common::hs_minimal_oracle(&g, &w0);
                assert_eq!(sh.vertices(), &want, "seed {seed}, mask {mask:b}");

                let got = is_essential(&g, &sh).essential;
                let want = common::essential_oracle(&g, sh.vertices());
                assert_eq!(got, want, "seed {seed}, mask {mask:b}");
            }
            hs_graphs += 1;
        }
        assert!(hs_graphs >= 20);
    });
}

#[test]
fn criterion_6_peel_invariant_suite() {
    criterion(6, "peel-level structure on every permutative graph", || {
        let mut held = 0;
        for seed in 0..150u64 {
            let g = samples::random_ultragraph(seed, &RandomGraphOptions::small());
            let report = ugkit_core::permutativity_condition(&g).unwrap();
            if !report.holds {
                continue;
            }
            let trace = ugkit_core::peel_sequence(&g).unwrap();
            let l1 = ugkit_core::check_l1_invariants(&g, &trace).unwrap();
            assert!(l1.pass, "seed {seed}: {l1:?}");
            held += 1;
        }
        assert!(held >= 10, "only {held} permutative graphs in the family");
    });
}

#[test]
fn criterion_7_uniqueness_coherence() {
    criterion(7, "exit condition matches the cycle decomposition", || {
        for seed in 0..80u64 {
            let g = samples::random_ultragraph(seed, &RandomGraphOptions::small());
            let cl = condition_l(&g);
            let dec = ugkit_core::uniqueness_decomposition(&g).unwrap();
            assert_eq!(cl.holds, dec.x1.is_empty(), "seed {seed}");
            assert!(dec.disjoint, "seed {seed}");

            // Every vertex outside the combined closure reaches into it.
            let combined: BTreeSet<VertexId> = dec
                .w1
                .vertices()
                .union(dec.w2.vertices())
                .cloned()
                .collect();
            let combined = hs_closure(&g, &combined).unwrap();
            assert!(
                is_essential(&g, &combined).essential,
                "seed {seed}: an outside vertex has no path into the closure"
            );
        }
    });
}

#[test]
fn criterion_8_faithfulness_hypothesis() {
    criterion(8, "orbit separation against exhaustive subset search", || {
        let g = samples::single_loop();
        let c = Cycle::new(&g, vec!["e".into()]).unwrap();
        let mut checked = 0;
        for d in 2..=6usize {
            for (name, perm) in permutations_for(d) {
                let domain: Vec<u64> = (1..=d as u64).collect();
                let dbs = loop_system(&g, &domain, &perm);
                assert!(validate_discrete_bs(&dbs).unwrap().pass, "{name}");
                let step = |x: u64| perm[(x - 1) as usize];
                for fmask in 1u32..(1 << 4) {
                    let powers: Vec<u32> =
                        (1..=4u32).filter(|n| fmask >> (n - 1) & 1 == 1).collect();
                    let got = faithfulness_witness(
                        &dbs,
                        &c,
                        &powers.iter().copied().collect(),
                    )
                    .unwrap();
                    let want = common::separation_oracle(&domain, step, &powers);
                    assert_eq!(
                        got.witness.is_some(),
                        want,
                        "{name}, powers {powers:?}"
                    );
                    checked += 1;
                }
            }
        }
        assert!(checked >= 100);
    });
}

// ---------------------------------------------------------------------------
// helpers
// ---------------------------------------------------------------------------

/// Deterministic random step function on the dyadic grid of `[lo, hi]`.
fn random_step_on_grid(seed: u64, lo: i64, hi: i64, cells: u32) -> StepFunction {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let span = ugkit_core::rat::rat_i(hi - lo);
    let mut marks: Vec<ugkit_core::rat::Rat> = (0..8)
        .map(|_| {
            ugkit_core::rat::rat_i(lo)
                + &span * ugkit_core::rat::rat(rng.gen_range(0..=cells as i64), cells as i64)
        })
        .collect();
    marks.sort();
    marks.dedup();
    let mut pieces = Vec::new();
    for pair in marks.chunks(2) {
        if pair.len() == 2 && pair[0] < pair[1] {
            let value = rng.gen_range(-80..=80i32) as f64 / 40.0;
            pieces.push((
                ugkit_core::interval::Interval::new(pair[0].clone(), pair[1].clone()).unwrap(),
                value,
            ));
        }
    }
    StepFunction::new(pieces).unwrap()
}

/// At least ten graphs, each with a simple no-exit cycle: pure cycles and
/// cycles next to unrelated random graphs.
fn cyclic_family() -> Vec<Ultragraph> {
    let mut out = Vec::new();
    for k in 1..=5usize {
        out.push(cycle_graph(k, None));
    }
    for k in 1..=3usize {
        for seed in [11u64, 29] {
            out.push(cycle_graph(k, Some(seed)));
        }
    }
    out
}

fn cycle_graph(k: usize, extra_seed: Option<u64>) -> Ultragraph {
    let mut doc = GraphDoc {
        vertices: (1..=k).map(|i| format!("c{i}")).collect(),
        tail: None,
        edges: (1..=k)
            .map(|i| ugkit_core::graph::EdgeDoc {
                id: format!("z{i}"),
                source: format!("c{i}"),
                range: ugkit_core::graph::RangeDoc {
                    vertices: vec![format!("c{}", i % k + 1)],
                    tail_from: None,
                },
            })
            .collect(),
    };
    if let Some(seed) = extra_seed {
        let extra = samples::random_ultragraph(seed, &RandomGraphOptions::small());
        let extra = extra.to_doc();
        doc.vertices.extend(extra.vertices);
        doc.edges.extend(extra.edges);
    }
    ugkit_core::validate_ultragraph(&doc).unwrap()
}

fn permutations_for(d: usize) -> Vec<(String, Vec<u64>)> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut out = Vec::new();
    out.push(("identity".to_string(), (1..=d as u64).collect()));
    // Full cycle 1 -> 2 -> ... -> d -> 1.
    out.push((
        "full-cycle".to_string(),
        (1..=d as u64).map(|x| x % d as u64 + 1).collect(),
    ));
    if d >= 3 {
        // Swap the first two, fix the rest.
        let mut p: Vec<u64> = (1..=d as u64).collect();
        p.swap(0, 1);
        out.push(("transposition".to_string(), p));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(d as u64 * 97);
    for i in 0..3 {
        let mut p: Vec<u64> = (1..=d as u64).collect();
        p.shuffle(&mut rng);
        out.push((format!("random-{i}"), p));
    }
    out
}

fn loop_system(g: &Ultragraph, domain: &[u64], perm: &[u64]) -> DiscreteBranchingSystem {
    use std::collections::BTreeMap;
    DiscreteBranchingSystem::new(
        g.clone(),
        BTreeMap::from([("e".to_string(), domain.to_vec())]),
        BTreeMap::from([(VertexId::explicit("v"), domain.to_vec())]),
        BTreeMap::from([(
            "e".to_string(),
            domain.iter().map(|&x| (x, perm[(x - 1) as usize])).collect(),
        )]),
    )
}
