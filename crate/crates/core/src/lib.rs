//! Toolkit for ultragraphs and their branching systems.
//!
//! An ultragraph is a directed graph whose edges end on nonempty *sets* of
//! vertices. This crate builds the combinatorics that drive their operator
//! algebras and makes the analytic side executable:
//!
//! - the normalized vertex-set algebra and the generalized-vertex lattice
//!   (membership with witnesses, quotient-closure enumeration);
//! - paths, simple cycles, exits and Condition (L);
//! - hereditary-saturated closures, essentiality of the generated ideal,
//!   and the no-exit-cycle decomposition behind the uniqueness theorem;
//! - branching systems on the real line (exact rational interval geometry,
//!   piecewise-affine fiber maps) and on the positive integers;
//! - the induced representation on step functions, verification of the four
//!   defining relations, the Perron-Frobenius transfer operator evaluated
//!   directly and through the representation, and the orbit-separation
//!   criterion for faithfulness;
//! - extreme-vertex peeling and the permutativity condition.
//!
//! The `parallel` feature (on by default) runs the verification loops and
//! per-edge transfer-operator sums on rayon; disabling it falls back to
//! sequential execution with bit-identical output. Every `*_seq` entry
//! point forces the sequential path regardless of the feature.

pub mod branching;
pub mod error;
mod exec;
pub mod g0;
pub mod graph;
pub mod ideals;
pub mod interval;
pub mod jsonout;
pub mod paths;
pub mod permutative;
pub mod rat;
pub mod rep;
pub mod samples;
pub mod step;

pub use branching::{
    assemble_map, build_discrete_bs_from_peeling, build_no_exit_degenerate_bs,
    build_standard_interval_bs, load_branching_doc, validate_discrete_bs, validate_interval_bs,
    BranchingSystem, DiscreteBranchingSystem, IntervalBranchingSystem, PiecewiseAffineMap,
};
pub use error::{Error, Result};
pub use g0::{g0_enumerate, g0_evaluate, g0_membership, G0Witness};
pub use graph::{validate_ultragraph, Edge, EdgeId, Ultragraph, VertexId, VertexSet};
pub use ideals::{
    hs_closure, is_essential, is_hereditary_saturated, uniqueness_decomposition,
    uniqueness_report, HsSet, UniquenessReport,
};
pub use paths::{
    composability_graph, condition_l, cycle_exits, enumerate_paths, enumerate_simple_cycles,
    has_no_exits, Cycle, Path,
};
pub use permutative::{
    check_l1_invariants, extreme_vertices, isolated_vertices, peel_sequence,
    permutativity_condition, PeelTrace,
};
pub use rep::{
    discrete_rep_matrix, faithfulness_witness, pf_direct, pf_via_rep, pf_via_rep_seq, rep_apply,
    verify_ck_relations, verify_ck_relations_seeded, verify_ck_relations_seq, CkReport, Generator,
    PfMode,
};
pub use step::StepFunction;
