//! `ugkit`: decide combinatorial properties of ultragraphs, construct
//! branching systems, and verify the induced operator identities.
//!
//! Every command prints a canonical JSON report (sorted keys, fixed
//! indentation) so identical inputs produce byte-identical output. Exit
//! codes: 0 on success, 1 when a checked property fails, 2 on usage or
//! document errors.

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use ugkit_core::branching::{
    assemble_map, build_no_exit_degenerate_bs, build_standard_interval_bs, load_branching_doc,
    validate_discrete_bs, validate_interval_bs, BranchingSystem,
};
use ugkit_core::graph::Ultragraph;
use ugkit_core::jsonout;
use ugkit_core::paths::Cycle;
use ugkit_core::rep::{
    faithfulness_witness, pf_direct, pf_via_rep, verify_ck_relations_seeded, PfMode, DEFAULT_SEED,
};
use ugkit_core::step::StepFunction;

#[derive(Parser)]
#[command(name = "ugkit", version, about = "Ultragraph toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the command's file artifact: the system document for
    /// `branching`, a copy of the report otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a graph document.
    Validate { graph: PathBuf },
    /// Decide membership of a vertex set in the generalized-vertex family.
    G0 {
        graph: PathBuf,
        /// Set literal, e.g. `v1,v2+tail:3`.
        #[arg(long)]
        set: String,
    },
    /// Enumerate simple cycles and their exits.
    Cycles { graph: PathBuf },
    /// Check that every cycle has an exit.
    #[command(name = "condition-l")]
    ConditionL { graph: PathBuf },
    /// Smallest hereditary and saturated superset of the given vertices.
    Closure {
        graph: PathBuf,
        #[arg(long)]
        vertices: String,
    },
    /// Essentiality of the ideal generated by the closure of the vertices.
    Essential {
        graph: PathBuf,
        #[arg(long)]
        vertices: String,
    },
    /// Condition (L), the no-exit cycle decomposition and the injectivity
    /// obligations.
    Uniqueness { graph: PathBuf },
    /// Build the standard interval branching system (or the degenerate one
    /// for a no-exit cycle) and validate it.
    Branching {
        graph: PathBuf,
        /// Comma-separated edges of a simple no-exit cycle.
        #[arg(long, value_name = "EDGELIST")]
        degenerate_cycle: Option<String>,
    },
    /// Verify the four defining relations on a branching-system document.
    #[command(name = "ck-check")]
    CkCheck {
        system: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Apply the transfer operator to a step function; `--compare` also
    /// evaluates it through the representation and reports the gap.
    Pf {
        system: PathBuf,
        #[arg(long = "fn", value_name = "FILE")]
        function: PathBuf,
        #[arg(long)]
        compare: bool,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Search for an orbit-separating set for a no-exit cycle of a discrete
    /// system.
    Faithful {
        system: PathBuf,
        /// Comma-separated cycle edges.
        #[arg(long)]
        cycle: String,
        /// Comma-separated powers to separate.
        #[arg(long)]
        fset: String,
    },
    /// Run the extreme-vertex peeling and print the trace.
    Peel { graph: PathBuf },
    /// Check the permutativity condition.
    Permutative { graph: PathBuf },
}

struct Outcome {
    command: &'static str,
    inputs: BTreeMap<String, String>,
    result: Value,
    ok: bool,
    /// Text written to `--out` instead of the report, when a command
    /// produces a document of its own.
    file_payload: Option<String>,
}

impl Outcome {
    fn new(command: &'static str, inputs: BTreeMap<String, String>, result: Value, ok: bool) -> Self {
        Outcome {
            command,
            inputs,
            result,
            ok,
            file_payload: None,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(outcome) => {
            let report = jsonout::report(
                outcome.command,
                json!(outcome.inputs),
                if outcome.ok { "ok" } else { "fail" },
                outcome.result,
            );
            let text = jsonout::to_canonical_string(&report);
            print!("{text}");
            if let Some(path) = &cli.out {
                let payload = outcome.file_payload.as_ref().unwrap_or(&text);
                if let Err(err) = std::fs::write(path, payload) {
                    eprintln!("error: cannot write {}: {err}", path.display());
                    return ExitCode::from(2);
                }
            }
            if outcome.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(command: &Command) -> Result<Outcome, String> {
    match command {
        Command::Validate { graph } => {
            let (g, inputs) = load_graph(graph)?;
            Ok(Outcome::new(
                "validate",
                inputs,
                json!({
                    "vertices": g.explicit_vertices().len(),
                    "edges": g.edges().len(),
                    "tail": g.tail(),
                }),
                true,
            ))
        }
        Command::G0 { graph, set } => {
            let (g, inputs) = load_graph(graph)?;
            let target = g.parse_vertex_set(set).map_err(|e| e.to_string())?;
            let witness = ugkit_core::g0_membership(&g, &target);
            let ok = witness.is_some();
            Ok(Outcome::new(
                "g0",
                inputs,
                jsonout::g0_membership(&g, &target, &witness),
                ok,
            ))
        }
        Command::Cycles { graph } => {
            let (g, inputs) = load_graph(graph)?;
            let cycles = ugkit_core::enumerate_simple_cycles(&g);
            let mut items = Vec::new();
            for c in &cycles {
                let exits = ugkit_core::cycle_exits(&g, c).map_err(|e| e.to_string())?;
                items.push(json!({
                    "cycle": jsonout::cycle(c),
                    "exits": jsonout::exits(&g, &exits),
                }));
            }
            Ok(Outcome::new(
                "cycles",
                inputs,
                json!({"count": cycles.len(), "cycles": items}),
                true,
            ))
        }
        Command::ConditionL { graph } => {
            let (g, inputs) = load_graph(graph)?;
            let report = ugkit_core::condition_l(&g);
            Ok(Outcome::new(
                "condition-l",
                inputs,
                jsonout::condition_l(&report),
                report.holds,
            ))
        }
        Command::Closure { graph, vertices } => {
            let (g, inputs) = load_graph(graph)?;
            let seed = parse_vertices(&g, vertices)?;
            let sh = ugkit_core::hs_closure(&g, &seed).map_err(|e| e.to_string())?;
            Ok(Outcome::new(
                "closure",
                inputs,
                json!({"closure": jsonout::hs_set(&g, &sh)}),
                true,
            ))
        }
        Command::Essential { graph, vertices } => {
            let (g, inputs) = load_graph(graph)?;
            let seed = parse_vertices(&g, vertices)?;
            let sh = ugkit_core::hs_closure(&g, &seed).map_err(|e| e.to_string())?;
            let report = ugkit_core::is_essential(&g, &sh);
            let ok = report.essential;
            Ok(Outcome::new(
                "essential",
                inputs,
                json!({
                    "closure": jsonout::hs_set(&g, &sh),
                    "essential": jsonout::essential(&g, &report),
                }),
                ok,
            ))
        }
        Command::Uniqueness { graph } => {
            let (g, inputs) = load_graph(graph)?;
            let report = ugkit_core::uniqueness_report(&g).map_err(|e| e.to_string())?;
            Ok(Outcome::new(
                "uniqueness",
                inputs,
                jsonout::uniqueness(&g, &report),
                true,
            ))
        }
        Command::Branching {
            graph,
            degenerate_cycle,
        } => {
            let (g, inputs) = load_graph(graph)?;
            let bs = match degenerate_cycle {
                None => build_standard_interval_bs(&g),
                Some(list) => {
                    let edges: Vec<String> = split_list(list);
                    let cycle = Cycle::new(&g, edges).map_err(|e| e.to_string())?;
                    build_no_exit_degenerate_bs(&g, &cycle).map_err(|e| e.to_string())?
                }
            };
            let report = validate_interval_bs(&bs).map_err(|e| e.to_string())?;
            let ok = report.pass;
            let doc = serde_json::to_value(bs.to_doc()).map_err(|e| e.to_string())?;
            let mut outcome = Outcome::new(
                "branching",
                inputs,
                json!({
                    "validation": report,
                    "system": doc.clone(),
                }),
                ok,
            );
            outcome.file_payload = Some(jsonout::to_canonical_string(&doc));
            Ok(outcome)
        }
        Command::CkCheck { system, tol } => {
            let (sys, inputs) = load_system(system)?;
            let seed = seed_from_env()?;
            let report = verify_ck_relations_seeded(&sys, *tol, seed).map_err(|e| e.to_string())?;
            let validation = match &sys {
                BranchingSystem::Interval(bs) => validate_interval_bs(bs),
                BranchingSystem::Discrete(dbs) => validate_discrete_bs(dbs),
            }
            .map_err(|e| e.to_string())?;
            let ok = report.pass && validation.pass;
            Ok(Outcome::new(
                "ck-check",
                inputs,
                json!({"relations": report, "validation": validation}),
                ok,
            ))
        }
        Command::Pf {
            system,
            function,
            compare,
            tol,
        } => {
            let (sys, mut inputs) = load_system(system)?;
            let BranchingSystem::Interval(bs) = sys else {
                return Err("the transfer operator needs an interval system".into());
            };
            let text = read_file(function)?;
            inputs.insert(function.display().to_string(), digest(&text));
            let phi = StepFunction::from_json(&text).map_err(|e| e.to_string())?;
            let via = pf_via_rep(&bs, &phi, PfMode::General).map_err(|e| e.to_string())?;
            let mut result = json!({"transfer": via.to_doc()});
            let mut ok = true;
            if *compare {
                let map = assemble_map(&bs).map_err(|e| e.to_string())?;
                let direct = pf_direct(&map, &phi);
                let gap = via.l1_distance(&direct);
                ok = gap <= *tol;
                result["compare"] = json!({"max_l1_gap": gap, "tolerance": tol});
            }
            Ok(Outcome::new("pf", inputs, result, ok))
        }
        Command::Faithful {
            system,
            cycle,
            fset,
        } => {
            let (sys, inputs) = load_system(system)?;
            let BranchingSystem::Discrete(dbs) = sys else {
                return Err("the separation search needs a discrete system".into());
            };
            let edges = split_list(cycle);
            let cycle = Cycle::new(dbs.graph(), edges).map_err(|e| e.to_string())?;
            let powers: BTreeSet<u32> = split_list(fset)
                .iter()
                .map(|s| s.parse::<u32>().map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            let outcome =
                faithfulness_witness(&dbs, &cycle, &powers).map_err(|e| e.to_string())?;
            let ok = outcome.witness.is_some();
            Ok(Outcome::new(
                "faithful",
                inputs,
                json!({
                    "witness": outcome.witness,
                    "orbit_bound": outcome.orbit_bound,
                }),
                ok,
            ))
        }
        Command::Peel { graph } => {
            let (g, inputs) = load_graph(graph)?;
            let trace = ugkit_core::peel_sequence(&g).map_err(|e| e.to_string())?;
            Ok(Outcome::new(
                "peel",
                inputs,
                jsonout::peel_trace(&g, &trace),
                true,
            ))
        }
        Command::Permutative { graph } => {
            let (g, inputs) = load_graph(graph)?;
            let report = ugkit_core::permutativity_condition(&g).map_err(|e| e.to_string())?;
            let ok = report.holds;
            Ok(Outcome::new(
                "permutative",
                inputs,
                serde_json::to_value(&report).map_err(|e| e.to_string())?,
                ok,
            ))
        }
    }
}

fn read_file(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|err| format!("cannot read {}: {err}", path.display()))
}

fn digest(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let bytes = hasher.finalize();
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn load_graph(path: &Path) -> Result<(Ultragraph, BTreeMap<String, String>), String> {
    let text = read_file(path)?;
    let g = Ultragraph::from_json(&text).map_err(|e| e.to_string())?;
    Ok((
        g,
        BTreeMap::from([(path.display().to_string(), digest(&text))]),
    ))
}

fn load_system(path: &Path) -> Result<(BranchingSystem, BTreeMap<String, String>), String> {
    let text = read_file(path)?;
    let sys = load_branching_doc(&text).map_err(|e| e.to_string())?;
    Ok((
        sys,
        BTreeMap::from([(path.display().to_string(), digest(&text))]),
    ))
}

fn split_list(list: &str) -> Vec<String> {
    list.split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn parse_vertices(
    g: &Ultragraph,
    list: &str,
) -> Result<BTreeSet<ugkit_core::VertexId>, String> {
    split_list(list)
        .iter()
        .map(|name| g.parse_vertex_name(name).map_err(|e| e.to_string()))
        .collect()
}

fn seed_from_env() -> Result<u64, String> {
    match std::env::var("UGKIT_SEED") {
        Ok(text) => text
            .trim()
            .parse::<u64>()
            .map_err(|_| format!("UGKIT_SEED must be an unsigned integer, got `{text}`")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}
