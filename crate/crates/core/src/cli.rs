//! Command-line front end.
//!
//! Exit codes: 0 when every requested check holds, 1 when one fails,
//! 2 on usage or input errors, 3 when a search or exploration cap is hit.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::casebook::{self, casebook_net, entries, generic_checks, verify_entry};
use crate::invariant::{self, BoundReport};
use crate::net::{Marking, PetriNet};
use crate::pnet::{parse_net, to_pnet};
use crate::predicate::parse_predicate;
use crate::reach::{TransitionGraph, DEFAULT_NODE_LIMIT};
use crate::report::{build_report, join_or_dash, render_tableau};
use crate::semiflow::{self, GeneratingSet};
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "petrinv", version, about = "Place-invariant analysis of Petri nets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    #[value(alias = "text")]
    Tableau,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    MinSupport,
    Hilbert,
    Rational,
}

#[derive(Debug, Args)]
struct NetArgs {
    /// Path to a `.pnet` file, or `casebook:<name>`.
    source: String,
    /// Parameter binding `name=value`; repeatable.
    #[arg(long = "param", value_name = "NAME=INT", value_parser = parse_binding)]
    params: Vec<(String, i64)>,
    /// Overrides the initial marking for the listed places, e.g. `A=3,B=0`.
    #[arg(long, value_name = "PLACE=INT,...")]
    init: Option<String>,
    /// Writes the instantiated net in `.pnet` form.
    #[arg(long, value_name = "PATH")]
    emit_pnet: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Tableau)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Prints a generating set of the non-negative semiflows.
    Semiflows {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long, value_enum, default_value_t = Kind::MinSupport)]
        kind: Kind,
    },
    /// Prints place bounds, structural boundedness and threshold-dead transitions.
    Bounds {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long, value_enum, default_value_t = Kind::MinSupport)]
        kind: Kind,
    },
    /// Builds the reachability graph.
    Rg {
        #[command(flatten)]
        net: NetArgs,
        /// Writes the graph in Graphviz format.
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
        max_states: usize,
    },
    /// Decides whether a predicate is a home space or a marking a home state.
    Home {
        #[command(flatten)]
        net: NetArgs,
        /// Conjunction of linear constraints, e.g. `CLA=2 & CA=2`
        #[arg(long, value_name = "PREDICATE", conflicts_with = "state", required_unless_present = "state")]
        set: Option<String>,
        /// Marking to test as a home state; unlisted places are 0
        #[arg(long, value_name = "PLACE=INT,...")]
        state: Option<String>,
        #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
        max_states: usize,
    },
    /// Classifies transitions as live, quasi-live or dead.
    Live {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
        max_states: usize,
    },
    /// Runs the consistency checks, plus the expected results for casebook nets.
    Verify {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
        max_states: usize,
        /// Seed of the random-walk checks.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Built-in example nets.
    Casebook {
        #[command(subcommand)]
        command: CasebookCommand,
    },
}

#[derive(Debug, Subcommand)]
enum CasebookCommand {
    /// Lists entries with their parameters.
    List {
        #[arg(long, value_enum, default_value_t = Format::Tableau)]
        format: Format,
    },
}

fn parse_binding(s: &str) -> Result<(String, i64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=INT, got `{s}`"))?;
    let value = value
        .trim()
        .parse()
        .map_err(|_| format!("`{value}` is not an integer"))?;
    Ok((name.trim().to_string(), value))
}

/// Parses `P=n,...` into per-place overrides of `base`.
fn parse_assignments(text: &str, net: &PetriNet, base: &Marking) -> Result<Marking, Error> {
    let mut v = base.as_slice().to_vec();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) = parse_binding(part).map_err(Error::Usage)?;
        let p = net
            .place_index(&name)
            .ok_or_else(|| Error::Usage(format!("unknown place `{name}`")))?;
        v[p] = value;
    }
    Ok(Marking::new(v)?)
}

struct Loaded {
    net: PetriNet,
    q0: Marking,
    bindings: BTreeMap<String, i64>,
    casebook: Option<String>,
}

fn load(args: &NetArgs) -> Result<Loaded, Error> {
    let bindings: BTreeMap<String, i64> = args.params.iter().cloned().collect();
    let (net, q0, casebook) = match args.source.strip_prefix("casebook:") {
        Some(name) => {
            let (net, q0) = casebook_net(name, &bindings)?;
            (net, q0, Some(name.to_string()))
        }
        None => {
            let text = std::fs::read_to_string(&args.source).map_err(|source| Error::Io {
                path: args.source.clone(),
                source,
            })?;
            let (net, q0) = parse_net(&text, &bindings)?;
            (net, q0, None)
        }
    };
    let q0 = match &args.init {
        Some(text) => parse_assignments(text, &net, &q0)?,
        None => q0,
    };
    if let Some(path) = &args.emit_pnet {
        std::fs::write(path, to_pnet(&net, &q0)).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(Loaded {
        net,
        q0,
        bindings,
        casebook,
    })
}

fn generating_set(net: &PetriNet, kind: Kind) -> Result<GeneratingSet, Error> {
    Ok(match kind {
        Kind::MinSupport => semiflow::minimal_support_semiflows(net)?,
        Kind::Hilbert => semiflow::hilbert_basis(net)?,
        Kind::Rational => semiflow::rational_kernel_basis(net)?,
    })
}

fn symbolic_names(net: &PetriNet) -> Vec<(String, i64)> {
    net.params().iter().map(|(k, v)| (k.clone(), *v)).collect()
}

fn names(all: &[String], set: &BTreeSet<usize>) -> Vec<String> {
    set.iter().map(|&i| all[i].clone()).collect()
}

fn render_bounds(report: &BoundReport) -> String {
    let mut out = String::new();
    let width = report.places.iter().map(|p| p.place.len() + 4).max().unwrap_or(0);
    for p in &report.places {
        let label = format!("mu({})", p.place);
        match (&p.mu, p.witness) {
            (Some(mu), Some(w)) => {
                let _ = writeln!(out, "{label:<width$} = {mu}  [f{}]", w + 1);
            }
            _ => {
                let _ = writeln!(out, "{label:<width$} = -");
            }
        }
    }
    let _ = writeln!(out, "rho: {}", join_or_dash(&report.rho));
    let _ = writeln!(
        out,
        "structurally bounded places: {}",
        join_or_dash(&report.structurally_bounded_places)
    );
    let _ = writeln!(
        out,
        "structurally bounded: {}",
        if report.net_structurally_bounded { "yes" } else { "no" }
    );
    let dead: Vec<String> = report
        .threshold_dead
        .iter()
        .map(|(t, w)| format!("{t} [f{}]", w + 1))
        .collect();
    let _ = writeln!(out, "threshold-dead: {}", join_or_dash(&dead));
    out
}

fn emit_json(out: &mut dyn Write, value: &serde_json::Value) -> std::io::Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value).expect("JSON values serialize"))
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, Error> {
    let io = |source| Error::Io {
        path: "<stdout>".into(),
        source,
    };
    match cli.command {
        Command::Semiflows { net: args, kind } => {
            let l = load(&args)?;
            let set = generating_set(&l.net, kind)?;
            match args.format {
                Format::Json => emit_json(out, &set.to_json()),
                Format::Tableau => write!(out, "{}", render_tableau(&set, &l.q0, &symbolic_names(&l.net))),
            }
            .map_err(io)?;
            Ok(0)
        }
        Command::Bounds { net: args, kind } => {
            let l = load(&args)?;
            let set = generating_set(&l.net, kind)?;
            let report = invariant::bound_report(&l.net, &set, &l.q0)?;
            match args.format {
                Format::Json => emit_json(out, &serde_json::to_value(&report).expect("serializable")),
                Format::Tableau => write!(out, "{}", render_bounds(&report)),
            }
            .map_err(io)?;
            Ok(0)
        }
        Command::Rg {
            net: args,
            dot,
            max_states,
        } => {
            let l = load(&args)?;
            let graph = TransitionGraph::build(&l.net, std::slice::from_ref(&l.q0), max_states)?;
            if let Some(path) = dot {
                std::fs::write(&path, graph.to_dot()).map_err(|source| Error::Io {
                    path: path.display().to_string(),
                    source,
                })?;
            }
            match args.format {
                Format::Json => emit_json(out, &graph.to_json()),
                Format::Tableau => writeln!(
                    out,
                    "nodes: {}\nedges: {}\ncomplete: {}",
                    graph.node_count(),
                    graph.edges().len(),
                    graph.is_complete()
                ),
            }
            .map_err(io)?;
            Ok(if graph.is_complete() { 0 } else { 3 })
        }
        Command::Home {
            net: args,
            set,
            state,
            max_states,
        } => {
            let l = load(&args)?;
            let graph = TransitionGraph::build(&l.net, std::slice::from_ref(&l.q0), max_states)?;
            let (what, query, verdict) = match (&set, &state) {
                (Some(text), _) => {
                    let pred = parse_predicate(text, l.net.places())?;
                    ("home space", text.clone(), graph.is_home_space(&pred)?)
                }
                (None, Some(text)) => {
                    let q = parse_assignments(text, &l.net, &Marking::zero(l.net.dim()))?;
                    let target: BTreeSet<usize> = graph.node_of_marking(&q).into_iter().collect();
                    ("home state", q.to_string(), graph.is_home_space_nodes(&target)?)
                }
                (None, None) => return Err(Error::Usage("one of --set or --state is required".into())),
            };
            let counterexample = verdict.counterexample.map(|n| graph.node_label(n));
            match args.format {
                Format::Json => emit_json(
                    out,
                    &json!({
                        "schema_version": 1,
                        "net": l.net.name(),
                        "query": what,
                        "target": query,
                        "holds": verdict.holds,
                        "counterexample": counterexample,
                    }),
                ),
                Format::Tableau => {
                    if verdict.holds {
                        writeln!(out, "{what}: yes")
                    } else {
                        writeln!(
                            out,
                            "{what}: no\ncounterexample: {}",
                            counterexample.as_deref().unwrap_or("-")
                        )
                    }
                }
            }
            .map_err(io)?;
            Ok(if verdict.holds { 0 } else { 1 })
        }
        Command::Live { net: args, max_states } => {
            let l = load(&args)?;
            let graph = TransitionGraph::build(&l.net, std::slice::from_ref(&l.q0), max_states)?;
            let live = graph.live_transitions()?;
            let ts = l.net.transitions();
            let all_live = live.live.len() == ts.len();
            match args.format {
                Format::Json => emit_json(
                    out,
                    &json!({
                        "schema_version": 1,
                        "net": l.net.name(),
                        "live": names(ts, &live.live),
                        "quasi_live": names(ts, &live.quasi_live),
                        "dead": names(ts, &live.dead),
                    }),
                ),
                Format::Tableau => {
                    let mut text = format!("live: {}\n", join_or_dash(&names(ts, &live.live)));
                    if !all_live {
                        let _ = writeln!(text, "quasi-live: {}", join_or_dash(&names(ts, &live.quasi_live)));
                        let _ = writeln!(text, "dead: {}", join_or_dash(&names(ts, &live.dead)));
                    }
                    write!(out, "{text}")
                }
            }
            .map_err(io)?;
            Ok(if all_live { 0 } else { 1 })
        }
        Command::Verify {
            net: args,
            max_states,
            seed,
        } => {
            let l = load(&args)?;
            let checks = match (&l.casebook, &args.init) {
                (Some(name), None) => verify_entry(name, &l.bindings, max_states, seed)?,
                _ => generic_checks(&l.net, &l.q0, max_states, seed)?,
            };
            let report = build_report(&l.net, &l.q0, max_states, checks)?;
            match args.format {
                Format::Json => emit_json(out, &serde_json::to_value(&report).expect("serializable")),
                Format::Tableau => write!(out, "{}", report.render_text()),
            }
            .map_err(io)?;
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Casebook {
            command: CasebookCommand::List { format },
        } => {
            match format {
                Format::Json => emit_json(
                    out,
                    &json!({ "schema_version": 1, "entries": casebook::entries() }),
                ),
                Format::Tableau => {
                    let mut text = String::new();
                    for e in entries() {
                        let params: Vec<String> = e
                            .params
                            .iter()
                            .map(|p| format!("{}={} (min {})", p.name, p.default, p.min))
                            .collect();
                        let _ = writeln!(text, "{:<10} {:<34} {}", e.name, join_or_dash(&params), e.description);
                    }
                    write!(out, "{text}")
                }
            }
            .map_err(io)?;
            Ok(0)
        }
    }
}

/// Runs the command line `argv` (including the program name), writing the
/// report to `out` and diagnostics to `err`. Returns the exit code.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
