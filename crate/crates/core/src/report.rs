//! Tableau rendering and the aggregate analysis report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::casebook::CheckResult;
use crate::invariant::{self, BoundReport};
use crate::net::{Marking, PetriNet};
use crate::reach::TransitionGraph;
use crate::semiflow::{self, GeneratingSet};
use crate::Error;

/// Renders one row per member and one column per place, followed by the
/// invariant value `eᵀq0`. A value equal to one of `symbolic` is printed
/// by name (first match wins).
pub fn render_tableau(set: &GeneratingSet, q0: &Marking, symbolic: &[(String, i64)]) -> String {
    let labels: Vec<String> = (1..=set.len()).map(|i| format!("f{i}")).collect();
    let label_width = labels.iter().map(String::len).max().unwrap_or(2);
    let widths: Vec<usize> = set
        .places()
        .iter()
        .enumerate()
        .map(|(p, name)| {
            set.members()
                .iter()
                .map(|m| m.coords()[p].to_string().len())
                .chain(std::iter::once(name.len()))
                .max()
                .unwrap_or(1)
        })
        .collect();

    let mut out = String::new();
    let _ = write!(out, "{:label_width$}", "");
    for (name, w) in set.places().iter().zip(&widths) {
        let _ = write!(out, " {name:>w$}");
    }
    out.push_str(" | value\n");

    for (label, member) in labels.iter().zip(set.members()) {
        let _ = write!(out, "{label:<label_width$}");
        for (v, w) in member.coords().iter().zip(&widths) {
            let _ = write!(out, " {v:>w$}");
        }
        let value = invariant::invariant_value(member, q0)
            .map(|v| {
                symbolic
                    .iter()
                    .find(|(_, s)| v == (*s).into())
                    .map(|(name, _)| name.clone())
                    .unwrap_or_else(|| v.to_string())
            })
            .unwrap_or_else(|_| "?".into());
        let _ = writeln!(out, " | {value}");
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub complete: bool,
    pub components: usize,
    pub bottom_components: usize,
    pub sinks: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LivenessReport {
    pub live: Vec<String>,
    pub quasi_live: Vec<String>,
    pub dead: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub net: String,
    pub params: BTreeMap<String, i64>,
    pub places: Vec<String>,
    pub initial_marking: Marking,
    pub minimal_supports: serde_json::Value,
    pub minimal_semiflows: serde_json::Value,
    pub tableau: String,
    pub bounds: BoundReport,
    pub graph: GraphStats,
    pub liveness: Option<LivenessReport>,
    pub initial_is_home_state: Option<bool>,
    pub checks: Vec<CheckResult>,
}

impl AnalysisReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(out, "net {} [{}]", self.net, params.join(", "));
        let _ = writeln!(out, "minimal-support semiflows:");
        out.push_str(&self.tableau);
        let _ = writeln!(
            out,
            "graph: {} nodes, {} edges, {} components ({} bottom), {} sinks{}",
            self.graph.nodes,
            self.graph.edges,
            self.graph.components,
            self.graph.bottom_components,
            self.graph.sinks,
            if self.graph.complete { "" } else { " [incomplete]" }
        );
        if let Some(l) = &self.liveness {
            let _ = writeln!(out, "live: {}", join_or_dash(&l.live));
        }
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            if c.evidence.is_empty() {
                let _ = writeln!(out, "[{status}] {}", c.name);
            } else {
                let _ = writeln!(out, "[{status}] {} ({})", c.name, c.evidence);
            }
        }
        out
    }
}

pub(crate) fn join_or_dash(items: &[String]) -> String {
    if items.is_empty() {
        "-".into()
    } else {
        items.join(",")
    }
}

/// Builds the full report. Graph-dependent sections are left empty when
/// the exploration hits `limit`.
pub fn build_report(
    net: &PetriNet,
    q0: &Marking,
    limit: usize,
    checks: Vec<CheckResult>,
) -> Result<AnalysisReport, Error> {
    let ms = semiflow::minimal_support_semiflows(net)?;
    let hb = semiflow::hilbert_basis(net)?;
    let symbolic: Vec<(String, i64)> = net.params().iter().map(|(k, v)| (k.clone(), *v)).collect();
    let bounds = invariant::bound_report(net, &ms, q0)?;
    let graph = TransitionGraph::build(net, std::slice::from_ref(q0), limit)?;
    let names = |set: &std::collections::BTreeSet<usize>| -> Vec<String> {
        set.iter().map(|&t| net.transitions()[t].clone()).collect()
    };
    let (stats, liveness, home) = if graph.is_complete() {
        let sccs = graph.scc_decomposition()?;
        let live = graph.live_transitions()?;
        (
            GraphStats {
                nodes: graph.node_count(),
                edges: graph.edges().len(),
                complete: true,
                components: sccs.len(),
                bottom_components: sccs.iter().filter(|c| c.bottom).count(),
                sinks: graph.sinks()?.len(),
            },
            Some(LivenessReport {
                live: names(&live.live),
                quasi_live: names(&live.quasi_live),
                dead: names(&live.dead),
            }),
            Some(graph.is_home_state(graph.init()[0])?),
        )
    } else {
        (
            GraphStats {
                nodes: graph.node_count(),
                edges: graph.edges().len(),
                complete: false,
                components: 0,
                bottom_components: 0,
                sinks: 0,
            },
            None,
            None,
        )
    };
    Ok(AnalysisReport {
        schema_version: 1,
        net: net.name().to_string(),
        params: net.params().clone(),
        places: net.places().to_vec(),
        initial_marking: q0.clone(),
        tableau: render_tableau(&ms, q0, &symbolic),
        minimal_supports: ms.to_json(),
        minimal_semiflows: hb.to_json(),
        bounds,
        graph: stats,
        liveness,
        initial_is_home_state: home,
        checks,
    })
}
