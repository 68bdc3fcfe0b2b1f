//! Built-in parameterized nets and the claims each one is expected to
//! satisfy at any valid binding.
//!
//! * `tn`: two places, weights depending on `k`; live iff
//!   `a + k*b > k` and `a + k*b` is not a multiple of `k`.
//! * `tel`: caller/callee telephony model with `x` callers and `y` callees.
//! * `tel2`: `tel` plus a callee wait place `WA`, which adds a fourth
//!   minimal semiflow and tightens the bound on `CA`.
//! * `twocycles`: a root with two terminal 2-cycles, where two home spaces
//!   have an intersection that is not a home space.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::invariant::{self, InvariantError};
use crate::net::{Marking, NetError, PetriNet};
use crate::predicate::{parse_predicate, PredicateError};
use crate::reach::{GraphError, TransitionGraph};
use crate::semiflow::{self, SemiflowError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CasebookError {
    #[error("unknown casebook entry `{0}`")]
    UnknownEntry(String),
    #[error("`{entry}` has no parameter `{param}`")]
    UnknownParameter { entry: String, param: String },
    #[error("parameter `{param}` = {value} is below its minimum {min}")]
    InvalidBinding { param: String, value: i64, min: i64 },
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Semiflow(#[from] SemiflowError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Predicate(#[from] PredicateError),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: i64,
    pub min: i64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CasebookEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub params: &'static [ParamSpec],
}

const ENTRIES: &[CasebookEntry] = &[
    CasebookEntry {
        name: "tn",
        description: "tiny net TN(k); initial marking A=a, B=b",
        params: &[
            ParamSpec { name: "k", default: 2, min: 1 },
            ParamSpec { name: "a", default: 3, min: 0 },
            ParamSpec { name: "b", default: 0, min: 0 },
        ],
    },
    CasebookEntry {
        name: "tel",
        description: "telephony model TEL(x,y): x callers, y callees",
        params: &[
            ParamSpec { name: "x", default: 2, min: 1 },
            ParamSpec { name: "y", default: 1, min: 1 },
        ],
    },
    CasebookEntry {
        name: "tel2",
        description: "TEL2(x,y): TEL with callee wait place WA",
        params: &[
            ParamSpec { name: "x", default: 2, min: 1 },
            ParamSpec { name: "y", default: 1, min: 1 },
        ],
    },
    CasebookEntry {
        name: "twocycles",
        description: "root with two terminal 2-cycles; home spaces whose intersection is not one",
        params: &[],
    },
];

pub fn entries() -> &'static [CasebookEntry] {
    ENTRIES
}

pub fn entry(name: &str) -> Result<&'static CasebookEntry, CasebookError> {
    ENTRIES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| CasebookError::UnknownEntry(name.to_string()))
}

/// Fills in defaults and validates bindings against the entry's schema.
pub fn resolve_bindings(
    entry: &CasebookEntry,
    bindings: &BTreeMap<String, i64>,
) -> Result<BTreeMap<String, i64>, CasebookError> {
    for key in bindings.keys() {
        if !entry.params.iter().any(|p| p.name == key) {
            return Err(CasebookError::UnknownParameter {
                entry: entry.name.to_string(),
                param: key.clone(),
            });
        }
    }
    entry
        .params
        .iter()
        .map(|p| {
            let value = bindings.get(p.name).copied().unwrap_or(p.default);
            if value < p.min {
                return Err(CasebookError::InvalidBinding {
                    param: p.name.to_string(),
                    value,
                    min: p.min,
                });
            }
            Ok((p.name.to_string(), value))
        })
        .collect()
}

pub const TEL_PLACES: [&str; 9] = ["LA", "CLA", "WLA", "A", "CA", "PU", "S", "F", "R"];

/// `(transition, inputs, outputs)`; all weights 1.
const TEL_ARCS: [(&str, &[&str], &[&str]); 9] = [
    ("t1", &["LA"], &["PU"]),
    ("t2", &["S"], &["CLA"]),
    ("t3", &["CLA", "F"], &["LA", "R"]),
    ("t4", &["CLA"], &["WLA", "R"]),
    ("t5", &["S"], &["WLA", "R"]),
    ("t6", &["WLA", "F"], &["LA"]),
    ("t7", &["A", "PU"], &["CA", "S"]),
    ("t8", &["CA"], &["F"]),
    ("t9", &["R"], &["A"]),
];

fn tn(k: i64, a: i64, b: i64) -> Result<(PetriNet, Marking), NetError> {
    PetriNet::builder("TN")
        .param("k", k)
        .param("a", a)
        .param("b", b)
        .place("A", a)
        .place("B", b)
        .transition("t1", &[("A", k)], &[("B", 1)])
        .transition("t2", &[("A", 1), ("B", 1)], &[("A", k + 1)])
        .build()
}

fn tel(x: i64, y: i64, with_wait: bool) -> Result<(PetriNet, Marking), NetError> {
    let mut builder = PetriNet::builder(if with_wait { "TEL2" } else { "TEL" })
        .param("x", x)
        .param("y", y);
    for p in TEL_PLACES {
        let init = match p {
            "LA" => x,
            "A" => y,
            _ => 0,
        };
        builder = builder.place(p, init);
    }
    if with_wait {
        builder = builder.place("WA", 0);
    }
    for (t, inputs, outputs) in TEL_ARCS {
        let mut input: Vec<(&str, i64)> = inputs.iter().map(|&p| (p, 1)).collect();
        let mut output: Vec<(&str, i64)> = outputs.iter().map(|&p| (p, 1)).collect();
        if with_wait && t == "t8" {
            output.push(("WA", 1));
        }
        if with_wait && t == "t9" {
            input.push(("WA", 1));
        }
        builder = builder.transition(t, &input, &output);
    }
    builder.build()
}

pub const TWOCYCLES_PLACES: [&str; 5] = ["r", "a1", "a2", "b1", "b2"];
const TWOCYCLES_ARCS: [(&str, &str, &str); 6] = [
    ("ta", "r", "a1"),
    ("tb", "r", "b1"),
    ("a12", "a1", "a2"),
    ("a21", "a2", "a1"),
    ("b12", "b1", "b2"),
    ("b21", "b2", "b1"),
];

fn twocycles() -> Result<(PetriNet, Marking), NetError> {
    let mut builder = PetriNet::builder("twocycles");
    for p in TWOCYCLES_PLACES {
        builder = builder.place(p, i64::from(p == "r"));
    }
    for (t, from, to) in TWOCYCLES_ARCS {
        builder = builder.transition(t, &[(from, 1)], &[(to, 1)]);
    }
    builder.build()
}

/// The `twocycles` reachability graph built by hand over named states.
pub fn twocycles_graph() -> TransitionGraph {
    let labels: Vec<&str> = TWOCYCLES_ARCS.iter().map(|(t, _, _)| *t).collect();
    let edges: Vec<(&str, &str, &str)> = TWOCYCLES_ARCS.iter().map(|&(t, s, d)| (s, t, d)).collect();
    TransitionGraph::from_edges("twocycles", &labels, &TWOCYCLES_PLACES, &edges, &["r"])
        .expect("fixture is well formed")
}

/// Two home spaces of `twocycles`; their conjunction is not a home space.
pub const TWOCYCLES_HS1: &str = "a1+b1=1";
pub const TWOCYCLES_HS2: &str = "a1+b2=1";

pub fn casebook_net(name: &str, bindings: &BTreeMap<String, i64>) -> Result<(PetriNet, Marking), CasebookError> {
    let entry = entry(name)?;
    let b = resolve_bindings(entry, bindings)?;
    let built = match name {
        "tn" => tn(b["k"], b["a"], b["b"]),
        "tel" => tel(b["x"], b["y"], false),
        "tel2" => tel(b["x"], b["y"], true),
        "twocycles" => twocycles(),
        _ => unreachable!("entry lookup succeeded"),
    }?;
    Ok(built)
}

/// Closed-form liveness of TN(k) from `A=a, B=b`.
pub fn tn_live_predicate(k: i64, a: i64, b: i64) -> bool {
    let g = a + k * b;
    g > k && g % k != 0
}

fn unit_semiflow(places: &[String], support: &[&str]) -> Vec<i64> {
    places.iter().map(|p| i64::from(support.contains(&p.as_str()))).collect()
}

/// The three TEL semiflows in the place order of `net` (TEL or TEL2).
pub fn tel_semiflows(net: &PetriNet) -> [Vec<i64>; 3] {
    let ps = net.places();
    [
        unit_semiflow(ps, &["LA", "CLA", "WLA", "PU", "S"]),
        unit_semiflow(ps, &["LA", "PU", "F", "CA"]),
        unit_semiflow(ps, &["CLA", "S", "R", "A"]),
    ]
}

/// The fourth TEL2 semiflow.
pub fn tel2_f4(net: &PetriNet) -> Vec<i64> {
    unit_semiflow(net.places(), &["A", "CA", "WA"])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub evidence: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, passed: bool, evidence: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            passed,
            evidence: evidence.into(),
        }
    }
}

fn fmt_set(net_names: &[String], set: &BTreeSet<usize>) -> String {
    let names: Vec<&str> = set.iter().map(|&i| net_names[i].as_str()).collect();
    if names.is_empty() {
        "-".into()
    } else {
        names.join(",")
    }
}

fn coords_set(set: &semiflow::GeneratingSet) -> BTreeSet<Vec<i64>> {
    set.members().iter().map(|m| m.coords().to_vec()).collect()
}

/// Checks that hold for any net with a finite reachability graph: the
/// invariants along the graph and a seeded random walk, bound soundness,
/// threshold deadness against the graph, and the agreement between the
/// home-state and liveness characterizations.
pub fn generic_checks(
    net: &PetriNet,
    q0: &Marking,
    limit: usize,
    seed: u64,
) -> Result<Vec<CheckResult>, CasebookError> {
    let mut out = Vec::new();
    let ms = semiflow::minimal_support_semiflows(net)?;
    let hb = semiflow::hilbert_basis(net)?;
    let graph = TransitionGraph::build(net, std::slice::from_ref(q0), limit)?;
    if !graph.is_complete() {
        return Err(GraphError::Incomplete.into());
    }

    let members_ok = ms
        .members()
        .iter()
        .chain(hb.members())
        .all(|m| m.is_non_negative() && semiflow::verify_semiflow(net, m.coords()).unwrap_or(false));
    out.push(CheckResult::new(
        "generating sets verify",
        members_ok,
        format!("{} minimal-support, {} minimal semiflows", ms.len(), hb.len()),
    ));

    let sys = invariant::iota(&hb, q0)?;
    let violating = graph
        .nodes()
        .iter()
        .position(|s| s.marking().is_some_and(|q| !sys.contains(q)));
    out.push(CheckResult::new(
        "invariants hold on every reachable marking",
        violating.is_none(),
        match violating {
            Some(i) => format!("violated at {}", graph.node_label(i)),
            None => format!("{} markings checked", graph.node_count()),
        },
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = q0.clone();
    let mut walk_ok = true;
    let mut steps = 0;
    for _ in 0..1000 {
        let enabled: Vec<usize> = (0..net.transitions().len())
            .filter(|&t| net.enabled(&q, t).unwrap_or(false))
            .collect();
        if enabled.is_empty() {
            break;
        }
        q = net.fire(&q, enabled[rng.gen_range(0..enabled.len())])?;
        steps += 1;
        if !sys.contains(&q) {
            walk_ok = false;
            break;
        }
    }
    out.push(CheckResult::new(
        "invariants hold along a random walk",
        walk_ok,
        format!("seed {seed}, {steps} steps"),
    ));

    let same_iota = invariant::iota(&ms, q0)?.same_affine_set(&sys);
    let same_rho = invariant::rho(&ms) == invariant::rho(&hb);
    let mut mu_equal = true;
    let mut mu_sound = true;
    for p in invariant::rho(&hb) {
        let a = invariant::mu_bound(&ms, p, q0)?;
        let b = invariant::mu_bound(&hb, p, q0)?;
        mu_equal &= a.bound == b.bound;
        mu_sound &= graph
            .nodes()
            .iter()
            .filter_map(|s| s.marking())
            .all(|q| BigInt::from(q.get(p)) <= b.floor);
    }
    out.push(CheckResult::new(
        "iota, mu and rho agree across generating sets",
        same_iota && same_rho && mu_equal,
        format!("iota {same_iota}, rho {same_rho}, mu {mu_equal}"),
    ));
    out.push(CheckResult::new("mu bounds every reachable marking", mu_sound, ""));

    let dead = invariant::threshold_dead_transitions(net, &hb, q0)?;
    let labels = graph.edge_labels();
    let dead_ok = dead.iter().all(|d| !labels.contains(&d.transition));
    out.push(CheckResult::new(
        "threshold-dead transitions never fire",
        dead_ok,
        fmt_set(net.transitions(), &dead.iter().map(|d| d.transition).collect()),
    ));

    let home = graph.is_home_state(graph.init()[0])?;
    let all_home = graph.home_states()?.len() == graph.node_count();
    let connected = graph.is_strongly_connected()?;
    out.push(CheckResult::new(
        "home state, all-home and strong connectivity agree",
        home == all_home && all_home == connected,
        format!("home state {home}, every node home {all_home}, strongly connected {connected}"),
    ));

    let live = graph.live_transitions()?;
    let fast_ok = match graph.live_transitions_fast()? {
        Some(fast) => fast == live.live,
        None => true,
    };
    out.push(CheckResult::new(
        "edge-label liveness agrees with domain home spaces",
        fast_ok,
        format!("live {}", fmt_set(net.transitions(), &live.live)),
    ));
    Ok(out)
}

/// Runs every expected claim of a casebook entry at the given bindings.
pub fn verify_entry(
    name: &str,
    bindings: &BTreeMap<String, i64>,
    limit: usize,
    seed: u64,
) -> Result<Vec<CheckResult>, CasebookError> {
    let b = resolve_bindings(entry(name)?, bindings)?;
    let (net, q0) = casebook_net(name, &b)?;
    let mut out = Vec::new();

    let text = crate::pnet::to_pnet(&net, &q0);
    let round_trip = crate::pnet::parse_net(&text, &BTreeMap::new())
        .map(|(n, q)| n == net && q == q0)
        .unwrap_or(false);
    out.push(CheckResult::new("pnet round trip", round_trip, ""));

    match name {
        "tn" => tn_checks(&net, &q0, &b, limit, &mut out)?,
        "tel" | "tel2" => tel_checks(&net, &q0, &b, name == "tel2", limit, &mut out)?,
        "twocycles" => twocycles_checks(&net, &q0, limit, &mut out)?,
        _ => unreachable!(),
    }
    out.extend(generic_checks(&net, &q0, limit, seed)?);
    Ok(out)
}

fn tn_checks(
    net: &PetriNet,
    q0: &Marking,
    b: &BTreeMap<String, i64>,
    limit: usize,
    out: &mut Vec<CheckResult>,
) -> Result<(), CasebookError> {
    let (k, a, bb) = (b["k"], b["a"], b["b"]);
    let g = vec![1, k];
    let ms = coords_set(&semiflow::minimal_support_semiflows(net)?);
    let hb = coords_set(&semiflow::hilbert_basis(net)?);
    let expected: BTreeSet<Vec<i64>> = [g.clone()].into();
    out.push(CheckResult::new(
        "unique minimal semiflow g = (1,k)",
        ms == expected && hb == expected,
        format!("{ms:?}"),
    ));
    let graph = TransitionGraph::build(net, std::slice::from_ref(q0), limit)?;
    let live = graph.live_transitions()?;
    let all_live = live.live.len() == net.transitions().len();
    let predicted = tn_live_predicate(k, a, bb);
    out.push(CheckResult::new(
        "live iff gᵀq0 > k and not a multiple of k",
        all_live == predicted,
        format!("gᵀq0 = {}, graph says all-live = {all_live}", a + k * bb),
    ));
    if k == 1 {
        out.push(CheckResult::new(
            "k = 1 has no live transition",
            live.live.is_empty(),
            fmt_set(net.transitions(), &live.live),
        ));
    }
    if a + k * bb < k {
        let hbset = semiflow::hilbert_basis(net)?;
        let dead = invariant::threshold_dead_transitions(net, &hbset, q0)?;
        out.push(CheckResult::new(
            "below threshold k both transitions are dead",
            dead.len() == 2 && graph.edges().is_empty(),
            format!("{} threshold-dead, {} edges", dead.len(), graph.edges().len()),
        ));
    }
    Ok(())
}

fn tel_checks(
    net: &PetriNet,
    q0: &Marking,
    b: &BTreeMap<String, i64>,
    with_wait: bool,
    limit: usize,
    out: &mut Vec<CheckResult>,
) -> Result<(), CasebookError> {
    let (x, y) = (b["x"], b["y"]);
    let min = x.min(y);
    let [f1, f2, f3] = tel_semiflows(net);
    let mut expected: BTreeSet<Vec<i64>> = [f1.clone(), f2.clone(), f3.clone()].into();
    if with_wait {
        expected.insert(tel2_f4(net));
    }
    let ms_set = semiflow::minimal_support_semiflows(net)?;
    let ms = coords_set(&ms_set);
    out.push(CheckResult::new(
        "minimal-support semiflows match f1..f3 (and f4 for tel2)",
        ms == expected,
        format!("{} members", ms.len()),
    ));

    let values: Vec<BigInt> = [&f1, &f2, &f3]
        .iter()
        .map(|f| invariant::invariant_value(&semiflow::Semiflow::new(f.to_vec()), q0))
        .collect::<Result<_, _>>()?;
    out.push(CheckResult::new(
        "invariant values (x, x, y)",
        values == [BigInt::from(x), BigInt::from(x), BigInt::from(y)],
        format!("{values:?}"),
    ));

    let place = |n: &str| net.place_index(n).expect("TEL place");
    let mu_cla = invariant::mu_bound(&ms_set, place("CLA"), q0)?;
    let mu_ca = invariant::mu_bound(&ms_set, place("CA"), q0)?;
    let expected_ca = if with_wait { min } else { x };
    out.push(CheckResult::new(
        "mu(CLA) = min(x,y)",
        mu_cla.bound == BigRational::from_integer(min.into()),
        mu_cla.bound.to_string(),
    ));
    out.push(CheckResult::new(
        if with_wait { "mu(CA) = min(x,y)" } else { "mu(CA) = x" },
        mu_ca.bound == BigRational::from_integer(expected_ca.into()),
        mu_ca.bound.to_string(),
    ));

    let graph = TransitionGraph::build(net, std::slice::from_ref(q0), limit)?;
    let max_ca = graph
        .nodes()
        .iter()
        .filter_map(|s| s.marking())
        .map(|q| q.get(place("CA")))
        .max()
        .unwrap_or(0);
    out.push(CheckResult::new(
        "max reachable CA equals mu(CA)",
        max_ca == expected_ca,
        format!("max CA = {max_ca}"),
    ));

    let home = graph.is_home_state(graph.init()[0])?;
    let live = graph.live_transitions()?;
    out.push(CheckResult::new(
        "q0 is a home state and every transition is live",
        home && graph.is_strongly_connected()? && live.live.len() == net.transitions().len(),
        format!("live {}", fmt_set(net.transitions(), &live.live)),
    ));

    let mut hs_ok = true;
    let mut failed = Vec::new();
    for z in 0..=min {
        let pred = parse_predicate(&format!("CLA={z} & CA={z}"), net.places())?;
        if !graph.is_home_space(&pred)?.holds {
            hs_ok = false;
            failed.push(z);
        }
    }
    out.push(CheckResult::new(
        "HS(z) = {CLA=z & CA=z} is a home space for z <= min(x,y)",
        hs_ok,
        format!("failing z: {failed:?}"),
    ));
    Ok(())
}

fn twocycles_checks(
    net: &PetriNet,
    q0: &Marking,
    limit: usize,
    out: &mut Vec<CheckResult>,
) -> Result<(), CasebookError> {
    let graph = TransitionGraph::build(net, std::slice::from_ref(q0), limit)?;
    let hand = twocycles_graph();
    out.push(CheckResult::new(
        "net graph matches the hand-built fixture",
        graph.node_count() == hand.node_count() && graph.edges().len() == hand.edges().len(),
        format!("{} nodes, {} edges", graph.node_count(), graph.edges().len()),
    ));
    let hs1 = parse_predicate(TWOCYCLES_HS1, net.places())?;
    let hs2 = parse_predicate(TWOCYCLES_HS2, net.places())?;
    let both = hs1.and(&hs2).expect("linear predicates");
    let v1 = graph.is_home_space(&hs1)?;
    let v2 = graph.is_home_space(&hs2)?;
    let v12 = graph.is_home_space(&both)?;
    out.push(CheckResult::new(
        "two home spaces whose intersection is not a home space",
        v1.holds && v2.holds && !v12.holds,
        match v12.counterexample {
            Some(c) => format!("intersection unreachable from {}", graph.node_label(c)),
            None => "intersection is a home space".into(),
        },
    ));
    let bottoms = graph.scc_decomposition()?.iter().filter(|c| c.bottom).count();
    out.push(CheckResult::new(
        "two bottom components, no sink",
        bottoms == 2 && graph.sinks()?.is_empty(),
        format!("{bottoms} bottom components"),
    ));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bind(pairs: &[(&str, i64)]) -> BTreeMap<String, i64> {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn tn_weights() {
        let (net, q0) = casebook_net("tn", &bind(&[("k", 2)])).unwrap();
        assert_eq!(net.pre(0, 0), 2);
        assert_eq!(net.post(0, 1), 3);
        assert_eq!(q0.as_slice(), &[3, 0]);
    }

    #[test]
    fn tel_initial_marking() {
        let (net, q0) = casebook_net("tel", &bind(&[("x", 2), ("y", 1)])).unwrap();
        assert_eq!(net.places(), TEL_PLACES);
        assert_eq!(q0, net.marking(&[("LA", 2), ("A", 1)]).unwrap());
    }

    #[test]
    fn tel2_adds_wait_place() {
        let (net, _) = casebook_net("tel2", &BTreeMap::new()).unwrap();
        assert_eq!(net.dim(), 10);
        let wa = net.place_index("WA").unwrap();
        assert_eq!(net.post(wa, net.transition_index("t8").unwrap()), 1);
        assert_eq!(net.pre(wa, net.transition_index("t9").unwrap()), 1);
    }

    #[test]
    fn binding_validation() {
        assert!(matches!(
            casebook_net("tel", &bind(&[("x", 0)])),
            Err(CasebookError::InvalidBinding { .. })
        ));
        assert!(matches!(
            casebook_net("tel", &bind(&[("k", 1)])),
            Err(CasebookError::UnknownParameter { .. })
        ));
        assert!(matches!(
            casebook_net("nope", &BTreeMap::new()),
            Err(CasebookError::UnknownEntry(_))
        ));
    }

    #[test]
    fn live_predicate() {
        assert!(tn_live_predicate(2, 3, 0));
        assert!(!tn_live_predicate(2, 2, 0));
        assert!(!tn_live_predicate(2, 1, 0));
        assert!(!tn_live_predicate(1, 5, 2));
    }

    #[test]
    fn every_entry_verifies_at_defaults() {
        for e in entries() {
            let checks = verify_entry(e.name, &BTreeMap::new(), 100_000, 7).unwrap();
            for c in &checks {
                assert!(c.passed, "{}: {} ({})", e.name, c.name, c.evidence);
            }
        }
    }
}
