//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits non-zero on failure.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use petrinv::casebook::{tn_live_predicate, twocycles_graph, TWOCYCLES_HS1, TWOCYCLES_HS2};
use petrinv::invariant::{combined_invariant_holds, iota, mu_bound, rho, threshold_dead_transitions};
use petrinv::semiflow::{decompose_over_n, hilbert_basis, minimal_support_semiflows, supports, Semiflow};
use petrinv::{casebook_net, parse_predicate, Marking, PetriNet, TransitionGraph};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const BINDINGS: [(i64, i64); 4] = [(1, 1), (2, 1), (1, 2), (2, 2)];
const LIMIT: usize = 100_000;

fn tel(name: &str, x: i64, y: i64) -> (PetriNet, Marking) {
    casebook_net(name, &bind(&[("x", x), ("y", y)])).unwrap()
}

fn coords(set: &petrinv::GeneratingSet) -> BTreeSet<Vec<i64>> {
    set.members().iter().map(|m| m.coords().to_vec()).collect()
}

fn named_semiflows(net: &PetriNet) -> Vec<Vec<i64>> {
    vec![
        place_vector(net, &["LA", "CLA", "WLA", "PU", "S"]),
        place_vector(net, &["LA", "PU", "F", "CA"]),
        place_vector(net, &["CLA", "A", "S", "R"]),
    ]
}

fn tn_liveness_closed_form() -> Outcome {
    let mut instances = 0;
    let mut mismatches = Vec::new();
    for k in 1..=4 {
        let (net, _) = casebook_net("tn", &bind(&[("k", k)])).unwrap();
        for a in 0..=3 * k {
            for b in 0..=2 {
                let g = TransitionGraph::build(&net, &[Marking::new(vec![a, b]).unwrap()], LIMIT).unwrap();
                let all_live = g.live_transitions().unwrap().live.len() == 2;
                instances += 1;
                if all_live != tn_live_predicate(k, a, b) {
                    mismatches.push((k, a, b));
                }
            }
        }
    }
    ensure!(instances == 102, "expected 102 instances, ran {instances}");
    ensure!(mismatches.is_empty(), "mismatches at (k,a,b) = {mismatches:?}");
    Ok(format!("{instances} instances, 0 mismatches"))
}

fn tel_semiflows() -> Outcome {
    let (net, _) = tel("tel", 2, 1);
    let expected: BTreeSet<Vec<i64>> = named_semiflows(&net).into_iter().collect();
    let ms = coords(&minimal_support_semiflows(&net).unwrap());
    ensure!(ms == expected, "minimal supports {ms:?}");
    let hb = coords(&hilbert_basis(&net).unwrap());
    let inside: BTreeSet<Vec<i64>> = hb.iter().filter(|v| v.iter().all(|&x| x <= 3)).cloned().collect();
    let oracle = box_minimal(&net, 3);
    ensure!(inside == oracle, "basis in box {inside:?} vs oracle {oracle:?}");
    Ok(format!("3 minimal supports; Hilbert basis of {} equals the box oracle", hb.len()))
}

fn tel2_semiflows() -> Outcome {
    let (net, _) = tel("tel2", 2, 1);
    let (tel_net, _) = tel("tel", 2, 1);
    let mut expected = named_semiflows(&net);
    expected.push(place_vector(&net, &["A", "CA", "WA"]));
    let ms = coords(&minimal_support_semiflows(&net).unwrap());
    ensure!(ms == expected.iter().cloned().collect(), "minimal supports {ms:?}");
    let wa = net.place_index("WA").unwrap();
    ensure!(net.places()[..tel_net.dim()] == *tel_net.places(), "shared places differ");
    let shared: BTreeSet<String> = ms
        .iter()
        .filter(|m| m[wa] == 0)
        .map(|m| serde_json::to_string(&m[..tel_net.dim()]).unwrap())
        .collect();
    let tel_ms: BTreeSet<String> = coords(&minimal_support_semiflows(&tel_net).unwrap())
        .iter()
        .map(|m| serde_json::to_string(m).unwrap())
        .collect();
    ensure!(shared == tel_ms, "f1..f3 differ from TEL's");
    Ok("4 minimal supports; first three identical to TEL's".into())
}

fn mu_bounds() -> Outcome {
    let r = |v: i64| BigRational::from_integer(BigInt::from(v));
    for (x, y) in BINDINGS {
        for name in ["tel", "tel2"] {
            let (net, q0) = tel(name, x, y);
            let ms = minimal_support_semiflows(&net).unwrap();
            let cla = mu_bound(&ms, net.place_index("CLA").unwrap(), &q0).unwrap();
            let ca = mu_bound(&ms, net.place_index("CA").unwrap(), &q0).unwrap();
            ensure!(cla.bound == r(x.min(y)), "{name}({x},{y}) mu(CLA) = {}", cla.bound);
            let want = if name == "tel" { x } else { x.min(y) };
            ensure!(ca.bound == r(want), "{name}({x},{y}) mu(CA) = {}", ca.bound);
        }
    }
    Ok("8 instances, exact".into())
}

fn max_reachable(net: &PetriNet, q0: &Marking, place: &str) -> i64 {
    let p = net.place_index(place).unwrap();
    let rs = explore(net, q0, LIMIT);
    assert!(rs.complete);
    rs.states.iter().map(|s| s[p]).max().unwrap()
}

fn bound_tightness() -> Outcome {
    let (net, q0) = tel("tel", 2, 1);
    let tel_max = max_reachable(&net, &q0, "CA");
    ensure!(tel_max == 2, "TEL(2,1) max CA = {tel_max}");
    let (net, q0) = tel("tel2", 2, 1);
    let tel2_max = max_reachable(&net, &q0, "CA");
    ensure!(tel2_max == 1, "TEL2(2,1) max CA = {tel2_max}");
    Ok("TEL(2,1) reaches CA=2 > min(x,y); TEL2(2,1) max CA = 1".into())
}

fn home_state_and_liveness() -> Outcome {
    for (x, y) in BINDINGS {
        for name in ["tel", "tel2"] {
            let (net, q0) = tel(name, x, y);
            let g = TransitionGraph::build(&net, &[q0], LIMIT).unwrap();
            let init = g.init()[0];
            ensure!(g.is_home_state(init).unwrap(), "{name}({x},{y}) q0 not a home state");
            ensure!(g.is_strongly_connected().unwrap(), "{name}({x},{y}) not strongly connected");
            let live = g.live_transitions().unwrap();
            ensure!(live.live.len() == 9, "{name}({x},{y}) live {:?}", live.live);
            let fast = g.live_transitions_fast().unwrap();
            ensure!(fast.as_ref() == Some(&live.live), "{name}({x},{y}) fast path {fast:?}");
        }
    }
    Ok("8 instances: home state, strongly connected, 9/9 live, fast path agrees".into())
}

fn hs_home_space() -> Outcome {
    let (net, q0) = tel("tel", 2, 2);
    let g = TransitionGraph::build(&net, std::slice::from_ref(&q0), LIMIT).unwrap();
    let rs = explore(&net, &q0, LIMIT);
    let (cla, ca) = (net.place_index("CLA").unwrap(), net.place_index("CA").unwrap());
    for z in 0..=2 {
        let pred = parse_predicate(&format!("CLA={z} & CA={z}"), net.places()).unwrap();
        let verdict = g.is_home_space(&pred).unwrap();
        let targets: BTreeSet<usize> = (0..rs.states.len())
            .filter(|&i| rs.states[i][cla] == z && rs.states[i][ca] == z)
            .collect();
        ensure!(verdict.holds, "HS({z}) rejected");
        ensure!(rs.is_home_space(&targets), "definitional oracle rejects HS({z})");
    }
    Ok("z = 0,1,2 home spaces; definitional oracle agrees".into())
}

fn threshold_deadness() -> Outcome {
    let (net, _) = casebook_net("tn", &bind(&[("k", 2)])).unwrap();
    let q0 = Marking::new(vec![1, 0]).unwrap();
    let ms = minimal_support_semiflows(&net).unwrap();
    let dead: BTreeSet<usize> = threshold_dead_transitions(&net, &ms, &q0)
        .unwrap()
        .iter()
        .map(|d| d.transition)
        .collect();
    ensure!(dead == BTreeSet::from([0, 1]), "threshold-dead {dead:?}");
    let g = TransitionGraph::build(&net, &[q0], LIMIT).unwrap();
    ensure!(g.edges().is_empty(), "graph has {} edges", g.edges().len());
    Ok("{t1,t2} threshold-dead; graph has no edge".into())
}

fn hilbert_oracle_suite() -> Outcome {
    let mut nets: Vec<(PetriNet, Marking)> = (0..24).map(|s| random_net(s, 6, 5, 2)).collect();
    for k in 1..=4 {
        nets.push(casebook_net("tn", &bind(&[("k", k)])).unwrap());
    }
    nets.push(tel("tel", 2, 1));
    nets.push(tel("tel2", 2, 1));
    let mut vectors = 0;
    for (net, _) in &nets {
        let hb = hilbert_basis(net).unwrap();
        let inside: BTreeSet<Vec<i64>> = coords(&hb).into_iter().filter(|v| v.iter().all(|&x| x <= 3)).collect();
        ensure!(inside == box_minimal(net, 3), "{}: basis differs from box oracle", net.name());
        let forward: Vec<usize> = (0..hb.len()).collect();
        let backward: Vec<usize> = (0..hb.len()).rev().collect();
        for v in box_semiflows(net, 3) {
            for order in [&forward, &backward] {
                let k = decompose_over_n(&Semiflow::new(v.clone()), &hb, order)
                    .map_err(|e| format!("{}: {e}", net.name()))?;
                let mut sum = vec![0i64; net.dim()];
                for (ki, &i) in k.iter().zip(order.iter()) {
                    for (s, c) in sum.iter_mut().zip(hb.members()[i].coords()) {
                        *s += ki * c;
                    }
                }
                ensure!(sum == v, "{}: {v:?} reconstructed as {sum:?}", net.name());
            }
            vectors += 1;
        }
    }
    Ok(format!("{} nets, {vectors} box semiflows reconstructed under 2 orders", nets.len()))
}

fn generating_set_independence() -> Outcome {
    let nets = corpus();
    for (net, q0) in &nets {
        let ms = minimal_support_semiflows(net).unwrap();
        let hb = hilbert_basis(net).unwrap();
        ensure!(
            iota(&ms, q0).unwrap().same_affine_set(&iota(&hb, q0).unwrap()),
            "{}: iota differs",
            net.name()
        );
        ensure!(rho(&ms) == rho(&hb), "{}: rho differs", net.name());
        for p in 0..net.dim() {
            let a = mu_bound(&ms, p, q0).ok().map(|m| m.bound);
            let b = mu_bound(&hb, p, q0).ok().map(|m| m.bound);
            ensure!(a == b, "{}: mu differs at place {p}", net.name());
        }
    }
    Ok(format!("{} corpus nets", nets.len()))
}

fn property_suite() -> Outcome {
    let mut graphs = 0;
    for (net, q0) in corpus() {
        let rs = explore(&net, &q0, 5_000);
        if !rs.complete {
            continue;
        }
        graphs += 1;
        let g = TransitionGraph::build(&net, std::slice::from_ref(&q0), 5_000).unwrap();
        let hb = hilbert_basis(&net).unwrap();
        let name = net.name();

        for f in hb.members() {
            for h in hb.members() {
                let (su, _, _) = supports(f.add(h).coords());
                ensure!(su == f.support().union(h.support()).copied().collect(), "{name}: support of sum");
                ensure!(f.scale(-2).support() == f.support(), "{name}: support of multiple");
                for s in g.nodes() {
                    let q = s.marking().unwrap();
                    ensure!(combined_invariant_holds(f, h, 2, -1, &q0, q), "{name}: combined invariant at {q}");
                }
            }
        }

        let sinks = g.sinks().unwrap();
        let bottoms: BTreeSet<usize> = g.home_states().unwrap();
        ensure!(g.is_home_space_nodes(&bottoms).unwrap().holds, "{name}: bottom components not a home space");
        ensure!(sinks.is_subset(&bottoms), "{name}: sink outside bottom components");
        let mut bigger = bottoms.clone();
        bigger.insert(0);
        ensure!(g.is_home_space_nodes(&bigger).unwrap().holds, "{name}: superset of a home space rejected");

        let init = g.init()[0];
        let home = g.is_home_state(init).unwrap();
        let every = (0..g.node_count()).all(|i| g.is_home_state(i).unwrap());
        ensure!(
            home == every && home == g.is_strongly_connected().unwrap(),
            "{name}: home-state characterizations disagree"
        );

        let live = g.live_transitions().unwrap();
        ensure!(g.node_count() == rs.states.len(), "{name}: node count differs from exploration");
        ensure!(live.live == rs.live(&net), "{name}: liveness differs from definition");
        for &t in &live.live {
            ensure!(g.is_home_space_nodes(&g.im(t)).unwrap().holds, "{name}: Im(t{t}) not a home space");
        }
        if let Some(fast) = g.live_transitions_fast().unwrap() {
            ensure!(fast == live.live, "{name}: fast liveness differs");
        }
    }

    let (net, q0) = casebook_net("twocycles", &BTreeMap::new()).unwrap();
    let g = TransitionGraph::build(&net, &[q0], LIMIT).unwrap();
    let hs1 = parse_predicate(TWOCYCLES_HS1, net.places()).unwrap();
    let hs2 = parse_predicate(TWOCYCLES_HS2, net.places()).unwrap();
    ensure!(g.is_home_space(&hs1).unwrap().holds, "twocycles HS1 rejected");
    ensure!(g.is_home_space(&hs2).unwrap().holds, "twocycles HS2 rejected");
    let both = g.is_home_space(&hs1.and(&hs2).unwrap()).unwrap();
    ensure!(!both.holds && both.counterexample.is_some(), "twocycles intersection accepted");
    ensure!(twocycles_graph().node_count() == g.node_count(), "hand-built fixture differs");

    Ok(format!(
        "{graphs} finite graphs; intersection of two home spaces rejected (counterexample {})",
        g.node_label(both.counterexample.unwrap())
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("TN(k) liveness: all-live iff a+kb > k and not a multiple of k", tn_liveness_closed_form),
        ("TEL minimal supports and Hilbert basis vs box oracle", tel_semiflows),
        ("TEL2 minimal supports add f4 only", tel2_semiflows),
        ("mu(CLA), mu(CA) for TEL and TEL2", mu_bounds),
        ("mu(CA) tight for TEL, min(x,y) for TEL2", bound_tightness),
        ("TEL/TEL2 home state, strong connectivity, liveness", home_state_and_liveness),
        ("HS(z) home spaces for TEL(2,2)", hs_home_space),
        ("threshold-dead transitions of TN(2) at (1,0)", threshold_deadness),
        ("Hilbert basis oracle suite and decomposition over N", hilbert_oracle_suite),
        ("iota, mu, rho independent of the generating set", generating_set_independence),
        ("module property suite", property_suite),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(evidence) => println!("acceptance {:>2} PASS  {name}: {evidence} [{ms} ms]", i + 1),
            Err(why) => {
                failed += 1;
                println!("acceptance {:>2} FAIL  {name}: {why} [{ms} ms]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
