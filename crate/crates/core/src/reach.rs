//! Explicit reachability graphs and the decision procedures that run on
//! them: strongly connected components, home spaces, home states, sinks
//! and liveness.
//!
//! All decision procedures refuse graphs whose exploration was cut short
//! by the node limit.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use serde_json::json;
use thiserror::Error;

use crate::net::{Marking, NetError, PetriNet};
use crate::predicate::StatePredicate;

pub const DEFAULT_NODE_LIMIT: usize = 500_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("reachability graph is incomplete (node limit reached); refusing to decide")]
    Incomplete,
    #[error("node limit must be at least 1")]
    InvalidLimit,
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node `{0}` is not reachable from the initial nodes")]
    Unreachable(String),
    #[error("linear predicates need marking-labelled nodes")]
    NeedsMarkings,
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum State {
    Marking(Marking),
    Named(String),
}

impl State {
    pub fn marking(&self) -> Option<&Marking> {
        match self {
            State::Marking(m) => Some(m),
            State::Named(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub source: usize,
    pub label: usize,
    pub target: usize,
}

/// A labelled transition graph over markings (built from a net) or over
/// named states (built by hand).
#[derive(Debug, Clone)]
pub struct TransitionGraph {
    name: String,
    places: Vec<String>,
    labels: Vec<String>,
    nodes: Vec<State>,
    edges: Vec<Edge>,
    init: Vec<usize>,
    complete: bool,
    succ: Vec<Vec<(usize, usize)>>,
    pred: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub nodes: Vec<usize>,
    /// No edge leaves the component.
    pub bottom: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomeVerdict {
    pub holds: bool,
    /// Smallest-index node from which no predicate node is reachable.
    pub counterexample: Option<usize>,
}

/// Partition of the transition labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Liveness {
    pub live: BTreeSet<usize>,
    pub dead: BTreeSet<usize>,
    pub quasi_live: BTreeSet<usize>,
}

impl TransitionGraph {
    fn assemble(
        name: String,
        places: Vec<String>,
        labels: Vec<String>,
        nodes: Vec<State>,
        mut edges: Vec<Edge>,
        init: Vec<usize>,
        complete: bool,
    ) -> Self {
        edges.sort();
        edges.dedup();
        let mut succ = vec![Vec::new(); nodes.len()];
        let mut pred = vec![Vec::new(); nodes.len()];
        for e in &edges {
            succ[e.source].push((e.label, e.target));
            pred[e.target].push(e.source);
        }
        TransitionGraph {
            name,
            places,
            labels,
            nodes,
            edges,
            init,
            complete,
            succ,
            pred,
        }
    }

    /// Breadth-first closure of `init` under firing. Nodes are numbered in
    /// discovery order, trying transitions in declaration order. When more
    /// than `limit` nodes would be needed the partial graph is returned with
    /// `complete() == false`.
    pub fn build(net: &PetriNet, init: &[Marking], limit: usize) -> Result<Self, GraphError> {
        if limit == 0 {
            return Err(GraphError::InvalidLimit);
        }
        let mut index: HashMap<Marking, usize> = HashMap::new();
        let mut nodes = Vec::new();
        let mut init_ids = Vec::new();
        let mut complete = true;
        for q in init {
            if q.len() != net.dim() {
                return Err(NetError::DimensionMismatch {
                    expected: net.dim(),
                    found: q.len(),
                }
                .into());
            }
            if let Some(&i) = index.get(q) {
                init_ids.push(i);
                continue;
            }
            if nodes.len() == limit {
                complete = false;
                break;
            }
            index.insert(q.clone(), nodes.len());
            init_ids.push(nodes.len());
            nodes.push(q.clone());
        }
        init_ids.sort();
        init_ids.dedup();

        let mut edges = Vec::new();
        let mut queue: VecDeque<usize> = init_ids.iter().copied().collect();
        'explore: while let Some(i) = queue.pop_front() {
            for t in 0..net.transitions().len() {
                if !net.is_enabled_unchecked(&nodes[i], t) {
                    continue;
                }
                let next = net.fire_unchecked(&nodes[i], t)?;
                let j = match index.get(&next) {
                    Some(&j) => j,
                    None => {
                        if nodes.len() == limit {
                            complete = false;
                            break 'explore;
                        }
                        let j = nodes.len();
                        index.insert(next.clone(), j);
                        nodes.push(next);
                        queue.push_back(j);
                        j
                    }
                };
                edges.push(Edge {
                    source: i,
                    label: t,
                    target: j,
                });
            }
        }
        Ok(Self::assemble(
            net.name().to_string(),
            net.places().to_vec(),
            net.transitions().to_vec(),
            nodes.into_iter().map(State::Marking).collect(),
            edges,
            init_ids,
            complete,
        ))
    }

    /// A hand-built graph over named states. Every node must be reachable
    /// from `init`.
    pub fn from_edges(
        name: &str,
        labels: &[&str],
        nodes: &[&str],
        edges: &[(&str, &str, &str)],
        init: &[&str],
    ) -> Result<Self, GraphError> {
        let node = |n: &str| {
            nodes
                .iter()
                .position(|x| *x == n)
                .ok_or_else(|| GraphError::UnknownNode(n.to_string()))
        };
        let label = |l: &str| {
            labels
                .iter()
                .position(|x| *x == l)
                .ok_or_else(|| GraphError::UnknownNode(l.to_string()))
        };
        let edges = edges
            .iter()
            .map(|&(s, l, t)| {
                Ok(Edge {
                    source: node(s)?,
                    label: label(l)?,
                    target: node(t)?,
                })
            })
            .collect::<Result<Vec<_>, GraphError>>()?;
        let mut init = init.iter().map(|n| node(n)).collect::<Result<Vec<_>, _>>()?;
        init.sort();
        init.dedup();
        let graph = Self::assemble(
            name.to_string(),
            Vec::new(),
            labels.iter().map(|s| s.to_string()).collect(),
            nodes.iter().map(|s| State::Named(s.to_string())).collect(),
            edges,
            init,
            true,
        );
        let reach = graph.forward_closure(&graph.init);
        if let Some(i) = reach.iter().position(|r| !r) {
            return Err(GraphError::Unreachable(nodes[i].to_string()));
        }
        Ok(graph)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn nodes(&self) -> &[State] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn init(&self) -> &[usize] {
        &self.init
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn successors(&self, node: usize) -> &[(usize, usize)] {
        &self.succ[node]
    }

    pub fn node_of_marking(&self, q: &Marking) -> Option<usize> {
        self.nodes.iter().position(|s| s.marking() == Some(q))
    }

    pub fn node_of_name(&self, name: &str) -> Option<usize> {
        self.nodes
            .iter()
            .position(|s| matches!(s, State::Named(n) if n == name))
    }

    pub fn node_label(&self, node: usize) -> String {
        match &self.nodes[node] {
            State::Named(n) => n.clone(),
            State::Marking(m) => {
                let parts: Vec<String> = m
                    .as_slice()
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0)
                    .map(|(p, v)| format!("{}={v}", self.places[p]))
                    .collect();
                if parts.is_empty() {
                    "0".to_string()
                } else {
                    parts.join(",")
                }
            }
        }
    }

    fn require_complete(&self) -> Result<(), GraphError> {
        if self.complete {
            Ok(())
        } else {
            Err(GraphError::Incomplete)
        }
    }

    pub fn forward_closure(&self, from: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = from.to_vec();
        for &s in from {
            seen[s] = true;
        }
        while let Some(i) = stack.pop() {
            for &(_, j) in &self.succ[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen
    }

    /// Nodes from which some node of `targets` is reachable.
    pub fn backward_closure(&self, targets: &BTreeSet<usize>) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = targets.iter().copied().collect();
        for &s in targets {
            seen[s] = true;
        }
        while let Some(i) = stack.pop() {
            for &j in &self.pred[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen
    }

    /// Nodes satisfying a predicate.
    pub fn select(&self, pred: &StatePredicate) -> Result<BTreeSet<usize>, GraphError> {
        match pred {
            StatePredicate::Nodes(set) => {
                if let Some(&bad) = set.iter().find(|&&i| i >= self.nodes.len()) {
                    return Err(GraphError::UnknownNode(format!("#{bad}")));
                }
                Ok(set.clone())
            }
            StatePredicate::Linear(constraints) if constraints.is_empty() => {
                Ok((0..self.nodes.len()).collect())
            }
            StatePredicate::Linear(constraints) => {
                let mut out = BTreeSet::new();
                for (i, s) in self.nodes.iter().enumerate() {
                    let q = s.marking().ok_or(GraphError::NeedsMarkings)?;
                    if constraints.iter().all(|c| c.holds(q)) {
                        out.insert(i);
                    }
                }
                Ok(out)
            }
        }
    }

    /// Strongly connected components (iterative Tarjan), each flagged
    /// `bottom` when no edge leaves it.
    pub fn scc_decomposition(&self) -> Result<Vec<Component>, GraphError> {
        self.require_complete()?;
        let n = self.nodes.len();
        const UNSEEN: usize = usize::MAX;
        let mut index = vec![UNSEEN; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut comp_of = vec![UNSEEN; n];
        let mut components: Vec<Vec<usize>> = Vec::new();
        let mut counter = 0;
        for root in 0..n {
            if index[root] != UNSEEN {
                continue;
            }
            // (node, next successor position)
            let mut call: Vec<(usize, usize)> = vec![(root, 0)];
            index[root] = counter;
            low[root] = counter;
            counter += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (v, ref mut pos)) = call.last_mut() {
                if let Some(&(_, w)) = self.succ[v].get(*pos) {
                    *pos += 1;
                    if index[w] == UNSEEN {
                        index[w] = counter;
                        low[w] = counter;
                        counter += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                    continue;
                }
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp_of[w] = components.len();
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    components.push(comp);
                }
            }
        }
        let mut bottom = vec![true; components.len()];
        for e in &self.edges {
            if comp_of[e.source] != comp_of[e.target] {
                bottom[comp_of[e.source]] = false;
            }
        }
        Ok(components
            .into_iter()
            .zip(bottom)
            .map(|(nodes, bottom)| Component { nodes, bottom })
            .collect())
    }

    pub fn is_strongly_connected(&self) -> Result<bool, GraphError> {
        Ok(self.scc_decomposition()?.len() <= 1)
    }

    /// Whether every node can reach some node of `set`.
    pub fn is_home_space_nodes(&self, set: &BTreeSet<usize>) -> Result<HomeVerdict, GraphError> {
        self.require_complete()?;
        let closure = self.backward_closure(set);
        let counterexample = closure.iter().position(|c| !c);
        Ok(HomeVerdict {
            holds: counterexample.is_none(),
            counterexample,
        })
    }

    pub fn is_home_space(&self, pred: &StatePredicate) -> Result<HomeVerdict, GraphError> {
        self.require_complete()?;
        let set = self.select(pred)?;
        self.is_home_space_nodes(&set)
    }

    /// Whether `node` is reachable from every node reachable from it, i.e.
    /// the subgraph reachable from `node` is strongly connected.
    pub fn is_home_state(&self, node: usize) -> Result<bool, GraphError> {
        self.require_complete()?;
        if node >= self.nodes.len() {
            return Err(GraphError::UnknownNode(format!("#{node}")));
        }
        let forward = self.forward_closure(&[node]);
        let backward = self.backward_closure(&BTreeSet::from([node]));
        Ok(forward.iter().zip(&backward).all(|(&f, &b)| !f || b))
    }

    /// Nodes that are home states of the graph they generate: the members
    /// of bottom components.
    pub fn home_states(&self) -> Result<BTreeSet<usize>, GraphError> {
        Ok(self
            .scc_decomposition()?
            .into_iter()
            .filter(|c| c.bottom)
            .flat_map(|c| c.nodes)
            .collect())
    }

    pub fn sinks(&self) -> Result<BTreeSet<usize>, GraphError> {
        self.require_complete()?;
        Ok((0..self.nodes.len()).filter(|&i| self.succ[i].is_empty()).collect())
    }

    /// Nodes enabling `label`: sources of `label` edges.
    pub fn dom(&self, label: usize) -> BTreeSet<usize> {
        self.edges.iter().filter(|e| e.label == label).map(|e| e.source).collect()
    }

    /// Targets of `label` edges.
    pub fn im(&self, label: usize) -> BTreeSet<usize> {
        self.edges.iter().filter(|e| e.label == label).map(|e| e.target).collect()
    }

    pub fn edge_labels(&self) -> BTreeSet<usize> {
        self.edges.iter().map(|e| e.label).collect()
    }

    /// A label is live iff its domain is a home space, dead iff it labels no
    /// edge, and quasi-live otherwise.
    pub fn live_transitions(&self) -> Result<Liveness, GraphError> {
        self.require_complete()?;
        let mut out = Liveness::default();
        for t in 0..self.labels.len() {
            let dom = self.dom(t);
            if dom.is_empty() {
                out.dead.insert(t);
            } else if self.is_home_space_nodes(&dom)?.holds {
                out.live.insert(t);
            } else {
                out.quasi_live.insert(t);
            }
        }
        Ok(out)
    }

    /// When the graph has a single initial node that is a home state, the
    /// live labels are exactly those appearing on edges.
    pub fn live_transitions_fast(&self) -> Result<Option<BTreeSet<usize>>, GraphError> {
        self.require_complete()?;
        match self.init.as_slice() {
            [q0] if self.is_home_state(*q0)? => Ok(Some(self.edge_labels())),
            _ => Ok(None),
        }
    }

    /// Deterministic Graphviz rendering.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}\" {{", self.name.replace('"', "\\\""));
        for i in 0..self.nodes.len() {
            let shape = if self.init.contains(&i) { ", shape=doublecircle" } else { "" };
            let _ = writeln!(out, "  n{i} [label=\"{}\"{shape}];", self.node_label(i));
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  n{} -> n{} [label=\"{}\"];",
                e.source, e.target, self.labels[e.label]
            );
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<serde_json::Value> = self
            .nodes
            .iter()
            .map(|s| match s {
                State::Marking(m) => json!(m),
                State::Named(n) => json!(n),
            })
            .collect();
        let edges: Vec<serde_json::Value> = self
            .edges
            .iter()
            .map(|e| json!([e.source, self.labels[e.label], e.target]))
            .collect();
        json!({
            "schema_version": 1,
            "net": self.name,
            "places": self.places,
            "labels": self.labels,
            "nodes": nodes,
            "edges": edges,
            "init": self.init,
            "complete": self.complete,
        })
    }
}
