//! Place/transition nets, markings and the firing rule.
//!
//! Every vector in this crate (markings, semiflows, incidence rows) is
//! indexed by place declaration order.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("binding for undeclared parameter `{0}`")]
    UnknownParameter(String),
    #[error("{what} evaluates to negative value {value}")]
    NegativeValue { what: String, value: i64 },
    #[error("duplicate identifier `{0}`")]
    DuplicateIdentifier(String),
    #[error("unknown place `{0}`")]
    UnknownPlace(String),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("a net needs at least one place")]
    NoPlaces,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("transition `{transition}` is not enabled")]
    NotEnabled { transition: String },
    #[error("transition `{transition}` at position {position} is not enabled")]
    NotEnabledAt { transition: String, position: usize },
    #[error("integer overflow")]
    Overflow,
}

/// A marking: one non-negative token count per place.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Marking(Vec<i64>);

impl Marking {
    pub fn new(entries: Vec<i64>) -> Result<Self, NetError> {
        if let Some(&v) = entries.iter().find(|&&v| v < 0) {
            return Err(NetError::NegativeValue {
                what: "marking entry".into(),
                value: v,
            });
        }
        Ok(Marking(entries))
    }

    pub fn zero(d: usize) -> Self {
        Marking(vec![0; d])
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, place: usize) -> i64 {
        self.0[place]
    }

    pub fn into_vec(self) -> Vec<i64> {
        self.0
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetriNet {
    name: String,
    places: Vec<String>,
    transitions: Vec<String>,
    // Indexed [transition][place].
    pre: Vec<Vec<i64>>,
    post: Vec<Vec<i64>>,
    params: BTreeMap<String, i64>,
}

impl PetriNet {
    /// Builds a net from per-transition weight columns (`pre[t][p]`).
    pub fn new(
        name: impl Into<String>,
        places: Vec<String>,
        transitions: Vec<String>,
        pre: Vec<Vec<i64>>,
        post: Vec<Vec<i64>>,
        params: BTreeMap<String, i64>,
    ) -> Result<Self, NetError> {
        if places.is_empty() {
            return Err(NetError::NoPlaces);
        }
        let mut seen = HashSet::new();
        for id in places.iter().chain(transitions.iter()) {
            if !seen.insert(id.as_str()) {
                return Err(NetError::DuplicateIdentifier(id.clone()));
            }
        }
        let d = places.len();
        for table in [&pre, &post] {
            if table.len() != transitions.len() {
                return Err(NetError::DimensionMismatch {
                    expected: transitions.len(),
                    found: table.len(),
                });
            }
            for (t, column) in table.iter().enumerate() {
                if column.len() != d {
                    return Err(NetError::DimensionMismatch {
                        expected: d,
                        found: column.len(),
                    });
                }
                if let Some(&v) = column.iter().find(|&&v| v < 0) {
                    return Err(NetError::NegativeValue {
                        what: format!("weight on transition `{}`", transitions[t]),
                        value: v,
                    });
                }
            }
        }
        Ok(PetriNet {
            name: name.into(),
            places,
            transitions,
            pre,
            post,
            params,
        })
    }

    pub fn builder(name: impl Into<String>) -> NetBuilder {
        NetBuilder {
            name: name.into(),
            places: Vec::new(),
            init: Vec::new(),
            transitions: Vec::new(),
            params: BTreeMap::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[String] {
        &self.transitions
    }

    pub fn params(&self) -> &BTreeMap<String, i64> {
        &self.params
    }

    /// Number of places.
    pub fn dim(&self) -> usize {
        self.places.len()
    }

    pub fn place_index(&self, name: &str) -> Option<usize> {
        self.places.iter().position(|p| p == name)
    }

    pub fn transition_index(&self, name: &str) -> Option<usize> {
        self.transitions.iter().position(|t| t == name)
    }

    pub fn pre(&self, place: usize, transition: usize) -> i64 {
        self.pre[transition][place]
    }

    pub fn post(&self, place: usize, transition: usize) -> i64 {
        self.post[transition][place]
    }

    pub fn pre_column(&self, transition: usize) -> &[i64] {
        &self.pre[transition]
    }

    pub fn post_column(&self, transition: usize) -> &[i64] {
        &self.post[transition]
    }

    /// `C = Post - Pre`, indexed `[place][transition]`.
    pub fn incidence(&self) -> Vec<Vec<i64>> {
        (0..self.dim())
            .map(|p| {
                (0..self.transitions.len())
                    .map(|t| self.post[t][p] - self.pre[t][p])
                    .collect()
            })
            .collect()
    }

    fn check_transition(&self, t: usize) -> Result<(), NetError> {
        if t >= self.transitions.len() {
            return Err(NetError::UnknownTransition(format!("#{t}")));
        }
        Ok(())
    }

    fn check_marking(&self, q: &Marking) -> Result<(), NetError> {
        if q.len() != self.dim() {
            return Err(NetError::DimensionMismatch {
                expected: self.dim(),
                found: q.len(),
            });
        }
        Ok(())
    }

    pub fn enabled(&self, q: &Marking, t: usize) -> Result<bool, NetError> {
        self.check_transition(t)?;
        self.check_marking(q)?;
        Ok(self.is_enabled_unchecked(q, t))
    }

    pub(crate) fn is_enabled_unchecked(&self, q: &Marking, t: usize) -> bool {
        q.0.iter().zip(&self.pre[t]).all(|(have, need)| have >= need)
    }

    pub fn fire(&self, q: &Marking, t: usize) -> Result<Marking, NetError> {
        if !self.enabled(q, t)? {
            return Err(NetError::NotEnabled {
                transition: self.transitions[t].clone(),
            });
        }
        self.fire_unchecked(q, t)
    }

    /// Fires `t` assuming it is enabled in `q`.
    pub(crate) fn fire_unchecked(&self, q: &Marking, t: usize) -> Result<Marking, NetError> {
        let next = q
            .0
            .iter()
            .zip(self.pre[t].iter().zip(&self.post[t]))
            .map(|(&v, (&pre, &post))| (v - pre).checked_add(post).ok_or(NetError::Overflow))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Marking(next))
    }

    /// Fires `word` from `q`. Positions in errors are 1-based.
    pub fn fire_sequence(&self, q: &Marking, word: &[usize]) -> Result<Marking, NetError> {
        self.check_marking(q)?;
        let mut current = q.clone();
        for (i, &t) in word.iter().enumerate() {
            self.check_transition(t)?;
            if !self.is_enabled_unchecked(&current, t) {
                return Err(NetError::NotEnabledAt {
                    transition: self.transitions[t].clone(),
                    position: i + 1,
                });
            }
            current = self.fire_unchecked(&current, t)?;
        }
        Ok(current)
    }

    /// Resolves a sequence of transition names.
    pub fn word(&self, names: &[&str]) -> Result<Vec<usize>, NetError> {
        names
            .iter()
            .map(|n| {
                self.transition_index(n)
                    .ok_or_else(|| NetError::UnknownTransition(n.to_string()))
            })
            .collect()
    }

    /// Builds a marking from `(place, count)` pairs; unlisted places are 0.
    pub fn marking(&self, entries: &[(&str, i64)]) -> Result<Marking, NetError> {
        let mut v = vec![0; self.dim()];
        for &(name, count) in entries {
            let p = self
                .place_index(name)
                .ok_or_else(|| NetError::UnknownPlace(name.to_string()))?;
            v[p] = count;
        }
        Marking::new(v)
    }
}

/// Incremental construction of a net together with its initial marking.
#[derive(Debug, Clone)]
pub struct NetBuilder {
    name: String,
    places: Vec<String>,
    init: Vec<i64>,
    transitions: Vec<(String, Vec<(String, i64)>, Vec<(String, i64)>)>,
    params: BTreeMap<String, i64>,
}

impl NetBuilder {
    pub fn param(mut self, name: &str, value: i64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn place(mut self, name: &str, init: i64) -> Self {
        self.places.push(name.to_string());
        self.init.push(init);
        self
    }

    pub fn transition(mut self, name: &str, input: &[(&str, i64)], output: &[(&str, i64)]) -> Self {
        let own = |arcs: &[(&str, i64)]| arcs.iter().map(|&(p, w)| (p.to_string(), w)).collect();
        self.transitions
            .push((name.to_string(), own(input), own(output)));
        self
    }

    pub fn build(self) -> Result<(PetriNet, Marking), NetError> {
        let d = self.places.len();
        let index = |p: &str| {
            self.places
                .iter()
                .position(|x| x == p)
                .ok_or_else(|| NetError::UnknownPlace(p.to_string()))
        };
        let mut pre = Vec::with_capacity(self.transitions.len());
        let mut post = Vec::with_capacity(self.transitions.len());
        for (_, input, output) in &self.transitions {
            let mut pre_col = vec![0; d];
            let mut post_col = vec![0; d];
            for (p, w) in input {
                pre_col[index(p)?] += *w;
            }
            for (p, w) in output {
                post_col[index(p)?] += *w;
            }
            pre.push(pre_col);
            post.push(post_col);
        }
        let names = self.transitions.iter().map(|(n, _, _)| n.clone()).collect();
        let net = PetriNet::new(self.name, self.places, names, pre, post, self.params)?;
        let init = Marking::new(self.init)?;
        Ok((net, init))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tn(k: i64) -> PetriNet {
        PetriNet::builder("TN")
            .param("k", k)
            .place("A", 0)
            .place("B", 0)
            .transition("t1", &[("A", k)], &[("B", 1)])
            .transition("t2", &[("A", 1), ("B", 1)], &[("A", k + 1)])
            .build()
            .unwrap()
            .0
    }

    #[test]
    fn incidence_of_tn() {
        let c = tn(2).incidence();
        assert_eq!(c, vec![vec![-2, 2], vec![1, -1]]);
    }

    #[test]
    fn incidence_is_zero_for_self_loops() {
        let (net, _) = PetriNet::builder("loops")
            .place("p", 1)
            .place("q", 0)
            .transition("t", &[("p", 1), ("q", 2)], &[("p", 1), ("q", 2)])
            .build()
            .unwrap();
        assert!(net.incidence().iter().flatten().all(|&c| c == 0));
        let q = net.marking(&[("p", 1), ("q", 2)]).unwrap();
        assert_eq!(net.fire(&q, 0).unwrap(), q);
    }

    #[test]
    fn enabling_threshold() {
        let net = tn(2);
        assert!(net.enabled(&net.marking(&[("A", 2)]).unwrap(), 0).unwrap());
        assert!(!net.enabled(&net.marking(&[("A", 1)]).unwrap(), 0).unwrap());
        assert!(matches!(
            net.enabled(&Marking::zero(2), 7),
            Err(NetError::UnknownTransition(_))
        ));
    }

    #[test]
    fn empty_preset_is_always_enabled() {
        let (net, q) = PetriNet::builder("src")
            .place("p", 0)
            .transition("t", &[], &[("p", 1)])
            .build()
            .unwrap();
        assert!(net.enabled(&q, 0).unwrap());
        assert_eq!(net.fire(&q, 0).unwrap().as_slice(), &[1]);
    }

    #[test]
    fn firing_tn() {
        let net = tn(2);
        let q = net.marking(&[("A", 2)]).unwrap();
        assert_eq!(net.fire(&q, 0).unwrap().as_slice(), &[0, 1]);
        let q = net.marking(&[("A", 1), ("B", 1)]).unwrap();
        assert_eq!(net.fire(&q, 1).unwrap().as_slice(), &[3, 0]);
        let q = net.marking(&[("A", 1)]).unwrap();
        assert!(matches!(net.fire(&q, 0), Err(NetError::NotEnabled { .. })));
    }

    #[test]
    fn fire_sequence_reports_position() {
        let net = tn(2);
        let q = net.marking(&[("A", 2)]).unwrap();
        let word = net.word(&["t1", "t1"]).unwrap();
        assert_eq!(
            net.fire_sequence(&q, &word),
            Err(NetError::NotEnabledAt {
                transition: "t1".into(),
                position: 2
            })
        );
        assert_eq!(net.fire_sequence(&q, &[]).unwrap(), q);
    }

    #[test]
    fn rejects_duplicates_and_bad_markings() {
        let err = PetriNet::builder("dup")
            .place("a", 0)
            .transition("a", &[], &[])
            .build()
            .unwrap_err();
        assert_eq!(err, NetError::DuplicateIdentifier("a".into()));
        assert!(Marking::new(vec![0, -1]).is_err());
        assert_eq!(
            PetriNet::builder("none").build().unwrap_err(),
            NetError::NoPlaces
        );
    }
}
