//! Independent oracles shared by the integration tests. Nothing here calls
//! the analysis routines under test: semiflows are checked from the raw
//! weights, graphs are re-explored with a plain hash map, and cone
//! membership is decided by exhaustive subset elimination.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use petrinv::{Marking, PetriNet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn bind(pairs: &[(&str, i64)]) -> BTreeMap<String, i64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

pub fn is_semiflow(net: &PetriNet, v: &[i64]) -> bool {
    (0..net.transitions().len()).all(|t| {
        (0..net.dim())
            .map(|p| v[p] as i128 * (net.post(p, t) - net.pre(p, t)) as i128)
            .sum::<i128>()
            == 0
    })
}

/// Non-zero non-negative semiflows with every coordinate at most `bound`.
pub fn box_semiflows(net: &PetriNet, bound: i64) -> Vec<Vec<i64>> {
    let d = net.dim();
    let mut out = Vec::new();
    let mut v = vec![0i64; d];
    loop {
        let mut i = 0;
        while i < d && v[i] == bound {
            v[i] = 0;
            i += 1;
        }
        if i == d {
            return out;
        }
        v[i] += 1;
        if is_semiflow(net, &v) {
            out.push(v.clone());
        }
    }
}

fn le(a: &[i64], b: &[i64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Componentwise-minimal elements of a set of vectors.
pub fn minimal_elements(vs: &[Vec<i64>]) -> BTreeSet<Vec<i64>> {
    vs.iter()
        .filter(|v| !vs.iter().any(|w| w != *v && le(w, v)))
        .cloned()
        .collect()
}

pub fn box_minimal(net: &PetriNet, bound: i64) -> BTreeSet<Vec<i64>> {
    minimal_elements(&box_semiflows(net, bound))
}

pub fn support(v: &[i64]) -> BTreeSet<usize> {
    (0..v.len()).filter(|&i| v[i] != 0).collect()
}

pub fn place_vector(net: &PetriNet, places: &[&str]) -> Vec<i64> {
    let mut v = vec![0; net.dim()];
    for p in places {
        v[net.place_index(p).expect("known place")] = 1;
    }
    v
}

/// Random net with `1..=max_d` places, `0..=max_t` transitions, arc weights
/// in `0..=max_w` and initial tokens in `0..=2`.
pub fn random_net(seed: u64, max_d: usize, max_t: usize, max_w: i64) -> (PetriNet, Marking) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.gen_range(1..=max_d);
    let nt = rng.gen_range(0..=max_t);
    let places: Vec<String> = (0..d).map(|p| format!("p{p}")).collect();
    let mut b = PetriNet::builder(format!("rand{seed}"));
    for p in &places {
        b = b.place(p, rng.gen_range(0..=2));
    }
    for t in 0..nt {
        let arcs = |rng: &mut ChaCha8Rng| -> Vec<(&str, i64)> {
            places
                .iter()
                .filter_map(|p| {
                    let w = if rng.gen_bool(0.5) { rng.gen_range(1..=max_w) } else { 0 };
                    (w > 0).then_some((p.as_str(), w))
                })
                .collect()
        };
        let input = arcs(&mut rng);
        let output = arcs(&mut rng);
        b = b.transition(&format!("t{t}"), &input, &output);
    }
    b.build().expect("random net is well formed")
}

/// Plain breadth-first exploration.
pub struct Explored {
    pub states: Vec<Vec<i64>>,
    pub edges: Vec<(usize, usize, usize)>,
    pub complete: bool,
}

pub fn enables(net: &PetriNet, q: &[i64], t: usize) -> bool {
    (0..net.dim()).all(|p| q[p] >= net.pre(p, t))
}

pub fn explore(net: &PetriNet, q0: &Marking, limit: usize) -> Explored {
    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut states = vec![q0.as_slice().to_vec()];
    index.insert(states[0].clone(), 0);
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for t in 0..net.transitions().len() {
            if !enables(net, &states[i], t) {
                continue;
            }
            let next: Vec<i64> = (0..net.dim())
                .map(|p| states[i][p] - net.pre(p, t) + net.post(p, t))
                .collect();
            let j = match index.get(&next) {
                Some(&j) => j,
                None => {
                    if states.len() >= limit {
                        return Explored {
                            states,
                            edges,
                            complete: false,
                        };
                    }
                    states.push(next.clone());
                    index.insert(next, states.len() - 1);
                    queue.push_back(states.len() - 1);
                    states.len() - 1
                }
            };
            edges.push((i, t, j));
        }
    }
    Explored {
        states,
        edges,
        complete: true,
    }
}

impl Explored {
    /// `reach[i][j]`: `j` reachable from `i`.
    pub fn reachability(&self) -> Vec<Vec<bool>> {
        let n = self.states.len();
        let mut succ = vec![Vec::new(); n];
        for &(s, _, d) in &self.edges {
            succ[s].push(d);
        }
        (0..n)
            .map(|start| {
                let mut seen = vec![false; n];
                seen[start] = true;
                let mut stack = vec![start];
                while let Some(i) = stack.pop() {
                    for &j in &succ[i] {
                        if !seen[j] {
                            seen[j] = true;
                            stack.push(j);
                        }
                    }
                }
                seen
            })
            .collect()
    }

    /// Definition of a home space: every state reaches some target.
    pub fn is_home_space(&self, targets: &BTreeSet<usize>) -> bool {
        self.reachability()
            .iter()
            .all(|row| targets.iter().any(|&t| row[t]))
    }

    /// Definition of liveness: from every state some reachable state
    /// enables `t`.
    pub fn live(&self, net: &PetriNet) -> BTreeSet<usize> {
        let reach = self.reachability();
        (0..net.transitions().len())
            .filter(|&t| {
                reach.iter().all(|row| {
                    row.iter()
                        .enumerate()
                        .any(|(j, &r)| r && enables(net, &self.states[j], t))
                })
            })
            .collect()
    }

    pub fn index_of(&self, q: &[i64]) -> Option<usize> {
        self.states.iter().position(|s| s == q)
    }
}

/// Exact solve of `sum c_i cols[i] = f`. `None` when inconsistent or when
/// the columns are dependent.
fn solve_independent(cols: &[&[i64]], f: &[i64]) -> Option<Vec<BigRational>> {
    let k = cols.len();
    let d = f.len();
    let mut m: Vec<Vec<BigRational>> = (0..d)
        .map(|r| {
            cols.iter()
                .map(|c| BigRational::from_integer(BigInt::from(c[r])))
                .chain(std::iter::once(BigRational::from_integer(BigInt::from(f[r]))))
                .collect()
        })
        .collect();
    let mut row = 0;
    for col in 0..k {
        let pivot = (row..d).find(|&r| !m[r][col].is_zero())?;
        m.swap(row, pivot);
        let inv = BigRational::one() / m[row][col].clone();
        for x in m[row].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..d {
            if r != row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in 0..=k {
                    let delta = &factor * &m[row][c];
                    m[r][c] = &m[r][c] - delta;
                }
            }
        }
        row += 1;
    }
    if m[row..].iter().any(|r| !r[k].is_zero()) {
        return None;
    }
    Some((0..k).map(|i| m[i][k].clone()).collect())
}

/// Whether `f` is a non-negative rational combination of `members`. By
/// Carathéodory it suffices to try linearly independent subsets; only
/// members whose support lies inside `f`'s can take part.
pub fn in_rational_cone(f: &[i64], members: &[Vec<i64>]) -> bool {
    let sf = support(f);
    let usable: Vec<&[i64]> = members
        .iter()
        .filter(|m| support(m).is_subset(&sf))
        .map(|m| m.as_slice())
        .collect();
    let n = usable.len();
    assert!(n <= 20, "too many candidate members for subset search");
    (0u32..1 << n).any(|mask| {
        let cols: Vec<&[i64]> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| usable[i]).collect();
        if cols.len() > f.len() {
            return false;
        }
        match solve_independent(&cols, f) {
            Some(c) => c.iter().all(|x| !x.is_negative()),
            None => false,
        }
    })
}

/// Corpus of small nets with their initial markings.
pub fn corpus() -> Vec<(PetriNet, Marking)> {
    let mut out = Vec::new();
    for k in 1..=4 {
        out.push(petrinv::casebook_net("tn", &bind(&[("k", k), ("a", k + 1), ("b", 1)])).unwrap());
    }
    for name in ["tel", "tel2"] {
        for (x, y) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
            out.push(petrinv::casebook_net(name, &bind(&[("x", x), ("y", y)])).unwrap());
        }
    }
    out.push(petrinv::casebook_net("twocycles", &BTreeMap::new()).unwrap());
    out.push(split_net());
    for seed in 0..24 {
        out.push(random_net(seed, 6, 5, 2));
    }
    out
}

/// One transition turning `2a` into `b + c`.
pub fn split_net() -> (PetriNet, Marking) {
    PetriNet::builder("split")
        .place("a", 2)
        .place("b", 0)
        .place("c", 0)
        .transition("t", &[("a", 2)], &[("b", 1), ("c", 1)])
        .build()
        .unwrap()
}
