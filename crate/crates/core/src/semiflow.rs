//! Semiflows (P-invariants) and their generating sets.
//!
//! A semiflow of a net with incidence `C` is an integer place vector `f`
//! with `fᵀC = 0`. Three generating sets of the non-negative semiflows are
//! computed here, all with exact arithmetic:
//!
//! * [`minimal_support_semiflows`]: one canonical vector per minimal
//!   support, by Farkas-style column elimination. Generates over `Q+`.
//! * [`hilbert_basis`]: every componentwise-minimal non-negative semiflow,
//!   by breadth-first Contejean–Devie completion. Generates over `N`.
//! * [`rational_kernel_basis`]: a linearly independent subset spanning the
//!   non-negative semiflows over `Q`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::linalg::{self, IntRow};
use crate::net::PetriNet;

/// Default cap on vectors explored by the Hilbert basis search.
pub const DEFAULT_NODE_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemiflowError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector is not a semiflow of the net")]
    NotASemiflow,
    #[error("vector has negative coordinates")]
    NotNonNegative,
    #[error("zero vector")]
    ZeroVector,
    #[error("place set is not the support of any non-negative semiflow")]
    NoSemiflowWithSupport,
    #[error("Hilbert basis search exceeded {cap} explored vectors")]
    ResourceLimit { cap: usize },
    #[error("decomposition left a non-zero residual; the generating set is incomplete")]
    NonZeroResidual,
    #[error("order is not a permutation of the generating set")]
    InvalidOrder,
    #[error("operation requires a generating set over {expected}, got {found}")]
    WrongSemiring { expected: String, found: Semiring },
    #[error("integer overflow")]
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Semiring {
    #[serde(rename = "N")]
    N,
    #[serde(rename = "Q+")]
    Qplus,
    #[serde(rename = "Q")]
    Q,
}

impl fmt::Display for Semiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semiring::N => "N",
            Semiring::Qplus => "Q+",
            Semiring::Q => "Q",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetKind {
    MinimalSemiflows,
    MinimalSupports,
    RationalBasis,
}

impl SetKind {
    pub fn semiring(self) -> Semiring {
        match self {
            SetKind::MinimalSemiflows => Semiring::N,
            SetKind::MinimalSupports => Semiring::Qplus,
            SetKind::RationalBasis => Semiring::Q,
        }
    }
}

pub type PlaceSet = BTreeSet<usize>;

/// An integer place vector together with its supports.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Semiflow {
    coords: Vec<i64>,
    support: PlaceSet,
    positive_support: PlaceSet,
    negative_support: PlaceSet,
}

impl Semiflow {
    /// Wraps `coords` without checking `fᵀC = 0`; see [`verify_semiflow`].
    pub fn new(coords: Vec<i64>) -> Self {
        let (support, positive_support, negative_support) = supports(&coords);
        Semiflow {
            coords,
            support,
            positive_support,
            negative_support,
        }
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn support(&self) -> &PlaceSet {
        &self.support
    }

    pub fn positive_support(&self) -> &PlaceSet {
        &self.positive_support
    }

    pub fn negative_support(&self) -> &PlaceSet {
        &self.negative_support
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn is_non_negative(&self) -> bool {
        self.negative_support.is_empty()
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Semiflow) -> bool {
        self.coords.iter().zip(&other.coords).all(|(a, b)| a <= b)
    }

    pub fn add(&self, other: &Semiflow) -> Semiflow {
        Semiflow::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, k: i64) -> Semiflow {
        Semiflow::new(self.coords.iter().map(|a| a * k).collect())
    }
}

impl Serialize for Semiflow {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coords.serialize(s)
    }
}

/// `(‖v‖, ‖v‖₊, ‖v‖₋)`.
pub fn supports(v: &[i64]) -> (PlaceSet, PlaceSet, PlaceSet) {
    let positive: PlaceSet = (0..v.len()).filter(|&i| v[i] > 0).collect();
    let negative: PlaceSet = (0..v.len()).filter(|&i| v[i] < 0).collect();
    let support = positive.union(&negative).copied().collect();
    (support, positive, negative)
}

/// Dot product that widens to `BigInt` when `i128` would overflow.
pub(crate) fn dot(a: &[i64], b: &[i64]) -> BigInt {
    let mut acc: i128 = 0;
    for (&x, &y) in a.iter().zip(b) {
        match acc.checked_add(x as i128 * y as i128) {
            Some(v) => acc = v,
            None => {
                return a
                    .iter()
                    .zip(b)
                    .map(|(&x, &y)| BigInt::from(x) * BigInt::from(y))
                    .sum()
            }
        }
    }
    BigInt::from(acc)
}

fn check_dim(net: &PetriNet, len: usize) -> Result<(), SemiflowError> {
    if len != net.dim() {
        return Err(SemiflowError::DimensionMismatch {
            expected: net.dim(),
            found: len,
        });
    }
    Ok(())
}

/// True iff `vᵀC = 0`.
pub fn verify_semiflow(net: &PetriNet, v: &[i64]) -> Result<bool, SemiflowError> {
    check_dim(net, v.len())?;
    Ok((0..net.transitions().len()).all(|t| dot(v, net.pre_column(t)) == dot(v, net.post_column(t))))
}

/// A finite set of non-negative semiflows tagged with what it generates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratingSet {
    net: String,
    places: Vec<String>,
    members: Vec<Semiflow>,
    kind: SetKind,
}

impl GeneratingSet {
    /// Members are sorted in decreasing lexicographic order and
    /// deduplicated.
    pub fn new(net: &PetriNet, mut members: Vec<Semiflow>, kind: SetKind) -> Self {
        members.sort_by(|a, b| b.coords.cmp(&a.coords));
        members.dedup();
        GeneratingSet {
            net: net.name().to_string(),
            places: net.places().to_vec(),
            members,
            kind,
        }
    }

    pub fn members(&self) -> &[Semiflow] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn kind(&self) -> SetKind {
        self.kind
    }

    pub fn semiring(&self) -> Semiring {
        self.kind.semiring()
    }

    pub fn net_name(&self) -> &str {
        &self.net
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn contains(&self, coords: &[i64]) -> bool {
        self.members.iter().any(|m| m.coords == coords)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "schema_version": 1,
            "net": self.net,
            "semiring": self.semiring(),
            "kind": self.kind,
            "places": self.places,
            "members": self.members,
        })
    }
}

/// Row `t` of the returned matrix is column `t` of the incidence matrix.
fn transposed_incidence(net: &PetriNet) -> Vec<IntRow> {
    (0..net.transitions().len())
        .map(|t| {
            net.post_column(t)
                .iter()
                .zip(net.pre_column(t))
                .map(|(&post, &pre)| BigInt::from(post - pre))
                .collect()
        })
        .collect()
}

fn to_i64(v: &[BigInt]) -> Result<Vec<i64>, SemiflowError> {
    v.iter()
        .map(|x| x.to_i64().ok_or(SemiflowError::Overflow))
        .collect()
}

/// Linearly independent non-negative semiflows spanning the non-negative
/// semiflows over `Q`.
pub fn rational_kernel_basis(net: &PetriNet) -> Result<GeneratingSet, SemiflowError> {
    let d = net.dim();
    let mut basis = Vec::new();
    let mut mixed = false;
    for mut v in linalg::kernel(&transposed_incidence(net), d) {
        if v.iter().all(|x| !x.is_positive()) {
            v.iter_mut().for_each(|x| *x = -&*x);
        }
        if v.iter().any(|x| x.is_negative()) {
            mixed = true;
            break;
        }
        basis.push(Semiflow::new(to_i64(&v)?));
    }
    if mixed {
        // Fall back to an independent subset of the minimal-support
        // semiflows, which span exactly the non-negative part.
        basis.clear();
        let mut rows: Vec<IntRow> = Vec::new();
        for m in minimal_support_semiflows(net)?.members {
            rows.push(linalg::to_big(&m.coords));
            if linalg::rank(&rows, d) < rows.len() {
                rows.pop();
            } else {
                basis.push(m);
            }
        }
    }
    Ok(GeneratingSet::new(net, basis, SetKind::RationalBasis))
}

struct FarkasRow {
    coords: Vec<BigInt>,
    residual: Vec<BigInt>,
    support: PlaceSet,
}

impl FarkasRow {
    fn new(coords: Vec<BigInt>, residual: Vec<BigInt>) -> Self {
        let support = (0..coords.len()).filter(|&i| !coords[i].is_zero()).collect();
        FarkasRow {
            coords,
            residual,
            support,
        }
    }
}

/// Removes rows whose support strictly contains another row's support,
/// and duplicates.
fn prune_non_minimal(rows: Vec<FarkasRow>) -> Vec<FarkasRow> {
    let mut seen = HashSet::new();
    let rows: Vec<FarkasRow> = rows
        .into_iter()
        .filter(|r| seen.insert(r.coords.clone()))
        .collect();
    let keep: Vec<bool> = rows
        .iter()
        .map(|r| {
            !rows
                .iter()
                .any(|o| o.support.len() < r.support.len() && o.support.is_subset(&r.support))
        })
        .collect();
    rows.into_iter()
        .zip(keep)
        .filter_map(|(r, k)| k.then_some(r))
        .collect()
}

/// Canonical (gcd 1) semiflow of every minimal support.
pub fn minimal_support_semiflows(net: &PetriNet) -> Result<GeneratingSet, SemiflowError> {
    let d = net.dim();
    let m = net.transitions().len();
    let incidence = net.incidence();
    let mut rows: Vec<FarkasRow> = (0..d)
        .map(|p| {
            let mut unit = vec![BigInt::zero(); d];
            unit[p] = BigInt::from(1);
            FarkasRow::new(unit, linalg::to_big(&incidence[p]))
        })
        .collect();

    for col in 0..m {
        let (zero, nonzero): (Vec<_>, Vec<_>) =
            rows.into_iter().partition(|r| r.residual[col].is_zero());
        let (pos, neg): (Vec<_>, Vec<_>) =
            nonzero.into_iter().partition(|r| r.residual[col].is_positive());
        let mut next = zero;
        for a in &pos {
            for b in &neg {
                let wa = -&b.residual[col];
                let wb = a.residual[col].clone();
                let mut combined: Vec<BigInt> = a
                    .coords
                    .iter()
                    .chain(&a.residual)
                    .zip(b.coords.iter().chain(&b.residual))
                    .map(|(x, y)| &wa * x + &wb * y)
                    .collect();
                linalg::normalize(&mut combined);
                let residual = combined.split_off(d);
                next.push(FarkasRow::new(combined, residual));
            }
        }
        rows = prune_non_minimal(next);
    }

    let members = rows
        .iter()
        .map(|r| to_i64(&r.coords).map(Semiflow::new))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GeneratingSet::new(net, members, SetKind::MinimalSupports))
}

/// Minimal non-zero solutions in `N^n` of `sum_i x_i * columns[i] = 0`.
///
/// Breadth-first Contejean–Devie completion: a vector `v` with residual
/// `r(v) != 0` is extended by `e_i` only when `<r(v), columns[i]> < 0`;
/// vectors dominated by an already harvested solution are dropped.
pub fn hilbert_basis_of(columns: &[Vec<i64>], cap: usize) -> Result<Vec<Vec<i64>>, SemiflowError> {
    let n = columns.len();
    let mut solutions: Vec<Vec<i64>> = Vec::new();
    let mut frontier: BTreeSet<(Vec<i64>, Vec<i64>)> = (0..n)
        .map(|i| {
            let mut v = vec![0; n];
            v[i] = 1;
            (v, columns[i].clone())
        })
        .collect();
    let mut explored = 0usize;
    let dominated = |sols: &[Vec<i64>], v: &[i64]| {
        sols.iter().any(|s| s.iter().zip(v).all(|(a, b)| a <= b))
    };

    while !frontier.is_empty() {
        explored += frontier.len();
        if explored > cap {
            return Err(SemiflowError::ResourceLimit { cap });
        }
        let mut level_solutions = Vec::new();
        let mut open = Vec::new();
        for (v, r) in frontier {
            if r.iter().all(|&x| x == 0) {
                if !dominated(&solutions, &v) {
                    level_solutions.push(v);
                }
            } else {
                open.push((v, r));
            }
        }
        solutions.extend(level_solutions);

        let mut next = BTreeSet::new();
        for (v, r) in &open {
            for (i, column) in columns.iter().enumerate() {
                let scalar: i128 = r.iter().zip(column).map(|(&a, &b)| a as i128 * b as i128).sum();
                if scalar >= 0 {
                    continue;
                }
                let mut w = v.clone();
                w[i] = w[i].checked_add(1).ok_or(SemiflowError::Overflow)?;
                if dominated(&solutions, &w) {
                    continue;
                }
                let residual = r
                    .iter()
                    .zip(column)
                    .map(|(&a, &b)| a.checked_add(b).ok_or(SemiflowError::Overflow))
                    .collect::<Result<Vec<_>, _>>()?;
                next.insert((w, residual));
            }
        }
        frontier = next;
    }
    solutions.sort();
    Ok(solutions)
}

/// All componentwise-minimal non-zero non-negative semiflows.
pub fn hilbert_basis(net: &PetriNet) -> Result<GeneratingSet, SemiflowError> {
    hilbert_basis_with_cap(net, DEFAULT_NODE_CAP)
}

pub fn hilbert_basis_with_cap(net: &PetriNet, cap: usize) -> Result<GeneratingSet, SemiflowError> {
    let members = hilbert_basis_of(&net.incidence(), cap)?
        .into_iter()
        .map(Semiflow::new)
        .collect();
    Ok(GeneratingSet::new(net, members, SetKind::MinimalSemiflows))
}

fn check_non_negative_semiflow(net: &PetriNet, f: &Semiflow) -> Result<(), SemiflowError> {
    if !verify_semiflow(net, f.coords())? {
        return Err(SemiflowError::NotASemiflow);
    }
    if !f.is_non_negative() {
        return Err(SemiflowError::NotNonNegative);
    }
    if f.is_zero() {
        return Err(SemiflowError::ZeroVector);
    }
    Ok(())
}

pub fn is_minimal_semiflow(net: &PetriNet, f: &Semiflow) -> Result<bool, SemiflowError> {
    check_non_negative_semiflow(net, f)?;
    Ok(hilbert_basis(net)?.contains(f.coords()))
}

/// Minimal supports inside `set`; errors unless they cover it exactly,
/// which holds iff `set` is the support of a non-negative semiflow.
pub fn minimal_support_cover(net: &PetriNet, set: &PlaceSet) -> Result<Vec<PlaceSet>, SemiflowError> {
    if let Some(&p) = set.iter().next_back() {
        check_dim(net, net.dim().max(p + 1))?;
    }
    let cover: Vec<PlaceSet> = minimal_support_semiflows(net)?
        .members
        .into_iter()
        .map(|m| m.support)
        .filter(|s| s.is_subset(set))
        .collect();
    let union: PlaceSet = cover.iter().flatten().copied().collect();
    if set.is_empty() || &union != set {
        return Err(SemiflowError::NoSemiflowWithSupport);
    }
    Ok(cover)
}

pub fn is_minimal_support(net: &PetriNet, set: &PlaceSet) -> Result<bool, SemiflowError> {
    let cover = minimal_support_cover(net, set)?;
    Ok(cover.iter().all(|s| s == set))
}

fn check_order(order: &[usize], len: usize) -> Result<(), SemiflowError> {
    let distinct: HashSet<_> = order.iter().copied().collect();
    if order.len() != len || distinct.len() != len || order.iter().any(|&i| i >= len) {
        return Err(SemiflowError::InvalidOrder);
    }
    Ok(())
}

/// Greedy decomposition `f = sum k_i e_i` over a minimal-semiflow set,
/// visiting members in `order`. Each `k_i` is maximal for the residual at
/// that point. Coefficients are returned in visiting order.
pub fn decompose_over_n(f: &Semiflow, set: &GeneratingSet, order: &[usize]) -> Result<Vec<i64>, SemiflowError> {
    if set.semiring() != Semiring::N {
        return Err(SemiflowError::WrongSemiring {
            expected: "N".into(),
            found: set.semiring(),
        });
    }
    if f.coords.len() != set.places.len() {
        return Err(SemiflowError::DimensionMismatch {
            expected: set.places.len(),
            found: f.coords.len(),
        });
    }
    check_order(order, set.members.len())?;
    if !f.is_non_negative() {
        return Err(SemiflowError::NotNonNegative);
    }
    let mut residual = f.coords.clone();
    let mut coefficients = Vec::with_capacity(order.len());
    for &i in order {
        let e = &set.members[i];
        let k = e
            .support
            .iter()
            .map(|&p| residual[p] / e.coords[p])
            .min()
            .unwrap_or(0);
        for &p in &e.support {
            residual[p] -= k * e.coords[p];
        }
        coefficients.push(k);
    }
    if residual.iter().any(|&x| x != 0) {
        return Err(SemiflowError::NonZeroResidual);
    }
    Ok(coefficients)
}

/// Exact rational vector; entries are kept reduced with positive
/// denominators by `BigRational`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalVector(pub Vec<BigRational>);

impl RationalVector {
    pub fn zero(len: usize) -> Self {
        RationalVector(vec![BigRational::zero(); len])
    }

    pub fn from_ints(v: &[i64]) -> Self {
        RationalVector(v.iter().map(|&x| BigRational::from_integer(x.into())).collect())
    }

    pub fn is_non_negative(&self) -> bool {
        self.0.iter().all(|x| !x.is_negative())
    }
}

/// Non-negative rational coefficients (indexed like `set.members()`)
/// expressing `f` over a minimal-support set: repeatedly subtract the
/// largest multiple of a member whose support lies inside the residual's.
pub fn decompose_over_qplus(f: &Semiflow, set: &GeneratingSet) -> Result<RationalVector, SemiflowError> {
    if set.semiring() == Semiring::Q {
        return Err(SemiflowError::WrongSemiring {
            expected: "N or Q+".into(),
            found: set.semiring(),
        });
    }
    if !f.is_non_negative() {
        return Err(SemiflowError::NotNonNegative);
    }
    let mut residual = RationalVector::from_ints(&f.coords);
    let mut coefficients = RationalVector::zero(set.members.len());
    loop {
        let support: PlaceSet = (0..residual.0.len()).filter(|&p| !residual.0[p].is_zero()).collect();
        if support.is_empty() {
            return Ok(coefficients);
        }
        let (i, e) = set
            .members
            .iter()
            .enumerate()
            .find(|(_, e)| e.support.is_subset(&support))
            .ok_or(SemiflowError::NonZeroResidual)?;
        let lambda = e
            .support
            .iter()
            .map(|&p| &residual.0[p] / BigRational::from_integer(e.coords[p].into()))
            .min()
            .expect("non-empty support");
        for &p in &e.support {
            residual.0[p] -= &lambda * BigRational::from_integer(e.coords[p].into());
        }
        if !residual.is_non_negative() {
            return Err(SemiflowError::NonZeroResidual);
        }
        coefficients.0[i] += lambda;
    }
}
