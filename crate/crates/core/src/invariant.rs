//! Facts derived from a generating set of semiflows and an initial marking:
//! invariant values, the invariant hyperplane intersection, per-place upper
//! bounds, structural boundedness and threshold-dead transitions.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, IntRow};
use crate::net::{Marking, PetriNet};
use crate::semiflow::{self, GeneratingSet, PlaceSet, Semiflow, SemiflowError, Semiring};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvariantError {
    #[error(transparent)]
    Semiflow(#[from] SemiflowError),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no semiflow of the generating set covers place #{0}; no bound derivable")]
    NoBoundDerivable(usize),
    #[error("bounds need a generating set over N or Q+, got {0}")]
    WrongSemiring(Semiring),
}

fn check_len(expected: usize, found: usize) -> Result<(), InvariantError> {
    if expected != found {
        return Err(InvariantError::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn require_non_negative_semiring(set: &GeneratingSet) -> Result<(), InvariantError> {
    match set.semiring() {
        Semiring::N | Semiring::Qplus => Ok(()),
        other => Err(InvariantError::WrongSemiring(other)),
    }
}

/// `fᵀq`, cross-checked against the difference of the positively and
/// negatively weighted token counts.
pub fn invariant_value(f: &Semiflow, q: &Marking) -> Result<BigInt, InvariantError> {
    check_len(f.coords().len(), q.len())?;
    let value = semiflow::dot(f.coords(), q.as_slice());
    let weighted = |places: &PlaceSet| -> BigInt {
        places
            .iter()
            .map(|&p| BigInt::from(f.coords()[p].unsigned_abs()) * BigInt::from(q.get(p)))
            .sum()
    };
    let differential = weighted(f.positive_support()) - weighted(f.negative_support());
    assert_eq!(value, differential, "invariant value cross-check failed");
    Ok(value)
}

/// The affine set `{q | fᵀq = fᵀq0 for every member f}`, kept symbolic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearInvariantSystem {
    rows: Vec<(Semiflow, BigInt)>,
    origin: Marking,
}

impl LinearInvariantSystem {
    pub fn rows(&self) -> &[(Semiflow, BigInt)] {
        &self.rows
    }

    pub fn origin(&self) -> &Marking {
        &self.origin
    }

    pub fn contains(&self, q: &Marking) -> bool {
        q.len() == self.origin.len()
            && self
                .rows
                .iter()
                .all(|(f, c)| &semiflow::dot(f.coords(), q.as_slice()) == c)
    }

    fn augmented_rows(&self) -> Vec<IntRow> {
        self.rows
            .iter()
            .map(|(f, c)| {
                let mut row = linalg::to_big(f.coords());
                row.push(c.clone());
                row
            })
            .collect()
    }

    /// True iff both systems have the same rational row span once the
    /// constants are appended, i.e. they describe the same affine set.
    pub fn same_affine_set(&self, other: &LinearInvariantSystem) -> bool {
        self.origin.len() == other.origin.len()
            && linalg::same_row_span(
                &self.augmented_rows(),
                &other.augmented_rows(),
                self.origin.len() + 1,
            )
    }
}

pub fn iota(set: &GeneratingSet, q0: &Marking) -> Result<LinearInvariantSystem, InvariantError> {
    check_len(set.places().len(), q0.len())?;
    let rows = set
        .members()
        .iter()
        .map(|f| Ok((f.clone(), invariant_value(f, q0)?)))
        .collect::<Result<_, InvariantError>>()?;
    Ok(LinearInvariantSystem {
        rows,
        origin: q0.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MuBound {
    pub bound: BigRational,
    pub floor: BigInt,
    /// Index of the member attaining the minimum.
    pub witness: usize,
}

/// `min over members e with e(p) > 0 of eᵀq0 / e(p)`.
pub fn mu_bound(set: &GeneratingSet, place: usize, q0: &Marking) -> Result<MuBound, InvariantError> {
    require_non_negative_semiring(set)?;
    check_len(set.places().len(), q0.len())?;
    let mut best: Option<MuBound> = None;
    for (i, e) in set.members().iter().enumerate() {
        let weight = e.coords()[place];
        if weight == 0 {
            continue;
        }
        let bound = BigRational::new(invariant_value(e, q0)?, BigInt::from(weight));
        if best.as_ref().is_none_or(|b| bound < b.bound) {
            best = Some(MuBound {
                floor: bound.numer().div_floor(bound.denom()),
                bound,
                witness: i,
            });
        }
    }
    best.ok_or(InvariantError::NoBoundDerivable(place))
}

/// Union of member supports.
pub fn rho(set: &GeneratingSet) -> PlaceSet {
    set.members()
        .iter()
        .flat_map(|m| m.support().iter().copied())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructuralBounds {
    pub places: PlaceSet,
    /// `(place, f)` with `f >= 0`, `fᵀPre >= fᵀPost` and `f(place) > 0`.
    pub witnesses: Vec<(usize, Vec<i64>)>,
}

/// Places covered by some `f >= 0` with `fᵀPre(·,t) >= fᵀPost(·,t)` for
/// every transition. Solved as a Hilbert basis over the system extended
/// with one slack variable per transition: `fᵀC + s = 0`.
pub fn structurally_bounded_places(net: &PetriNet) -> Result<StructuralBounds, InvariantError> {
    structurally_bounded_places_with_cap(net, semiflow::DEFAULT_NODE_CAP)
}

pub fn structurally_bounded_places_with_cap(
    net: &PetriNet,
    cap: usize,
) -> Result<StructuralBounds, InvariantError> {
    let d = net.dim();
    let m = net.transitions().len();
    let mut columns = net.incidence();
    for t in 0..m {
        let mut slack = vec![0; m];
        slack[t] = 1;
        columns.push(slack);
    }
    let basis = semiflow::hilbert_basis_of(&columns, cap)?;
    let mut witnesses: Vec<(usize, Vec<i64>)> = Vec::new();
    for v in basis {
        let f = &v[..d];
        for p in 0..d {
            if f[p] > 0 && !witnesses.iter().any(|(q, _)| *q == p) {
                witnesses.push((p, f.to_vec()));
            }
        }
    }
    witnesses.sort();
    Ok(StructuralBounds {
        places: witnesses.iter().map(|(p, _)| *p).collect(),
        witnesses,
    })
}

/// Whether every place is structurally bounded, with a strictly positive
/// witness (the sum of the per-place witnesses) when it is.
pub fn is_structurally_bounded(net: &PetriNet) -> Result<(bool, Option<Vec<i64>>), InvariantError> {
    let bounds = structurally_bounded_places(net)?;
    if bounds.places.len() < net.dim() {
        return Ok((false, None));
    }
    let mut sum = vec![0i64; net.dim()];
    for (_, f) in &bounds.witnesses {
        for (s, x) in sum.iter_mut().zip(f) {
            *s = s.checked_add(*x).ok_or(SemiflowError::Overflow)?;
        }
    }
    Ok((true, Some(sum)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThresholdDead {
    pub transition: usize,
    /// Member index with `eᵀq0 < eᵀPre(·,t)`.
    pub witness: usize,
    pub value: BigInt,
    pub threshold: BigInt,
}

/// Transitions that can never fire because some member's invariant value
/// is below its enabling threshold. Sound but not complete: a transition
/// missing from the result may still be dead.
pub fn threshold_dead_transitions(
    net: &PetriNet,
    set: &GeneratingSet,
    q0: &Marking,
) -> Result<Vec<ThresholdDead>, InvariantError> {
    require_non_negative_semiring(set)?;
    check_len(net.dim(), q0.len())?;
    let mut dead = Vec::new();
    for t in 0..net.transitions().len() {
        for (i, e) in set.members().iter().enumerate() {
            let value = invariant_value(e, q0)?;
            let threshold = semiflow::dot(e.coords(), net.pre_column(t));
            if value < threshold {
                dead.push(ThresholdDead {
                    transition: t,
                    witness: i,
                    value,
                    threshold,
                });
                break;
            }
        }
    }
    Ok(dead)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlaceBound {
    pub place: String,
    /// Exact bound as `n` or `n/d`; `None` when no member covers the place.
    pub mu: Option<String>,
    pub floor: Option<BigInt>,
    pub witness: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub schema_version: u32,
    pub net: String,
    pub semiring: Semiring,
    pub places: Vec<PlaceBound>,
    pub rho: Vec<String>,
    pub structurally_bounded_places: Vec<String>,
    pub structural_witnesses: Vec<(String, Vec<i64>)>,
    pub net_structurally_bounded: bool,
    pub structural_witness: Option<Vec<i64>>,
    pub threshold_dead: Vec<(String, usize)>,
}

pub fn bound_report(net: &PetriNet, set: &GeneratingSet, q0: &Marking) -> Result<BoundReport, InvariantError> {
    require_non_negative_semiring(set)?;
    let name = |p: usize| net.places()[p].clone();
    let mut places = Vec::with_capacity(net.dim());
    for p in 0..net.dim() {
        let entry = match mu_bound(set, p, q0) {
            Ok(mu) => PlaceBound {
                place: name(p),
                mu: Some(mu.bound.to_string()),
                floor: Some(mu.floor),
                witness: Some(mu.witness),
            },
            Err(InvariantError::NoBoundDerivable(_)) => PlaceBound {
                place: name(p),
                mu: None,
                floor: None,
                witness: None,
            },
            Err(e) => return Err(e),
        };
        places.push(entry);
    }
    let structural = structurally_bounded_places(net)?;
    let (bounded, witness) = is_structurally_bounded(net)?;
    let dead = threshold_dead_transitions(net, set, q0)?;
    Ok(BoundReport {
        schema_version: 1,
        net: net.name().to_string(),
        semiring: set.semiring(),
        places,
        rho: rho(set).into_iter().map(name).collect(),
        structurally_bounded_places: structural.places.iter().map(|&p| name(p)).collect(),
        structural_witnesses: structural
            .witnesses
            .into_iter()
            .map(|(p, f)| (name(p), f))
            .collect(),
        net_structurally_bounded: bounded,
        structural_witness: witness,
        threshold_dead: dead
            .into_iter()
            .map(|d| (net.transitions()[d.transition].clone(), d.witness))
            .collect(),
    })
}

/// True when `q` lies on every hyperplane `fᵀq = fᵀq0` of both `f` and `g`
/// and therefore on that of `alpha*f + beta*g`.
pub fn combined_invariant_holds(f: &Semiflow, g: &Semiflow, alpha: i64, beta: i64, q0: &Marking, q: &Marking) -> bool {
    let combo: Vec<i64> = f
        .coords()
        .iter()
        .zip(g.coords())
        .map(|(a, b)| alpha * a + beta * b)
        .collect();
    let c = Semiflow::new(combo);
    matches!((invariant_value(&c, q), invariant_value(&c, q0)), (Ok(a), Ok(b)) if a == b)
}
