//! Place-invariant analysis of Petri nets.
//!
//! Nets are read from the `.pnet` text format or built from the casebook.
//! Semiflows are computed exactly (Farkas elimination, Contejean–Devie
//! Hilbert bases, fraction-free kernels), turned into bounds and dead
//! transitions, and checked against explicit reachability graphs.

pub mod casebook;
pub mod cli;
pub mod invariant;
pub mod linalg;
pub mod net;
pub mod pnet;
pub mod predicate;
pub mod reach;
pub mod report;
pub mod semiflow;

use thiserror::Error;

pub use casebook::{casebook_net, CasebookError, CheckResult};
pub use invariant::{InvariantError, LinearInvariantSystem, MuBound};
pub use net::{Marking, NetBuilder, NetError, PetriNet};
pub use pnet::{parse_net, to_pnet};
pub use predicate::{parse_predicate, PredicateError, StatePredicate};
pub use reach::{GraphError, TransitionGraph};
pub use semiflow::{GeneratingSet, Semiflow, SemiflowError, Semiring, SetKind};

#[derive(Debug, Error)]
pub enum Error {
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
    #[error(transparent)]
    Casebook(#[from] CasebookError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// True when the failure comes from a search or exploration cap.
    pub fn is_resource_limit(&self) -> bool {
        fn semiflow(e: &SemiflowError) -> bool {
            matches!(e, SemiflowError::ResourceLimit { .. })
        }
        fn invariant(e: &InvariantError) -> bool {
            matches!(e, InvariantError::Semiflow(s) if semiflow(s))
        }
        fn graph(e: &GraphError) -> bool {
            matches!(e, GraphError::Incomplete)
        }
        match self {
            Error::Semiflow(e) => semiflow(e),
            Error::Invariant(e) => invariant(e),
            Error::Graph(e) => graph(e),
            Error::Casebook(CasebookError::Semiflow(e)) => semiflow(e),
            Error::Casebook(CasebookError::Invariant(e)) => invariant(e),
            Error::Casebook(CasebookError::Graph(e)) => graph(e),
            _ => false,
        }
    }

    /// 3 for resource limits, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        if self.is_resource_limit() {
            3
        } else {
            2
        }
    }
}
