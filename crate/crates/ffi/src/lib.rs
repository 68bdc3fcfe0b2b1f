//! C ABI for `petrinv`.
//!
//! Nets and reachability graphs are opaque handles owned by the caller and
//! released with the matching `_free` function. Every fallible call returns
//! a [`PetrinvStatus`]; on failure `petrinv_last_error` describes the cause.
//! Strings handed out by the library must be released with
//! `petrinv_string_free`.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use petrinv::invariant;
use petrinv::semiflow;
use petrinv::{
    casebook_net, parse_net, parse_predicate, to_pnet, Error, Marking, PetriNet, TransitionGraph,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PetrinvStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    ResourceLimit = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PetrinvSetKind {
    MinimalSupports = 0,
    MinimalSemiflows = 1,
    RationalBasis = 2,
}

/// A net with its initial marking.
pub struct PetrinvNet {
    net: PetriNet,
    q0: Marking,
}

/// A reachability graph built from a net.
pub struct PetrinvGraph {
    graph: TransitionGraph,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(PetrinvStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = if e.is_resource_limit() {
            PetrinvStatus::ResourceLimit
        } else if matches!(e, Error::Io { .. }) {
            PetrinvStatus::Io
        } else {
            PetrinvStatus::InvalidInput
        };
        Failure(status, e.to_string())
    }
}

macro_rules! impl_failure_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::from(Error::from(e))
            }
        }
    )*};
}

impl_failure_from!(
    petrinv::NetError,
    petrinv::SemiflowError,
    petrinv::InvariantError,
    petrinv::GraphError,
    petrinv::PredicateError,
    petrinv::CasebookError
);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PetrinvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PetrinvStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PetrinvStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(PetrinvStatus::NullArgument, format!("`{what}` is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(PetrinvStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

/// A null pointer means no bindings.
unsafe fn read_bindings(p: *const c_char) -> Result<BTreeMap<String, i64>, Failure> {
    if p.is_null() {
        return Ok(BTreeMap::new());
    }
    let text = read_str(p, "bindings_json")?;
    serde_json::from_str(text).map_err(|e| {
        Failure(
            PetrinvStatus::InvalidInput,
            format!("bindings must be a JSON object of integers: {e}"),
        )
    })
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    let c = CString::new(s).map_err(|_| Failure(PetrinvStatus::InvalidInput, "interior NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn write_json(out: *mut *mut c_char, v: &serde_json::Value) -> Result<(), Failure> {
    write_string(out, v.to_string())
}

unsafe fn net_ref<'a>(net: *const PetrinvNet) -> Result<&'a PetrinvNet, Failure> {
    net.as_ref().ok_or_else(|| null("net"))
}

unsafe fn graph_ref<'a>(graph: *const PetrinvGraph) -> Result<&'a PetrinvGraph, Failure> {
    graph.as_ref().ok_or_else(|| null("graph"))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn petrinv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses `.pnet` text. `bindings_json` is a JSON object such as
/// `{"k": 2}` or null.
///
/// # Safety
/// `text` and `bindings_json` must be null or NUL-terminated; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn petrinv_net_parse(
    text: *const c_char,
    bindings_json: *const c_char,
    out: *mut *mut PetrinvNet,
) -> PetrinvStatus {
    guard(|| {
        let text = read_str(text, "text")?;
        let bindings = read_bindings(bindings_json)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (net, q0) = parse_net(text, &bindings)?;
        *out = Box::into_raw(Box::new(PetrinvNet { net, q0 }));
        Ok(())
    })
}

/// Instantiates a casebook entry (`tn`, `tel`, `tel2`, `twocycles`).
///
/// # Safety
/// As for [`petrinv_net_parse`].
#[no_mangle]
pub unsafe extern "C" fn petrinv_net_casebook(
    name: *const c_char,
    bindings_json: *const c_char,
    out: *mut *mut PetrinvNet,
) -> PetrinvStatus {
    guard(|| {
        let name = read_str(name, "name")?;
        let bindings = read_bindings(bindings_json)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (net, q0) = casebook_net(name, &bindings)?;
        *out = Box::into_raw(Box::new(PetrinvNet { net, q0 }));
        Ok(())
    })
}

/// # Safety
/// `net` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn petrinv_net_free(net: *mut PetrinvNet) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// # Safety
/// `net` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn petrinv_net_place_count(net: *const PetrinvNet) -> usize {
    net.as_ref().map_or(0, |n| n.net.dim())
}

/// # Safety
/// `net` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn petrinv_net_transition_count(net: *const PetrinvNet) -> usize {
    net.as_ref().map_or(0, |n| n.net.transitions().len())
}

/// Serializes the net and its initial marking in `.pnet` form.
///
/// # Safety
/// `net` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn petrinv_net_to_pnet(net: *const PetrinvNet, out: *mut *mut c_char) -> PetrinvStatus {
    guard(|| {
        let n = net_ref(net)?;
        write_string(out, to_pnet(&n.net, &n.q0))
    })
}

/// Writes 1 to `out` iff `coords` (length `len`) is a semiflow.
///
/// # Safety
/// `coords` must point to `len` integers; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn petrinv_verify_semiflow(
    net: *const PetrinvNet,
    coords: *const i64,
    len: usize,
    out: *mut bool,
) -> PetrinvStatus {
    guard(|| {
        let n = net_ref(net)?;
        if coords.is_null() && len > 0 {
            return Err(null("coords"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let v = if len == 0 { &[][..] } else { std::slice::from_raw_parts(coords, len) };
        *out = semiflow::verify_semiflow(&n.net, v)?;
        Ok(())
    })
}

/// Generating set as JSON.
///
/// # Safety
/// `net` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn petrinv_semiflows_json(
    net: *const PetrinvNet,
    kind: PetrinvSetKind,
    out: *mut *mut c_char,
) -> PetrinvStatus {
    guard(|| {
        let n = net_ref(net)?;
        let set = match kind {
            PetrinvSetKind::MinimalSupports => semiflow::minimal_support_semiflows(&n.net)?,
            PetrinvSetKind::MinimalSemiflows => semiflow::hilbert_basis(&n.net)?,
            PetrinvSetKind::RationalBasis => semiflow::rational_kernel_basis(&n.net)?,
        };
        write_json(out, &set.to_json())
    })
}

/// Place bounds, structural boundedness and threshold-dead transitions, as
/// JSON, from the minimal-support set.
///
/// # Safety
/// `net` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn petrinv_bounds_json(net: *const PetrinvNet, out: *mut *mut c_char) -> PetrinvStatus {
    guard(|| {
        let n = net_ref(net)?;
        let set = semiflow::minimal_support_semiflows(&n.net)?;
        let report = invariant::bound_report(&n.net, &set, &n.q0)?;
        write_json(out, &serde_json::to_value(report).expect("serializable"))
    })
}

/// Explores at most `max_states` markings. A truncated graph is returned
/// with status `Ok`; queries on it report `ResourceLimit`.
///
/// # Safety
/// `net` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn petrinv_graph_build(
    net: *const PetrinvNet,
    max_states: usize,
    out: *mut *mut PetrinvGraph,
) -> PetrinvStatus {
    guard(|| {
        let n = net_ref(net)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let graph = TransitionGraph::build(&n.net, std::slice::from_ref(&n.q0), max_states)?;
        *out = Box::into_raw(Box::new(PetrinvGraph { graph }));
        Ok(())
    })
}

/// # Safety
/// `graph` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn petrinv_graph_free(graph: *mut PetrinvGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// `graph` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn petrinv_graph_node_count(graph: *const PetrinvGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.graph.node_count())
}

/// # Safety
/// `graph` must be a live handle or null (returns false).
#[no_mangle]
pub unsafe extern "C" fn petrinv_graph_is_complete(graph: *const PetrinvGraph) -> bool {
    graph.as_ref().is_some_and(|g| g.graph.is_complete())
}

/// Decides whether the markings satisfying `predicate` form a home space.
/// `counterexample` (nullable) receives a node index, or -1 when none.
///
/// # Safety
/// `graph` must be a live handle; `predicate` NUL-terminated; `holds`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn petrinv_graph_is_home_space(
    graph: *const PetrinvGraph,
    predicate: *const c_char,
    holds: *mut bool,
    counterexample: *mut isize,
) -> PetrinvStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        let text = read_str(predicate, "predicate")?;
        if holds.is_null() {
            return Err(null("holds"));
        }
        let pred = parse_predicate(text, g.graph.places())?;
        let verdict = g.graph.is_home_space(&pred)?;
        *holds = verdict.holds;
        if let Some(c) = counterexample.as_mut() {
            *c = verdict.counterexample.map_or(-1, |n| n as isize);
        }
        Ok(())
    })
}

/// Live, quasi-live and dead transitions as JSON.
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn petrinv_graph_live_json(graph: *const PetrinvGraph, out: *mut *mut c_char) -> PetrinvStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        let live = g.graph.live_transitions()?;
        let labels = g.graph.labels();
        let names = |s: &std::collections::BTreeSet<usize>| -> Vec<&str> {
            s.iter().map(|&i| labels[i].as_str()).collect()
        };
        write_json(
            out,
            &serde_json::json!({
                "schema_version": 1,
                "net": g.graph.name(),
                "live": names(&live.live),
                "quasi_live": names(&live.quasi_live),
                "dead": names(&live.dead),
            }),
        )
    })
}

/// Graphviz rendering of the graph.
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn petrinv_graph_dot(graph: *const PetrinvGraph, out: *mut *mut c_char) -> PetrinvStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        write_string(out, g.graph.to_dot())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn petrinv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
