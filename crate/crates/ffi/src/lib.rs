//! C interface to the sparse-vqe library.
//!
//! One pattern throughout: objects live behind opaque handles allocated
//! here and released by the matching `_free` function; fallible calls
//! return [`svqe_status`] and leave a description of the failure in a
//! thread-local message readable with [`svqe_last_error_message`]. Panics
//! never cross the boundary: every entry point catches them and reports
//! `SVQE_INTERNAL_PANIC`.
//!
//! The committed header `include/sparse_vqe.h` is generated from this file
//! by cbindgen (see `build.rs`); regenerate it by building this crate.

#![allow(non_camel_case_types)]

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use libc::c_char;

use sparse_vqe::{
    build_pair_terms, decompose_to_terms, estimate_observable, estimate_observable_exact,
    load_operator, optimize, pair_to_one_sparse, uniform_plan, AnsatzCircuit, ApplyMode, Branch,
    Error, LoadedOperator, OptimizationTrace, OptimizerKind, PartSelection, PhaseClass,
    QueryCounter, ShotBudget, SparseDecomposition, StopReason, ValidationReport, VqeConfig,
};

/// Result of every fallible call in this interface.
///
/// The values mirror the CLI's exit codes: 1 means the operator or run
/// violated a library invariant, 2 means malformed input or usage.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum svqe_status {
    /// The call succeeded.
    SVQE_OK = 0,
    /// An invariant check failed (non-Hermitian input, a monomial list
    /// that is not conjugate closed, a pair that is not one-sparse, ...).
    SVQE_VALIDATION_FAILED = 1,
    /// Malformed input: unparseable JSON, an out-of-range argument, a
    /// parameter vector of the wrong length, ...
    SVQE_BAD_INPUT = 2,
    /// A required pointer argument was NULL.
    SVQE_NULL_ARGUMENT = 3,
    /// An internal panic was caught at the boundary. Always a bug in the
    /// library; the message has the panic text.
    SVQE_INTERNAL_PANIC = 4,
}

/// Whether a term flips sign under complex conjugation of the operator
/// entry it came from: REAL terms encode a real-part bit, IMAGINARY terms
/// an imaginary-part bit.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum svqe_phase_class {
    SVQE_PHASE_REAL = 0,
    SVQE_PHASE_IMAGINARY = 1,
}

/// Which of the two self-inverse terms at a bit level this one is. Where
/// an entry's bit is 0 the PLUS and MINUS branches cancel; where it is 1
/// they add.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum svqe_branch {
    SVQE_BRANCH_PLUS = 0,
    SVQE_BRANCH_MINUS = 1,
}

/// How terms act on the simulated state during sampled estimation.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum svqe_apply_mode {
    /// Apply the term's matrix action directly.
    SVQE_APPLY_DIRECT = 0,
    /// Run the explicit oracle-query circuit (ancilla registers, oracle
    /// calls charged to query counters).
    SVQE_APPLY_ORACLE_FAITHFUL = 1,
}

/// Outer-loop optimizer.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum svqe_optimizer {
    SVQE_OPTIMIZER_SIMPLEX = 0,
    SVQE_OPTIMIZER_SPSA = 1,
}

/// Why an optimization run stopped.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum svqe_stop_reason {
    /// Best energy stopped improving by `f_tol` for the patience window.
    SVQE_STOP_TOLERANCE = 0,
    /// Evaluation budget exhausted first.
    SVQE_STOP_MAX_ITERS = 1,
    /// The optimizer's working set collapsed below machine resolution
    /// before the tolerance rule fired.
    SVQE_STOP_STALLED = 2,
}

/// Descriptive fields of one emitted term.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct svqe_term_info {
    pub phase_class: svqe_phase_class,
    /// Bit level l >= 1; l = 1 is the most significant.
    pub bit_index: usize,
    pub branch: svqe_branch,
    /// Positive weight of the term in the decomposition sum.
    pub coefficient: f64,
}

/// Settings for [`svqe_vqe_run`]. Fill with [`svqe_vqe_options_defaults`]
/// first and then override fields as needed; enum fields must hold
/// declared enum values.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct svqe_vqe_options {
    pub optimizer: svqe_optimizer,
    pub mode: svqe_apply_mode,
    /// Shots per term and evaluation; 0 selects the exact objective.
    pub shots_per_term: u64,
    /// Maximum number of objective evaluations across all restarts.
    pub max_iters: u64,
    /// Minimum best-energy improvement that counts as progress.
    pub f_tol: f64,
    /// Seed for starting points and (in sampled runs) shot noise.
    pub seed: u64,
    /// Independent repeats from fresh starting points.
    pub restarts: u64,
}

/// A parsed operator: either a COO sparse Hermitian matrix or a
/// conjugate-closed ladder-monomial list.
pub struct svqe_operator {
    inner: LoadedOperator,
}

/// A decomposition of an operator into positively weighted one-sparse,
/// self-inverse, Hermitian terms.
pub struct svqe_terms {
    inner: SparseDecomposition,
    num_qubits: usize,
}

/// A parameterized preparation circuit.
pub struct svqe_ansatz {
    inner: AnsatzCircuit,
}

/// Everything one optimization run produced.
pub struct svqe_vqe_result {
    inner: OptimizationTrace,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let stripped = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(stripped).unwrap_or_default();
    });
}

fn fail(status: svqe_status, message: impl AsRef<str>) -> svqe_status {
    set_last_error(message.as_ref());
    status
}

fn fail_error(err: &Error) -> svqe_status {
    let status = if err.is_validation_failure() {
        svqe_status::SVQE_VALIDATION_FAILED
    } else {
        svqe_status::SVQE_BAD_INPUT
    };
    fail(status, err.to_string())
}

fn null_argument(name: &str) -> svqe_status {
    fail(
        svqe_status::SVQE_NULL_ARGUMENT,
        format!("{name} must not be NULL"),
    )
}

fn guarded(body: impl FnOnce() -> svqe_status) -> svqe_status {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let text = if let Some(s) = payload.downcast_ref::<&str>() {
                (*s).to_string()
            } else if let Some(s) = payload.downcast_ref::<String>() {
                s.clone()
            } else {
                "unknown panic payload".to_string()
            };
            fail(
                svqe_status::SVQE_INTERNAL_PANIC,
                format!("internal panic: {text}"),
            )
        }
    }
}

unsafe fn read_str<'a>(
    ptr: *const c_char,
    name: &str,
) -> std::result::Result<&'a str, svqe_status> {
    if ptr.is_null() {
        return Err(null_argument(name));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        fail(
            svqe_status::SVQE_BAD_INPUT,
            format!("{name} is not valid UTF-8"),
        )
    })
}

unsafe fn read_f64_slice<'a>(
    ptr: *const f64,
    len: usize,
    name: &str,
) -> std::result::Result<&'a [f64], svqe_status> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null_argument(name));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// First failing invariant check in a report, rendered for the error
/// message.
fn first_failure(scope: &str, report: &ValidationReport) -> Option<String> {
    report.checks.iter().find(|c| !c.passed).map(|c| {
        let mut text = format!("{scope}: check \"{}\" failed", c.name);
        if let Some(example) = &c.counterexample {
            text.push_str(&format!(" ({example})"));
        }
        text
    })
}

fn validate_loaded(op: &LoadedOperator) -> std::result::Result<Option<String>, Error> {
    match op {
        LoadedOperator::Coo(h) => Ok(first_failure("oracle", &h.validate()?)),
        LoadedOperator::Monomials {
            num_modes,
            monomials,
        } => {
            let pairs = build_pair_terms(monomials)?;
            for (i, pair) in pairs.iter().enumerate() {
                let piece = pair_to_one_sparse(pair, *num_modes)?;
                if let Some(text) = first_failure(&format!("pair {i}"), &piece.validate()?) {
                    return Ok(Some(text));
                }
            }
            Ok(None)
        }
    }
}

/// Version of this library as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn svqe_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the most recent failing call on this thread, or an empty
/// string if none has failed yet. The pointer stays valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn svqe_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parse an operator document (JSON text). The format is decided by the
/// root object's keys: "entries" means a COO sparse matrix, "terms" a
/// ladder-monomial list. On success `*out` owns the new handle.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must point to writable
/// memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn svqe_operator_parse(
    json: *const c_char,
    out: *mut *mut svqe_operator,
) -> svqe_status {
    guarded(|| {
        let Some(out) = out.as_mut() else {
            return null_argument("out");
        };
        let text = match read_str(json, "json") {
            Ok(text) => text,
            Err(status) => return status,
        };
        match load_operator(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(svqe_operator { inner }));
                svqe_status::SVQE_OK
            }
            Err(err) => fail_error(&err),
        }
    })
}

/// Number of qubits the operator acts on (for monomial lists, the number
/// of fermionic modes). Returns 0 if `op` is NULL.
///
/// # Safety
/// `op` must be NULL or a live handle from [`svqe_operator_parse`].
#[no_mangle]
pub unsafe extern "C" fn svqe_operator_num_qubits(op: *const svqe_operator) -> usize {
    op.as_ref().map_or(0, |op| op.inner.num_qubits())
}

/// Run every invariant check the operator's format defines (Hermiticity,
/// sparsity bounds, conjugate closure, one-sparsity of pairs, ...).
/// Returns `SVQE_OK` when all pass; `SVQE_VALIDATION_FAILED` with a
/// message naming the first failing check otherwise.
///
/// # Safety
/// `op` must be a live handle from [`svqe_operator_parse`].
#[no_mangle]
pub unsafe extern "C" fn svqe_operator_validate(op: *const svqe_operator) -> svqe_status {
    guarded(|| {
        let Some(op) = op.as_ref() else {
            return null_argument("op");
        };
        match validate_loaded(&op.inner) {
            Ok(None) => svqe_status::SVQE_OK,
            Ok(Some(text)) => fail(svqe_status::SVQE_VALIDATION_FAILED, text),
            Err(err) => fail_error(&err),
        }
    })
}

/// Release an operator handle. NULL is a no-op.
///
/// # Safety
/// `op` must be NULL or a live handle, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn svqe_operator_free(op: *mut svqe_operator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Decompose an operator into weighted self-inverse terms whose sum
/// reproduces it within `gamma` in max-norm. On success `*out` owns the
/// new handle.
///
/// # Safety
/// `op` must be a live handle; `out` must point to writable memory for
/// one pointer.
#[no_mangle]
pub unsafe extern "C" fn svqe_decompose(
    op: *const svqe_operator,
    gamma: f64,
    out: *mut *mut svqe_terms,
) -> svqe_status {
    guarded(|| {
        let Some(op) = op.as_ref() else {
            return null_argument("op");
        };
        let Some(out) = out.as_mut() else {
            return null_argument("out");
        };
        match decompose_to_terms(&op.inner, gamma) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(svqe_terms {
                    num_qubits: op.inner.num_qubits(),
                    inner,
                }));
                svqe_status::SVQE_OK
            }
            Err(err) => fail_error(&err),
        }
    })
}

/// Number of emitted terms. Returns 0 if `terms` is NULL.
///
/// # Safety
/// `terms` must be NULL or a live handle from [`svqe_decompose`].
#[no_mangle]
pub unsafe extern "C" fn svqe_terms_count(terms: *const svqe_terms) -> usize {
    terms.as_ref().map_or(0, |t| t.inner.terms.terms.len())
}

/// Number of qubits the terms act on. Returns 0 if `terms` is NULL.
///
/// # Safety
/// `terms` must be NULL or a live handle from [`svqe_decompose`].
#[no_mangle]
pub unsafe extern "C" fn svqe_terms_num_qubits(terms: *const svqe_terms) -> usize {
    terms.as_ref().map_or(0, |t| t.num_qubits)
}

/// L, the number of bit levels used per one-sparse piece. Returns 0 if
/// `terms` is NULL.
///
/// # Safety
/// `terms` must be NULL or a live handle from [`svqe_decompose`].
#[no_mangle]
pub unsafe extern "C" fn svqe_terms_num_bits(terms: *const svqe_terms) -> usize {
    terms.as_ref().map_or(0, |t| t.inner.plan.num_bits)
}

/// Lambda, the power-of-two magnitude anchor of the bit decomposition.
/// Returns 0 if `terms` is NULL.
///
/// # Safety
/// `terms` must be NULL or a live handle from [`svqe_decompose`].
#[no_mangle]
pub unsafe extern "C" fn svqe_terms_lambda(terms: *const svqe_terms) -> f64 {
    terms.as_ref().map_or(0.0, |t| t.inner.plan.lambda)
}

/// Guaranteed bound on the max-norm difference between the weighted term
/// sum and the input operator. Returns 0 if `terms` is NULL.
///
/// # Safety
/// `terms` must be NULL or a live handle from [`svqe_decompose`].
#[no_mangle]
pub unsafe extern "C" fn svqe_terms_residual_bound(terms: *const svqe_terms) -> f64 {
    terms
        .as_ref()
        .map_or(0.0, |t| t.inner.terms.residual_error_bound)
}

/// Whether the coloring stage had to split any piece by chain alternation
/// (doubling that piece's term budget). Returns false if `terms` is NULL.
///
/// # Safety
/// `terms` must be NULL or a live handle from [`svqe_decompose`].
#[no_mangle]
pub unsafe extern "C" fn svqe_terms_fallback_split_used(terms: *const svqe_terms) -> bool {
    terms.as_ref().is_some_and(|t| t.inner.fallback_split_used)
}

/// Descriptive fields of the term at `index` (in emission order).
///
/// # Safety
/// `terms` must be a live handle; `out` must point to writable memory for
/// one `svqe_term_info`.
#[no_mangle]
pub unsafe extern "C" fn svqe_terms_info(
    terms: *const svqe_terms,
    index: usize,
    out: *mut svqe_term_info,
) -> svqe_status {
    guarded(|| {
        let Some(terms) = terms.as_ref() else {
            return null_argument("terms");
        };
        let Some(out) = out.as_mut() else {
            return null_argument("out");
        };
        let list = &terms.inner.terms.terms;
        let Some(weighted) = list.get(index) else {
            return fail(
                svqe_status::SVQE_BAD_INPUT,
                format!("term index {index} out of range ({} terms)", list.len()),
            );
        };
        *out = svqe_term_info {
            phase_class: match weighted.term.phase_class() {
                PhaseClass::Real => svqe_phase_class::SVQE_PHASE_REAL,
                PhaseClass::Imaginary => svqe_phase_class::SVQE_PHASE_IMAGINARY,
            },
            bit_index: weighted.term.bit_index(),
            branch: match weighted.term.branch() {
                Branch::Plus => svqe_branch::SVQE_BRANCH_PLUS,
                Branch::Minus => svqe_branch::SVQE_BRANCH_MINUS,
            },
            coefficient: weighted.coefficient,
        };
        svqe_status::SVQE_OK
    })
}

/// Release a terms handle. NULL is a no-op.
///
/// # Safety
/// `terms` must be NULL or a live handle, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn svqe_terms_free(terms: *mut svqe_terms) {
    if !terms.is_null() {
        drop(Box::from_raw(terms));
    }
}

/// Build an ansatz circuit from a JSON template
/// (`{"layers": k, "entangler": "cnot_ring"|"cz_line", "rotations": ["ry", ...]}`).
/// On success `*out` owns the new handle.
///
/// # Safety
/// `template_json` must be a NUL-terminated string; `out` must point to
/// writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn svqe_ansatz_parse(
    template_json: *const c_char,
    num_qubits: usize,
    out: *mut *mut svqe_ansatz,
) -> svqe_status {
    guarded(|| {
        let Some(out) = out.as_mut() else {
            return null_argument("out");
        };
        let text = match read_str(template_json, "template_json") {
            Ok(text) => text,
            Err(status) => return status,
        };
        match AnsatzCircuit::from_template_json(text, num_qubits) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(svqe_ansatz { inner }));
                svqe_status::SVQE_OK
            }
            Err(err) => fail_error(&err),
        }
    })
}

/// The gate-free ansatz: prepares |0...0> and takes no parameters. On
/// success `*out` owns the new handle.
///
/// # Safety
/// `out` must point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn svqe_ansatz_identity(
    num_qubits: usize,
    out: *mut *mut svqe_ansatz,
) -> svqe_status {
    guarded(|| {
        let Some(out) = out.as_mut() else {
            return null_argument("out");
        };
        if num_qubits == 0 {
            return fail(
                svqe_status::SVQE_BAD_INPUT,
                "ansatz needs at least one qubit",
            );
        }
        *out = Box::into_raw(Box::new(svqe_ansatz {
            inner: AnsatzCircuit::identity(num_qubits),
        }));
        svqe_status::SVQE_OK
    })
}

/// Number of qubits the ansatz acts on. Returns 0 if `ansatz` is NULL.
///
/// # Safety
/// `ansatz` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn svqe_ansatz_num_qubits(ansatz: *const svqe_ansatz) -> usize {
    ansatz.as_ref().map_or(0, |a| a.inner.num_qubits())
}

/// Number of parameters the ansatz takes. Returns 0 if `ansatz` is NULL.
///
/// # Safety
/// `ansatz` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn svqe_ansatz_parameter_count(ansatz: *const svqe_ansatz) -> usize {
    ansatz.as_ref().map_or(0, |a| a.inner.parameter_count())
}

/// Release an ansatz handle. NULL is a no-op.
///
/// # Safety
/// `ansatz` must be NULL or a live handle, and must not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn svqe_ansatz_free(ansatz: *mut svqe_ansatz) {
    if !ansatz.is_null() {
        drop(Box::from_raw(ansatz));
    }
}

/// Exact expectation value of the decomposed operator in the state the
/// ansatz prepares at `theta` (no sampling). `theta_len` must equal the
/// ansatz parameter count.
///
/// # Safety
/// `terms` and `ansatz` must be live handles; `theta` must point to
/// `theta_len` doubles (or be NULL when `theta_len` is 0); `out_energy`
/// must point to writable memory for one double.
#[no_mangle]
pub unsafe extern "C" fn svqe_expectation_exact(
    terms: *const svqe_terms,
    ansatz: *const svqe_ansatz,
    theta: *const f64,
    theta_len: usize,
    out_energy: *mut f64,
) -> svqe_status {
    guarded(|| {
        let Some(terms) = terms.as_ref() else {
            return null_argument("terms");
        };
        let Some(ansatz) = ansatz.as_ref() else {
            return null_argument("ansatz");
        };
        let Some(out_energy) = out_energy.as_mut() else {
            return null_argument("out_energy");
        };
        let theta = match read_f64_slice(theta, theta_len, "theta") {
            Ok(slice) => slice,
            Err(status) => return status,
        };
        match estimate_observable_exact(
            &terms.inner.terms,
            &ansatz.inner,
            theta,
            &ansatz.inner,
            theta,
        ) {
            Ok(value) => {
                *out_energy = value.re;
                svqe_status::SVQE_OK
            }
            Err(err) => fail_error(&err),
        }
    })
}

/// Sampled expectation value: `shots_per_term` Hadamard-test repetitions
/// for every term, combined with the decomposition weights. Identical
/// arguments and seed give identical results. `out_std_error` may be NULL
/// when the standard error is not wanted.
///
/// # Safety
/// `terms` and `ansatz` must be live handles; `theta` must point to
/// `theta_len` doubles (or be NULL when `theta_len` is 0); `out_energy`
/// must point to writable memory for one double; `out_std_error` must be
/// NULL or point to writable memory for one double.
#[no_mangle]
pub unsafe extern "C" fn svqe_expectation_sampled(
    terms: *const svqe_terms,
    ansatz: *const svqe_ansatz,
    theta: *const f64,
    theta_len: usize,
    shots_per_term: u64,
    seed: u64,
    mode: svqe_apply_mode,
    out_energy: *mut f64,
    out_std_error: *mut f64,
) -> svqe_status {
    guarded(|| {
        let Some(terms) = terms.as_ref() else {
            return null_argument("terms");
        };
        let Some(ansatz) = ansatz.as_ref() else {
            return null_argument("ansatz");
        };
        let Some(out_energy) = out_energy.as_mut() else {
            return null_argument("out_energy");
        };
        let theta = match read_f64_slice(theta, theta_len, "theta") {
            Ok(slice) => slice,
            Err(status) => return status,
        };
        if shots_per_term == 0 {
            return fail(
                svqe_status::SVQE_BAD_INPUT,
                "shots_per_term must be at least 1 (use svqe_expectation_exact for no sampling)",
            );
        }
        let plan = uniform_plan(
            terms.inner.terms.terms.len(),
            shots_per_term,
            PartSelection::ReOnly,
        );
        let counter = QueryCounter::new();
        match estimate_observable(
            &terms.inner.terms,
            &ansatz.inner,
            theta,
            &ansatz.inner,
            theta,
            &plan,
            seed,
            apply_mode_of(mode),
            &counter,
        ) {
            Ok((value, std_error, _records)) => {
                *out_energy = value.re;
                if let Some(out_std_error) = out_std_error.as_mut() {
                    *out_std_error = std_error;
                }
                svqe_status::SVQE_OK
            }
            Err(err) => fail_error(&err),
        }
    })
}

fn apply_mode_of(mode: svqe_apply_mode) -> ApplyMode {
    match mode {
        svqe_apply_mode::SVQE_APPLY_DIRECT => ApplyMode::Direct,
        svqe_apply_mode::SVQE_APPLY_ORACLE_FAITHFUL => ApplyMode::OracleFaithful,
    }
}

/// Fill `*out` with the default options: simplex, exact objective, at
/// most 2000 evaluations, f_tol 1e-9, seed 0, one restart.
///
/// # Safety
/// `out` must point to writable memory for one `svqe_vqe_options`.
#[no_mangle]
pub unsafe extern "C" fn svqe_vqe_options_defaults(out: *mut svqe_vqe_options) -> svqe_status {
    guarded(|| {
        let Some(out) = out.as_mut() else {
            return null_argument("out");
        };
        let defaults = VqeConfig::exact(0);
        *out = svqe_vqe_options {
            optimizer: match defaults.optimizer {
                OptimizerKind::Simplex => svqe_optimizer::SVQE_OPTIMIZER_SIMPLEX,
                OptimizerKind::Spsa => svqe_optimizer::SVQE_OPTIMIZER_SPSA,
            },
            mode: match defaults.mode {
                ApplyMode::Direct => svqe_apply_mode::SVQE_APPLY_DIRECT,
                ApplyMode::OracleFaithful => svqe_apply_mode::SVQE_APPLY_ORACLE_FAITHFUL,
            },
            shots_per_term: match defaults.budget {
                ShotBudget::Exact => 0,
                ShotBudget::PerTerm(shots) => shots,
                ShotBudget::Epsilon(_) => 0,
            },
            max_iters: defaults.max_iters,
            f_tol: defaults.f_tol,
            seed: defaults.seed,
            restarts: defaults.restarts,
        };
        svqe_status::SVQE_OK
    })
}

/// Minimize the expectation value over the ansatz parameters. On success
/// `*out` owns the new result handle.
///
/// # Safety
/// `terms` and `ansatz` must be live handles; `options` must point to a
/// filled `svqe_vqe_options`; `out` must point to writable memory for one
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn svqe_vqe_run(
    terms: *const svqe_terms,
    ansatz: *const svqe_ansatz,
    options: *const svqe_vqe_options,
    out: *mut *mut svqe_vqe_result,
) -> svqe_status {
    guarded(|| {
        let Some(terms) = terms.as_ref() else {
            return null_argument("terms");
        };
        let Some(ansatz) = ansatz.as_ref() else {
            return null_argument("ansatz");
        };
        let Some(options) = options.as_ref() else {
            return null_argument("options");
        };
        let Some(out) = out.as_mut() else {
            return null_argument("out");
        };
        let config = VqeConfig {
            optimizer: match options.optimizer {
                svqe_optimizer::SVQE_OPTIMIZER_SIMPLEX => OptimizerKind::Simplex,
                svqe_optimizer::SVQE_OPTIMIZER_SPSA => OptimizerKind::Spsa,
            },
            max_iters: options.max_iters,
            f_tol: options.f_tol,
            seed: options.seed,
            budget: if options.shots_per_term == 0 {
                ShotBudget::Exact
            } else {
                ShotBudget::PerTerm(options.shots_per_term)
            },
            restarts: options.restarts,
            mode: apply_mode_of(options.mode),
        };
        match optimize(&terms.inner.terms, &ansatz.inner, &config) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(svqe_vqe_result { inner }));
                svqe_status::SVQE_OK
            }
            Err(err) => fail_error(&err),
        }
    })
}

/// Lowest energy any evaluation reached. Returns NaN if `result` is NULL.
///
/// # Safety
/// `result` must be NULL or a live handle from [`svqe_vqe_run`].
#[no_mangle]
pub unsafe extern "C" fn svqe_vqe_result_best_energy(result: *const svqe_vqe_result) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.best_energy)
}

/// Length of the best parameter vector. Returns 0 if `result` is NULL.
///
/// # Safety
/// `result` must be NULL or a live handle from [`svqe_vqe_run`].
#[no_mangle]
pub unsafe extern "C" fn svqe_vqe_result_parameter_count(result: *const svqe_vqe_result) -> usize {
    result.as_ref().map_or(0, |r| r.inner.best_theta.len())
}

/// Copy the best parameter vector into `out`. `len` must equal
/// [`svqe_vqe_result_parameter_count`].
///
/// # Safety
/// `result` must be a live handle; `out` must point to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn svqe_vqe_result_best_theta(
    result: *const svqe_vqe_result,
    out: *mut f64,
    len: usize,
) -> svqe_status {
    guarded(|| {
        let Some(result) = result.as_ref() else {
            return null_argument("result");
        };
        if out.is_null() {
            return null_argument("out");
        }
        let theta = &result.inner.best_theta;
        if len != theta.len() {
            return fail(
                svqe_status::SVQE_BAD_INPUT,
                format!("buffer holds {len} values, result has {}", theta.len()),
            );
        }
        std::ptr::copy_nonoverlapping(theta.as_ptr(), out, len);
        svqe_status::SVQE_OK
    })
}

/// Number of objective evaluations across all restarts. Returns 0 if
/// `result` is NULL.
///
/// # Safety
/// `result` must be NULL or a live handle from [`svqe_vqe_run`].
#[no_mangle]
pub unsafe extern "C" fn svqe_vqe_result_evaluations(result: *const svqe_vqe_result) -> usize {
    result.as_ref().map_or(0, |r| r.inner.iterations.len())
}

/// Copy every evaluation's energy (in evaluation order) into `out`.
/// `len` must equal [`svqe_vqe_result_evaluations`].
///
/// # Safety
/// `result` must be a live handle; `out` must point to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn svqe_vqe_result_energy_trace(
    result: *const svqe_vqe_result,
    out: *mut f64,
    len: usize,
) -> svqe_status {
    guarded(|| {
        let Some(result) = result.as_ref() else {
            return null_argument("result");
        };
        if out.is_null() {
            return null_argument("out");
        }
        let iterations = &result.inner.iterations;
        if len != iterations.len() {
            return fail(
                svqe_status::SVQE_BAD_INPUT,
                format!(
                    "buffer holds {len} values, result has {} evaluations",
                    iterations.len()
                ),
            );
        }
        for (slot, record) in (0..len).zip(iterations) {
            *out.add(slot) = record.energy;
        }
        svqe_status::SVQE_OK
    })
}

/// Whether the run stopped because the tolerance rule fired (rather than
/// exhausting its budget or stalling). Returns false if `result` is NULL.
///
/// # Safety
/// `result` must be NULL or a live handle from [`svqe_vqe_run`].
#[no_mangle]
pub unsafe extern "C" fn svqe_vqe_result_converged(result: *const svqe_vqe_result) -> bool {
    result.as_ref().is_some_and(|r| r.inner.converged)
}

/// Why the run stopped. Returns `SVQE_STOP_STALLED` if `result` is NULL.
///
/// # Safety
/// `result` must be NULL or a live handle from [`svqe_vqe_run`].
#[no_mangle]
pub unsafe extern "C" fn svqe_vqe_result_stop_reason(
    result: *const svqe_vqe_result,
) -> svqe_stop_reason {
    result
        .as_ref()
        .map_or(svqe_stop_reason::SVQE_STOP_STALLED, |r| {
            match r.inner.stop_reason {
                StopReason::Tolerance => svqe_stop_reason::SVQE_STOP_TOLERANCE,
                StopReason::MaxIters => svqe_stop_reason::SVQE_STOP_MAX_ITERS,
                StopReason::Stalled => svqe_stop_reason::SVQE_STOP_STALLED,
            }
        })
}

/// Total shots consumed across all evaluations (0 for exact runs).
/// Returns 0 if `result` is NULL.
///
/// # Safety
/// `result` must be NULL or a live handle from [`svqe_vqe_run`].
#[no_mangle]
pub unsafe extern "C" fn svqe_vqe_result_total_shots(result: *const svqe_vqe_result) -> u64 {
    result.as_ref().map_or(0, |r| {
        r.inner.iterations.last().map_or(0, |i| i.total_shots)
    })
}

/// Release a result handle. NULL is a no-op.
///
/// # Safety
/// `result` must be NULL or a live handle, and must not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn svqe_vqe_result_free(result: *mut svqe_vqe_result) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
