//! Sparse Hermitian operators in the oracle query model.
//!
//! Operators are not stored as matrices. A d-sparse operator is a pair of
//! black-box functions: a neighbor oracle listing the nonzero columns of a
//! row in increasing order, and an entry oracle returning the value at a
//! given position. One-sparse operators specialize the neighbor oracle to a
//! partner involution: every row has at most one nonzero, at column
//! `partner(x)`, and rows with no nonzero report themselves with a zero
//! entry. Everything downstream (term decomposition, circuit application,
//! estimation) consumes operators through these interfaces, so the query
//! counts reported by [`QueryCounter`] reflect what an implementation built
//! on the real oracles would pay.
//!
//! Dense reconstruction and validation are desk-scale debugging aids and are
//! guarded by [`MAX_DENSE_QUBITS`].

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Index of a computational basis state. Valid values are below the
/// operator's dimension `2^num_qubits`.
pub type BasisIndex = usize;

/// Dense reconstruction and exhaustive validation refuse to run above this
/// many qubits.
pub const MAX_DENSE_QUBITS: usize = 12;

pub(crate) fn check_dense_guard(num_qubits: usize) -> Result<()> {
    if num_qubits > MAX_DENSE_QUBITS {
        return Err(Error::DimensionTooLarge {
            qubits: num_qubits,
            limit: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

/// Monotone counters for oracle queries.
///
/// `of_queries` and `oh_queries` count queries made to a one-sparse
/// operator's own neighbor and entry oracles (inverse queries included).
/// When that operator was carved out of a d-sparse parent, every query to it
/// costs queries against the parent's oracles in turn; those are accumulated
/// in `parent_of_queries` and `parent_oh_queries` at the advertised rates
/// (two parent neighbor queries per neighbor query, one parent entry query
/// per entry query).
///
/// Counters only grow. Interior mutability keeps the operators themselves
/// shareable across threads.
#[derive(Debug, Default)]
pub struct QueryCounter {
    of: AtomicU64,
    oh: AtomicU64,
    parent_of: AtomicU64,
    parent_oh: AtomicU64,
}

/// Point-in-time copy of a [`QueryCounter`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct QueryCounts {
    pub of_queries: u64,
    pub oh_queries: u64,
    pub parent_of_queries: u64,
    pub parent_oh_queries: u64,
}

impl QueryCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn of_queries(&self) -> u64 {
        self.of.load(Ordering::Relaxed)
    }

    pub fn oh_queries(&self) -> u64 {
        self.oh.load(Ordering::Relaxed)
    }

    pub fn parent_of_queries(&self) -> u64 {
        self.parent_of.load(Ordering::Relaxed)
    }

    pub fn parent_oh_queries(&self) -> u64 {
        self.parent_oh.load(Ordering::Relaxed)
    }

    pub fn snapshot(&self) -> QueryCounts {
        QueryCounts {
            of_queries: self.of_queries(),
            oh_queries: self.oh_queries(),
            parent_of_queries: self.parent_of_queries(),
            parent_oh_queries: self.parent_oh_queries(),
        }
    }

    pub(crate) fn add_of(&self, n: u64) {
        self.of.fetch_add(n, Ordering::Relaxed);
    }

    pub(crate) fn add_oh(&self, n: u64) {
        self.oh.fetch_add(n, Ordering::Relaxed);
    }

    pub(crate) fn add_parent_of(&self, n: u64) {
        self.parent_of.fetch_add(n, Ordering::Relaxed);
    }

    pub(crate) fn add_parent_oh(&self, n: u64) {
        self.parent_oh.fetch_add(n, Ordering::Relaxed);
    }
}

/// Result of one invariant check inside a [`ValidationReport`].
#[derive(Clone, Debug, Serialize)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub passed: bool,
    /// First counterexample found, if the check failed.
    pub counterexample: Option<String>,
}

/// Outcome of a validation pass. Validation reports every failed invariant
/// with its first counterexample instead of stopping at the first failure.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<InvariantCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &'static str, counterexample: Option<String>) {
        self.checks.push(InvariantCheck {
            name,
            passed: counterexample.is_none(),
            counterexample,
        });
    }
}

type NeighborFn = dyn Fn(BasisIndex, usize) -> Option<BasisIndex> + Send + Sync;
type EntryFn = dyn Fn(BasisIndex, BasisIndex) -> Complex64 + Send + Sync;
type PartnerFn = dyn Fn(BasisIndex) -> BasisIndex + Send + Sync;
type RowEntryFn = dyn Fn(BasisIndex) -> Complex64 + Send + Sync;
type SignFn = dyn Fn(BasisIndex) -> i8 + Send + Sync;

/// d-sparse Hermitian operator presented through its oracles.
///
/// `neighbor(x, i)` returns the column of the i-th nonzero in row `x`
/// (columns strictly increasing in `i`, `None` once the row is exhausted),
/// and `entry(x, y)` returns the value at `(x, y)` (zero where nothing is
/// stored). `max_norm` is a stored bound on the largest entry magnitude; it
/// is metadata supplied at construction, never an oracle query. The operator
/// is immutable after construction and safe to share across threads.
pub struct SparseOracleMatrix {
    num_qubits: usize,
    sparsity: usize,
    max_norm: f64,
    neighbor: Arc<NeighborFn>,
    entry: Arc<EntryFn>,
    /// Canonical upper-triangle entry list when the matrix was built from
    /// explicit entries. Lets structural passes (coloring) enumerate the
    /// nonzeros without a full row scan, so they are not bound by the dense
    /// guard for file-backed operators.
    stored: Option<Arc<Vec<(usize, usize, Complex64)>>>,
}

/// COO input file. Entries are `[row, col, re, im]` with `row <= col`; the
/// mirror entries below the diagonal are implied by Hermiticity.
#[derive(Serialize, Deserialize)]
struct CooFile {
    num_qubits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_norm: Option<f64>,
    entries: Vec<(usize, usize, f64, f64)>,
}

impl SparseOracleMatrix {
    /// Wrap caller-supplied oracles. `sparsity` is the row-nonzero bound d
    /// and `max_norm` bounds the entry magnitudes; neither is checked here
    /// (see [`SparseOracleMatrix::validate`]).
    pub fn new<F, G>(
        num_qubits: usize,
        sparsity: usize,
        max_norm: f64,
        neighbor: F,
        entry: G,
    ) -> Self
    where
        F: Fn(BasisIndex, usize) -> Option<BasisIndex> + Send + Sync + 'static,
        G: Fn(BasisIndex, BasisIndex) -> Complex64 + Send + Sync + 'static,
    {
        SparseOracleMatrix {
            num_qubits,
            sparsity,
            max_norm,
            neighbor: Arc::new(neighbor),
            entry: Arc::new(entry),
            stored: None,
        }
    }

    /// Build from upper-triangle entries `(row, col, value)` with
    /// `row <= col`; mirrors are filled in by Hermiticity. Rejects positions
    /// out of range or below the diagonal, duplicate positions, non-finite
    /// or exactly zero values, and non-real diagonal values. When `max_norm`
    /// is absent the true maximum is computed by a scan.
    pub fn from_entries(
        num_qubits: usize,
        entries: &[(usize, usize, Complex64)],
        max_norm: Option<f64>,
    ) -> Result<Self> {
        let dim = 1usize
            .checked_shl(num_qubits as u32)
            .ok_or_else(|| Error::BadInput(format!("num_qubits {num_qubits} out of range")))?;
        let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); dim];
        let mut scanned_max = 0.0f64;
        for &(x, y, v) in entries {
            if x >= dim || y >= dim {
                return Err(Error::BadInput(format!(
                    "entry ({x}, {y}) is outside dimension {dim}"
                )));
            }
            if x > y {
                return Err(Error::BadInput(format!(
                    "entry ({x}, {y}) is below the diagonal; only row <= col positions \
                     may be stored, with mirrors implied"
                )));
            }
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::BadInput(format!(
                    "entry ({x}, {y}) has a non-finite value"
                )));
            }
            if v == Complex64::new(0.0, 0.0) {
                return Err(Error::BadInput(format!(
                    "entry ({x}, {y}) stores an explicit zero"
                )));
            }
            if x == y && v.im != 0.0 {
                return Err(Error::BadInput(format!(
                    "diagonal entry ({x}, {x}) must be real, got imaginary part {}",
                    v.im
                )));
            }
            if rows[x].iter().any(|&(c, _)| c == y) {
                return Err(Error::BadInput(format!("entry ({x}, {y}) appears twice")));
            }
            rows[x].push((y, v));
            if x != y {
                rows[y].push((x, v.conj()));
            }
            scanned_max = scanned_max.max(v.norm());
        }
        for row in rows.iter_mut() {
            row.sort_by_key(|&(c, _)| c);
        }
        let sparsity = rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut upper: Vec<(usize, usize, Complex64)> = entries.to_vec();
        upper.sort_by_key(|&(x, y, _)| (x, y));
        let rows = Arc::new(rows);
        let rows_n = Arc::clone(&rows);
        let rows_e = Arc::clone(&rows);
        Ok(SparseOracleMatrix {
            num_qubits,
            sparsity,
            max_norm: max_norm.unwrap_or(scanned_max),
            neighbor: Arc::new(move |x, i| rows_n[x].get(i).map(|&(c, _)| c)),
            entry: Arc::new(
                move |x, y| match rows_e[x].binary_search_by_key(&y, |&(c, _)| c) {
                    Ok(pos) => rows_e[x][pos].1,
                    Err(_) => Complex64::new(0.0, 0.0),
                },
            ),
            stored: Some(Arc::new(upper)),
        })
    }

    /// Parse the COO JSON format:
    /// `{"num_qubits": n, "max_norm": m?, "entries": [[row, col, re, im], ...]}`.
    pub fn from_coo_json(text: &str) -> Result<Self> {
        let file: CooFile =
            serde_json::from_str(text).map_err(|e| Error::BadInput(format!("COO parse: {e}")))?;
        if file.num_qubits > 60 {
            return Err(Error::BadInput(format!(
                "num_qubits {} out of range",
                file.num_qubits
            )));
        }
        if let Some(m) = file.max_norm {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::BadInput(format!(
                    "max_norm {m} is not a valid bound"
                )));
            }
        }
        let entries: Vec<(usize, usize, Complex64)> = file
            .entries
            .iter()
            .map(|&(x, y, re, im)| (x, y, Complex64::new(re, im)))
            .collect();
        Self::from_entries(file.num_qubits, &entries, file.max_norm)
    }

    /// Serialize back to the COO JSON format (canonical upper-triangle form,
    /// entries sorted by row then column).
    pub fn to_coo_json(&self) -> Result<String> {
        check_dense_guard(self.num_qubits)?;
        let mut entries = Vec::new();
        for x in 0..self.dimension() {
            for i in 0..self.sparsity {
                match self.neighbor(x, i) {
                    Some(y) if y >= x => {
                        let v = self.entry(x, y);
                        entries.push((x, y, v.re, v.im));
                    }
                    Some(_) => {}
                    None => break,
                }
            }
        }
        let file = CooFile {
            num_qubits: self.num_qubits,
            max_norm: Some(self.max_norm),
            entries,
        };
        serde_json::to_string(&file).map_err(|e| Error::BadInput(e.to_string()))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dimension(&self) -> usize {
        1 << self.num_qubits
    }

    /// Row-nonzero bound d.
    pub fn sparsity(&self) -> usize {
        self.sparsity
    }

    pub fn max_norm(&self) -> f64 {
        self.max_norm
    }

    /// Neighbor oracle: column of the i-th nonzero in row `x`.
    pub fn neighbor(&self, x: BasisIndex, i: usize) -> Option<BasisIndex> {
        (self.neighbor)(x, i)
    }

    /// Entry oracle: value at `(x, y)`, zero where nothing is stored.
    pub fn entry(&self, x: BasisIndex, y: BasisIndex) -> Complex64 {
        (self.entry)(x, y)
    }

    /// Canonical upper-triangle entry list, available when the matrix was
    /// built from explicit entries rather than bare closures.
    pub(crate) fn stored_upper_entries(&self) -> Option<&Arc<Vec<(usize, usize, Complex64)>>> {
        self.stored.as_ref()
    }

    pub(crate) fn entry_fn(&self) -> Arc<EntryFn> {
        Arc::clone(&self.entry)
    }

    /// Materialize the full matrix. Desk-scale only.
    pub fn reconstruct_dense(&self) -> Result<DenseMatrix> {
        check_dense_guard(self.num_qubits)?;
        let dim = self.dimension();
        let mut m = DenseMatrix::zeros(dim);
        for x in 0..dim {
            for i in 0..self.sparsity {
                match self.neighbor(x, i) {
                    Some(y) => m.set(x, y, self.entry(x, y)),
                    None => break,
                }
            }
        }
        Ok(m)
    }

    /// Exhaustively check the oracle invariants. Hermiticity comparisons are
    /// exact; no tolerance is applied anywhere. Desk-scale only.
    pub fn validate(&self) -> Result<ValidationReport> {
        check_dense_guard(self.num_qubits)?;
        let dim = self.dimension();
        let mut report = ValidationReport { checks: Vec::new() };

        // Neighbor lists: a strictly increasing prefix, then absent.
        let mut bad = None;
        'rows: for x in 0..dim {
            let mut prev: Option<usize> = None;
            let mut exhausted = false;
            for i in 0..=self.sparsity {
                match self.neighbor(x, i) {
                    Some(y) => {
                        if i >= self.sparsity {
                            bad = Some(format!(
                                "row {x} lists more than sparsity {} neighbors",
                                self.sparsity
                            ));
                            break 'rows;
                        }
                        if exhausted {
                            bad = Some(format!("row {x} resumes after an absent slot at {i}"));
                            break 'rows;
                        }
                        if y >= dim {
                            bad = Some(format!("row {x} lists column {y} outside dimension"));
                            break 'rows;
                        }
                        if let Some(p) = prev {
                            if y <= p {
                                bad = Some(format!(
                                    "row {x} neighbors not strictly increasing: {p} then {y}"
                                ));
                                break 'rows;
                            }
                        }
                        prev = Some(y);
                    }
                    None => exhausted = true,
                }
            }
        }
        report.push("neighbor enumeration", bad);

        // Enumerated entries are nonzero and every unlisted column is zero.
        let mut bad = None;
        'rows2: for x in 0..dim {
            let mut listed = vec![false; dim];
            for i in 0..self.sparsity {
                match self.neighbor(x, i) {
                    Some(y) => {
                        listed[y] = true;
                        if self.entry(x, y) == Complex64::new(0.0, 0.0) {
                            bad = Some(format!("row {x} lists column {y} but the entry is zero"));
                            break 'rows2;
                        }
                    }
                    None => break,
                }
            }
            for (y, was_listed) in listed.iter().enumerate() {
                if !was_listed && self.entry(x, y) != Complex64::new(0.0, 0.0) {
                    bad = Some(format!(
                        "row {x} has a nonzero entry at unlisted column {y}"
                    ));
                    break 'rows2;
                }
            }
        }
        report.push("neighbor exactness", bad);

        // Hermiticity: entry(x, y) == conj(entry(y, x)), exactly.
        let mut bad = None;
        'rows3: for x in 0..dim {
            for i in 0..self.sparsity {
                match self.neighbor(x, i) {
                    Some(y) => {
                        let v = self.entry(x, y);
                        let w = self.entry(y, x);
                        if v != w.conj() {
                            bad =
                                Some(format!("entry ({x}, {y}) = {v} but entry ({y}, {x}) = {w}"));
                            break 'rows3;
                        }
                    }
                    None => break,
                }
            }
        }
        report.push("hermiticity", bad);

        // Stored max_norm bounds every entry magnitude.
        let mut bad = None;
        'rows4: for x in 0..dim {
            for i in 0..self.sparsity {
                match self.neighbor(x, i) {
                    Some(y) => {
                        let mag = self.entry(x, y).norm();
                        if mag > self.max_norm {
                            bad = Some(format!(
                                "entry ({x}, {y}) has magnitude {mag} above max_norm {}",
                                self.max_norm
                            ));
                            break 'rows4;
                        }
                    }
                    None => break,
                }
            }
        }
        report.push("max_norm bound", bad);

        Ok(report)
    }
}

impl std::fmt::Debug for SparseOracleMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseOracleMatrix")
            .field("num_qubits", &self.num_qubits)
            .field("sparsity", &self.sparsity)
            .field("max_norm", &self.max_norm)
            .finish_non_exhaustive()
    }
}

/// Per-query cost of a one-sparse operator against the oracles of the
/// original operator it descends from. A native operator (built directly
/// from closures, pairs, or fermionic monomials) is its own original, so its
/// rates are 1:1 and the parent counters simply mirror its own queries. A
/// piece carved out of a d-sparse matrix pays the advertised conversion
/// rates instead: two original neighbor queries per neighbor query, one
/// original entry query per entry query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParentQueryCost {
    /// Original-oracle neighbor queries per own neighbor query.
    pub of_per_of: u64,
    /// Original-oracle entry queries per own entry query.
    pub oh_per_oh: u64,
}

impl ParentQueryCost {
    /// Rates for an operator that is its own original.
    pub const NATIVE: ParentQueryCost = ParentQueryCost {
        of_per_of: 1,
        oh_per_oh: 1,
    };

    /// Rates for a piece produced by coloring a d-sparse matrix.
    pub const COLORED: ParentQueryCost = ParentQueryCost {
        of_per_of: 2,
        oh_per_oh: 1,
    };
}

/// One-sparse Hermitian operator.
///
/// `partner` is an involution on basis states; the single nonzero of row `x`
/// sits at `(x, partner(x))` and is returned by `entry(x)`. Rows with no
/// nonzero are filled with `partner(x) = x` and a zero entry so that the
/// partner function is total. Hermiticity pins the mirror value:
/// `entry(x) == conj(entry(partner(x)))`, exactly, and diagonal entries are
/// real.
pub struct OneSparseHermitian {
    num_qubits: usize,
    max_norm: f64,
    partner: Arc<PartnerFn>,
    entry: Arc<RowEntryFn>,
    parent_cost: ParentQueryCost,
}

impl OneSparseHermitian {
    /// Wrap caller-supplied oracles with no parent cost attached.
    pub fn new<P, E>(num_qubits: usize, max_norm: f64, partner: P, entry: E) -> Self
    where
        P: Fn(BasisIndex) -> BasisIndex + Send + Sync + 'static,
        E: Fn(BasisIndex) -> Complex64 + Send + Sync + 'static,
    {
        OneSparseHermitian {
            num_qubits,
            max_norm,
            partner: Arc::new(partner),
            entry: Arc::new(entry),
            parent_cost: ParentQueryCost::NATIVE,
        }
    }

    pub(crate) fn with_parent_cost<P, E>(
        num_qubits: usize,
        max_norm: f64,
        partner: P,
        entry: E,
        parent_cost: ParentQueryCost,
    ) -> Self
    where
        P: Fn(BasisIndex) -> BasisIndex + Send + Sync + 'static,
        E: Fn(BasisIndex) -> Complex64 + Send + Sync + 'static,
    {
        OneSparseHermitian {
            num_qubits,
            max_norm,
            partner: Arc::new(partner),
            entry: Arc::new(entry),
            parent_cost,
        }
    }

    /// Build from explicit nonzero positions `(row, col, value)` with
    /// `row <= col`; mirrors are implied. Every row may appear in at most
    /// one pair. Unused rows become identity-filled.
    pub fn from_pairs(num_qubits: usize, pairs: &[(usize, usize, Complex64)]) -> Result<Self> {
        check_dense_guard(num_qubits)?;
        let dim = 1usize << num_qubits;
        let mut partner: Vec<usize> = (0..dim).collect();
        let mut values = vec![Complex64::new(0.0, 0.0); dim];
        let mut used = vec![false; dim];
        let mut max_norm = 0.0f64;
        for &(x, y, v) in pairs {
            if x >= dim || y >= dim {
                return Err(Error::BadInput(format!(
                    "pair ({x}, {y}) is outside dimension {dim}"
                )));
            }
            if x > y {
                return Err(Error::BadInput(format!(
                    "pair ({x}, {y}) is below the diagonal"
                )));
            }
            if used[x] || used[y] {
                return Err(Error::BadInput(format!(
                    "pair ({x}, {y}) reuses a row already paired; the operator would not \
                     be one-sparse"
                )));
            }
            if x == y && v.im != 0.0 {
                return Err(Error::BadInput(format!(
                    "diagonal value at ({x}, {x}) must be real"
                )));
            }
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::BadInput(format!(
                    "pair ({x}, {y}) has a non-finite value"
                )));
            }
            used[x] = true;
            used[y] = true;
            partner[x] = y;
            partner[y] = x;
            values[x] = v;
            values[y] = v.conj();
            max_norm = max_norm.max(v.norm());
        }
        let partner = Arc::new(partner);
        let values = Arc::new(values);
        let p = Arc::clone(&partner);
        let e = Arc::clone(&values);
        Ok(Self::new(
            num_qubits,
            max_norm,
            move |x| p[x],
            move |x| e[x],
        ))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dimension(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn max_norm(&self) -> f64 {
        self.max_norm
    }

    pub fn parent_cost(&self) -> ParentQueryCost {
        self.parent_cost
    }

    /// Neighbor oracle: the row holding row x's nonzero, or x itself for
    /// empty rows.
    pub fn partner(&self, x: BasisIndex) -> BasisIndex {
        (self.partner)(x)
    }

    /// Entry oracle: the value at `(x, partner(x))`.
    pub fn entry(&self, x: BasisIndex) -> Complex64 {
        (self.entry)(x)
    }

    /// Record one neighbor-oracle query (forward or inverse) against
    /// `counter`, charging the parent at the advertised rate.
    pub fn charge_of_query(&self, counter: &QueryCounter) {
        counter.add_of(1);
        counter.add_parent_of(self.parent_cost.of_per_of);
    }

    /// Record one entry-oracle query (forward or inverse) against `counter`,
    /// charging the parent at the advertised rate.
    pub fn charge_oh_query(&self, counter: &QueryCounter) {
        counter.add_oh(1);
        counter.add_parent_oh(self.parent_cost.oh_per_oh);
    }

    pub(crate) fn partner_arc(&self) -> Arc<PartnerFn> {
        Arc::clone(&self.partner)
    }

    /// Materialize the full matrix. Desk-scale only.
    pub fn reconstruct_dense(&self) -> Result<DenseMatrix> {
        check_dense_guard(self.num_qubits)?;
        let dim = self.dimension();
        let mut m = DenseMatrix::zeros(dim);
        for x in 0..dim {
            let y = self.partner(x);
            let v = self.entry(x);
            if v != Complex64::new(0.0, 0.0) {
                m.set(x, y, v);
            }
        }
        Ok(m)
    }

    /// Exhaustively check involution, Hermiticity (exact), diagonal reality
    /// and the max_norm bound. Desk-scale only.
    pub fn validate(&self) -> Result<ValidationReport> {
        check_dense_guard(self.num_qubits)?;
        let dim = self.dimension();
        let mut report = ValidationReport { checks: Vec::new() };

        let mut bad = None;
        for x in 0..dim {
            let y = self.partner(x);
            if y >= dim {
                bad = Some(format!("partner({x}) = {y} is outside dimension"));
                break;
            }
            if self.partner(y) != x {
                bad = Some(format!(
                    "partner is not an involution: partner({x}) = {y} but partner({y}) = {}",
                    self.partner(y)
                ));
                break;
            }
        }
        report.push("partner involution", bad);

        let mut bad = None;
        for x in 0..dim {
            let y = self.partner(x);
            if y >= dim {
                break;
            }
            let v = self.entry(x);
            let w = self.entry(y);
            if v != w.conj() {
                bad = Some(format!("entry({x}) = {v} but entry({y}) = {w}"));
                break;
            }
            if x == y && v.im != 0.0 {
                bad = Some(format!("diagonal entry({x}) = {v} is not real"));
                break;
            }
        }
        report.push("hermiticity", bad);

        let mut bad = None;
        for x in 0..dim {
            let mag = self.entry(x).norm();
            if mag > self.max_norm {
                bad = Some(format!(
                    "entry({x}) has magnitude {mag} above max_norm {}",
                    self.max_norm
                ));
                break;
            }
        }
        report.push("max_norm bound", bad);

        Ok(report)
    }
}

impl std::fmt::Debug for OneSparseHermitian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OneSparseHermitian")
            .field("num_qubits", &self.num_qubits)
            .field("max_norm", &self.max_norm)
            .field("parent_cost", &self.parent_cost)
            .finish_non_exhaustive()
    }
}

/// Which part of the parent entry a term encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PhaseClass {
    Real,
    Imaginary,
}

/// Fill branch for positions whose selected bit is zero. The two branches of
/// a pair carry opposite fills there, so their sum cancels everywhere the
/// bit is unset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> i8 {
        match self {
            Branch::Plus => 1,
            Branch::Minus => -1,
        }
    }
}

/// Provenance of a term produced by bit decomposition: the one-sparse parent
/// it reads, plus the scale and depth of the bit expansion.
#[derive(Clone)]
pub(crate) struct TermProvenance {
    pub parent: Arc<OneSparseHermitian>,
    pub lambda: f64,
    pub num_bits: usize,
}

/// One-sparse, Hermitian, self-inverse term.
///
/// Shares its parent's partner involution (identity-filled rows included)
/// and stores only a sign per row. The matrix value at `(x, partner(x))` is
/// `sign(x)` for the `Real` class, `sign(x)*i` for off-diagonal `Imaginary`
/// positions, and `sign(x)` (real) on the `Imaginary` diagonal, which keeps
/// the term Hermitian and self-inverse there. `Real` signs are symmetric
/// under the involution; off-diagonal `Imaginary` signs flip.
pub struct SelfInverseTerm {
    num_qubits: usize,
    partner: Arc<PartnerFn>,
    sign: Arc<SignFn>,
    phase_class: PhaseClass,
    bit_index: usize,
    branch: Branch,
    coefficient: f64,
    provenance: Option<TermProvenance>,
}

impl SelfInverseTerm {
    /// Build from explicit partner and sign tables. For hand-constructed
    /// terms; decomposition attaches provenance instead.
    pub fn from_tables(
        num_qubits: usize,
        partner: Vec<usize>,
        sign: Vec<i8>,
        phase_class: PhaseClass,
        bit_index: usize,
        branch: Branch,
        coefficient: f64,
    ) -> Result<Self> {
        let dim = 1usize << num_qubits;
        if partner.len() != dim || sign.len() != dim {
            return Err(Error::BadInput(format!(
                "tables must have length {dim}, got {} and {}",
                partner.len(),
                sign.len()
            )));
        }
        if bit_index == 0 {
            return Err(Error::BadInput("bit_index starts at 1".into()));
        }
        for (x, &s) in sign.iter().enumerate() {
            if s != 1 && s != -1 {
                return Err(Error::BadInput(format!("sign({x}) = {s} is not +1 or -1")));
            }
        }
        for (x, &y) in partner.iter().enumerate() {
            if y >= dim || partner[y] != x {
                return Err(Error::BadInput(format!(
                    "partner table is not an involution at row {x}"
                )));
            }
        }
        let partner = Arc::new(partner);
        let sign = Arc::new(sign);
        let p = Arc::clone(&partner);
        let s = Arc::clone(&sign);
        Ok(SelfInverseTerm {
            num_qubits,
            partner: Arc::new(move |x| p[x]),
            sign: Arc::new(move |x| s[x]),
            phase_class,
            bit_index,
            branch,
            coefficient,
            provenance: None,
        })
    }

    pub(crate) fn derived(
        num_qubits: usize,
        partner: Arc<PartnerFn>,
        sign: Arc<SignFn>,
        phase_class: PhaseClass,
        bit_index: usize,
        branch: Branch,
        coefficient: f64,
        provenance: TermProvenance,
    ) -> Self {
        SelfInverseTerm {
            num_qubits,
            partner,
            sign,
            phase_class,
            bit_index,
            branch,
            coefficient,
            provenance: Some(provenance),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dimension(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn phase_class(&self) -> PhaseClass {
        self.phase_class
    }

    /// Bit position this term encodes, 1 = most significant.
    pub fn bit_index(&self) -> usize {
        self.bit_index
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// Weight of this term in the decomposition; always positive, signs live
    /// inside the term.
    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    /// The one-sparse operator this term was decomposed from, if any.
    pub fn parent(&self) -> Option<&Arc<OneSparseHermitian>> {
        self.provenance.as_ref().map(|p| &p.parent)
    }

    pub(crate) fn provenance(&self) -> Option<&TermProvenance> {
        self.provenance.as_ref()
    }

    pub fn partner(&self, x: BasisIndex) -> BasisIndex {
        (self.partner)(x)
    }

    pub fn sign(&self, x: BasisIndex) -> i8 {
        (self.sign)(x)
    }

    /// Matrix value at `(x, partner(x))`.
    pub fn value(&self, x: BasisIndex) -> Complex64 {
        let s = self.sign(x) as f64;
        match self.phase_class {
            PhaseClass::Real => Complex64::new(s, 0.0),
            PhaseClass::Imaginary => {
                if self.partner(x) == x {
                    Complex64::new(s, 0.0)
                } else {
                    Complex64::new(0.0, s)
                }
            }
        }
    }

    /// Materialize the full matrix. Desk-scale only.
    pub fn reconstruct_dense(&self) -> Result<DenseMatrix> {
        check_dense_guard(self.num_qubits)?;
        let dim = self.dimension();
        let mut m = DenseMatrix::zeros(dim);
        for x in 0..dim {
            m.set(x, self.partner(x), self.value(x));
        }
        Ok(m)
    }

    /// Exhaustively check involution, sign symmetry for the phase class,
    /// Hermiticity and self-inversion. All comparisons are exact: the
    /// entries are units, so the products below are exact in floating
    /// point. Desk-scale only.
    pub fn validate(&self) -> Result<ValidationReport> {
        check_dense_guard(self.num_qubits)?;
        let dim = self.dimension();
        let mut report = ValidationReport { checks: Vec::new() };

        let mut bad = None;
        for x in 0..dim {
            let y = self.partner(x);
            if y >= dim || self.partner(y) != x {
                bad = Some(format!("partner is not an involution at row {x}"));
                break;
            }
        }
        report.push("partner involution", bad);

        let mut bad = None;
        for x in 0..dim {
            let s = self.sign(x);
            if s != 1 && s != -1 {
                bad = Some(format!("sign({x}) = {s} is not +1 or -1"));
                break;
            }
        }
        report.push("signs are units", bad);

        let mut bad = None;
        for x in 0..dim {
            let y = self.partner(x);
            if y >= dim {
                break;
            }
            let ok = match self.phase_class {
                PhaseClass::Real => self.sign(y) == self.sign(x),
                PhaseClass::Imaginary => {
                    if y == x {
                        true
                    } else {
                        self.sign(y) == -self.sign(x)
                    }
                }
            };
            if !ok {
                bad = Some(format!(
                    "sign({x}) = {} and sign({y}) = {} break the {:?} symmetry",
                    self.sign(x),
                    self.sign(y),
                    self.phase_class
                ));
                break;
            }
        }
        report.push("class sign symmetry", bad);

        // G == G^dagger: value(x) == conj(value(partner(x))).
        let mut bad = None;
        for x in 0..dim {
            let y = self.partner(x);
            if y >= dim {
                break;
            }
            if self.value(x) != self.value(y).conj() {
                bad = Some(format!(
                    "value({x}) = {} is not the conjugate of value({y}) = {}",
                    self.value(x),
                    self.value(y)
                ));
                break;
            }
        }
        report.push("hermitian", bad);

        // G^2 == I: the only nonzero of row x in G^2 is value(x)*value(partner(x)).
        let mut bad = None;
        for x in 0..dim {
            let y = self.partner(x);
            if y >= dim {
                break;
            }
            let prod = self.value(x) * self.value(y);
            if prod != Complex64::new(1.0, 0.0) {
                bad = Some(format!("(G^2)[{x},{x}] = {prod}, expected 1"));
                break;
            }
        }
        report.push("self inverse", bad);

        Ok(report)
    }
}

impl std::fmt::Debug for SelfInverseTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SelfInverseTerm")
            .field("num_qubits", &self.num_qubits)
            .field("phase_class", &self.phase_class)
            .field("bit_index", &self.bit_index)
            .field("branch", &self.branch)
            .field("coefficient", &self.coefficient)
            .finish_non_exhaustive()
    }
}

/// Terms with their weights plus the guaranteed bound on what the weighted
/// sum may miss of the decomposed operator.
pub struct WeightedTermList<T> {
    pub terms: Vec<Weighted<T>>,
    pub residual_error_bound: f64,
}

pub struct Weighted<T> {
    pub coefficient: f64,
    pub term: T,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x_coo() -> SparseOracleMatrix {
        SparseOracleMatrix::from_coo_json(r#"{"num_qubits": 1, "entries": [[0, 1, 1.0, 0.0]]}"#)
            .unwrap()
    }

    #[test]
    fn coo_pauli_x_oracles() {
        let h = pauli_x_coo();
        assert_eq!(h.num_qubits(), 1);
        assert_eq!(h.sparsity(), 1);
        assert_eq!(h.max_norm(), 1.0);
        assert_eq!(h.neighbor(0, 0), Some(1));
        assert_eq!(h.neighbor(0, 1), None);
        assert_eq!(h.neighbor(1, 0), Some(0));
        assert_eq!(h.entry(0, 1), Complex64::new(1.0, 0.0));
        assert_eq!(h.entry(1, 0), Complex64::new(1.0, 0.0));
        assert_eq!(h.entry(0, 0), Complex64::new(0.0, 0.0));
        assert!(h.validate().unwrap().passed());
    }

    #[test]
    fn coo_rejects_lower_triangle() {
        let err = SparseOracleMatrix::from_coo_json(
            r#"{"num_qubits": 1, "entries": [[0, 1, 1.0, 0.0], [1, 0, 1.0, 0.0]]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::BadInput(_)));
    }

    #[test]
    fn coo_rejects_duplicates_and_nonfinite() {
        assert!(SparseOracleMatrix::from_coo_json(
            r#"{"num_qubits": 1, "entries": [[0, 1, 1.0, 0.0], [0, 1, 0.5, 0.0]]}"#,
        )
        .is_err());
        assert!(SparseOracleMatrix::from_coo_json(
            r#"{"num_qubits": 1, "entries": [[0, 1, 1e999, 0.0]]}"#,
        )
        .is_err());
    }

    #[test]
    fn coo_rejects_complex_diagonal() {
        assert!(SparseOracleMatrix::from_coo_json(
            r#"{"num_qubits": 1, "entries": [[0, 0, 1.0, 0.5]]}"#,
        )
        .is_err());
    }

    #[test]
    fn stored_max_norm_below_entries_fails_validation_not_parsing() {
        let h = SparseOracleMatrix::from_coo_json(
            r#"{"num_qubits": 1, "max_norm": 0.5, "entries": [[0, 1, 1.0, 0.0]]}"#,
        )
        .unwrap();
        let report = h.validate().unwrap();
        assert!(!report.passed());
        let check = report
            .checks
            .iter()
            .find(|c| c.name == "max_norm bound")
            .unwrap();
        assert!(!check.passed);
        assert!(check.counterexample.is_some());
    }

    #[test]
    fn validation_flags_broken_hermiticity() {
        // Asymmetric oracle: lists (0,1) and (1,0) but with unconjugated values.
        let h = SparseOracleMatrix::new(
            1,
            1,
            1.0,
            |x, i| if i == 0 { Some(1 - x) } else { None },
            |x, _y| {
                if x == 0 {
                    Complex64::new(0.0, 1.0)
                } else {
                    Complex64::new(0.0, 1.0)
                }
            },
        );
        let report = h.validate().unwrap();
        assert!(!report.passed());
        assert!(report
            .checks
            .iter()
            .any(|c| c.name == "hermiticity" && !c.passed));
    }

    #[test]
    fn reconstruct_dense_respects_guard() {
        let h = SparseOracleMatrix::new(13, 0, 0.0, |_, _| None, |_, _| Complex64::new(0.0, 0.0));
        assert!(matches!(
            h.reconstruct_dense(),
            Err(Error::DimensionTooLarge { qubits: 13, .. })
        ));
    }

    #[test]
    fn one_sparse_identity_fill_and_involution() {
        // Single pair (1, 2) on two qubits; rows 0 and 3 are identity filled.
        let h = OneSparseHermitian::from_pairs(2, &[(1, 2, Complex64::new(0.5, -0.25))]).unwrap();
        assert_eq!(h.partner(0), 0);
        assert_eq!(h.partner(1), 2);
        assert_eq!(h.partner(2), 1);
        assert_eq!(h.partner(3), 3);
        assert_eq!(h.entry(0), Complex64::new(0.0, 0.0));
        assert_eq!(h.entry(1), Complex64::new(0.5, -0.25));
        assert_eq!(h.entry(2), Complex64::new(0.5, 0.25));
        assert!(h.validate().unwrap().passed());
        assert_eq!(h.max_norm(), Complex64::new(0.5, -0.25).norm());
        assert_eq!(h.parent_cost(), ParentQueryCost::NATIVE);
    }

    #[test]
    fn one_sparse_rejects_row_reuse() {
        let err = OneSparseHermitian::from_pairs(
            2,
            &[
                (0, 1, Complex64::new(1.0, 0.0)),
                (1, 2, Complex64::new(1.0, 0.0)),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::BadInput(_)));
    }

    #[test]
    fn query_counter_charges_parent_at_advertised_rate() {
        let h = OneSparseHermitian::with_parent_cost(
            1,
            1.0,
            |x| x,
            |_| Complex64::new(0.0, 0.0),
            ParentQueryCost {
                of_per_of: 2,
                oh_per_oh: 1,
            },
        );
        let counter = QueryCounter::new();
        h.charge_of_query(&counter);
        h.charge_of_query(&counter);
        h.charge_oh_query(&counter);
        let counts = counter.snapshot();
        assert_eq!(counts.of_queries, 2);
        assert_eq!(counts.oh_queries, 1);
        assert_eq!(counts.parent_of_queries, 4);
        assert_eq!(counts.parent_oh_queries, 1);
    }

    #[test]
    fn self_inverse_term_pauli_z_tables() {
        let g = SelfInverseTerm::from_tables(
            1,
            vec![0, 1],
            vec![1, -1],
            PhaseClass::Real,
            1,
            Branch::Plus,
            1.0,
        )
        .unwrap();
        let m = g.reconstruct_dense().unwrap();
        assert_eq!(m.get(0, 0), Complex64::new(1.0, 0.0));
        assert_eq!(m.get(1, 1), Complex64::new(-1.0, 0.0));
        assert_eq!(m.get(0, 1), Complex64::new(0.0, 0.0));
        assert!(g.validate().unwrap().passed());
    }

    #[test]
    fn imaginary_class_antisymmetric_signs_validate() {
        // Pauli Y as an imaginary-class term: Y = [[0, -i], [i, 0]].
        let g = SelfInverseTerm::from_tables(
            1,
            vec![1, 0],
            vec![-1, 1],
            PhaseClass::Imaginary,
            1,
            Branch::Plus,
            1.0,
        )
        .unwrap();
        assert_eq!(g.value(0), Complex64::new(0.0, -1.0));
        assert_eq!(g.value(1), Complex64::new(0.0, 1.0));
        assert!(g.validate().unwrap().passed());
    }

    #[test]
    fn imaginary_class_symmetric_signs_fail_validation() {
        let g = SelfInverseTerm::from_tables(
            1,
            vec![1, 0],
            vec![1, 1],
            PhaseClass::Imaginary,
            1,
            Branch::Plus,
            1.0,
        )
        .unwrap();
        let report = g.validate().unwrap();
        assert!(!report.passed());
        assert!(report
            .checks
            .iter()
            .any(|c| c.name == "class sign symmetry" && !c.passed));
    }

    #[test]
    fn coo_round_trip_preserves_entries() {
        let h = pauli_x_coo();
        let text = h.to_coo_json().unwrap();
        let h2 = SparseOracleMatrix::from_coo_json(&text).unwrap();
        assert!(h
            .reconstruct_dense()
            .unwrap()
            .equals_exact(&h2.reconstruct_dense().unwrap()));
    }
}
