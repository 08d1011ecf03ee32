//! Second-quantized fermionic operators over Fock occupation states.
//!
//! A Hamiltonian given as ladder-operator monomials needs no matrix and no
//! Pauli expansion: each monomial maps any Fock basis state to (a scaling
//! of) a single Fock state, so a monomial together with its Hermitian
//! conjugate forms a one-sparse Hermitian operator directly. This module
//! pairs up a conjugate-closed monomial list and exposes each pair as a
//! [`OneSparseHermitian`] ready for bit decomposition, skipping the generic
//! d-sparse coloring stage entirely.
//!
//! Sign convention: modes are ordered ascending, and each ladder operator
//! acting on mode p picks up (−1)^(number of occupied modes strictly below
//! p) at the moment it acts. The convention is arbitrary but fixed; tests
//! pin it against independently built dense matrices.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decompose::choose_num_bits;
use crate::error::{Error, Result};
use crate::sparse::{BasisIndex, OneSparseHermitian, MAX_DENSE_QUBITS};

/// Occupation pattern of `num_modes` fermionic modes. Mode p is bit p of
/// the index (mode 0 least significant), so occupation strings and basis
/// indices are in bijection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockState {
    num_modes: usize,
    index: BasisIndex,
}

impl FockState {
    pub fn new(num_modes: usize, index: BasisIndex) -> Result<Self> {
        if num_modes > 60 {
            return Err(Error::BadInput(format!(
                "num_modes {num_modes} out of range"
            )));
        }
        if index >= (1usize << num_modes) {
            return Err(Error::BadInput(format!(
                "Fock index {index} does not fit in {num_modes} modes"
            )));
        }
        Ok(FockState { num_modes, index })
    }

    /// The all-empty state.
    pub fn vacuum(num_modes: usize) -> Result<Self> {
        Self::new(num_modes, 0)
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn index(&self) -> BasisIndex {
        self.index
    }

    pub fn occupied(&self, mode: usize) -> bool {
        (self.index >> mode) & 1 == 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LadderKind {
    Create,
    Annihilate,
}

impl LadderKind {
    fn flipped(self) -> LadderKind {
        match self {
            LadderKind::Create => LadderKind::Annihilate,
            LadderKind::Annihilate => LadderKind::Create,
        }
    }
}

/// One creation or annihilation operator acting on a mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct LadderOp {
    pub kind: LadderKind,
    pub mode: usize,
}

impl std::fmt::Display for LadderOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            LadderKind::Create => write!(f, "+{}", self.mode),
            LadderKind::Annihilate => write!(f, "-{}", self.mode),
        }
    }
}

/// A coefficient times an ordered product of ladder operators. `ops` is
/// written left to right, so the last element acts first.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderMonomial {
    pub coefficient: Complex64,
    pub ops: Vec<LadderOp>,
}

impl LadderMonomial {
    pub fn new(coefficient: Complex64, ops: Vec<LadderOp>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::BadInput("monomial has no ladder operators".into()));
        }
        if !coefficient.re.is_finite() || !coefficient.im.is_finite() {
            return Err(Error::BadInput("monomial coefficient is not finite".into()));
        }
        if coefficient == Complex64::new(0.0, 0.0) {
            return Err(Error::BadInput("monomial coefficient is zero".into()));
        }
        Ok(LadderMonomial { coefficient, ops })
    }

    /// Hermitian conjugate: conjugated coefficient, reversed operator order
    /// with creations and annihilations exchanged.
    pub fn adjoint(&self) -> LadderMonomial {
        LadderMonomial {
            coefficient: self.coefficient.conj(),
            ops: self
                .ops
                .iter()
                .rev()
                .map(|op| LadderOp {
                    kind: op.kind.flipped(),
                    mode: op.mode,
                })
                .collect(),
        }
    }

    fn ops_text(&self) -> String {
        self.ops
            .iter()
            .map(|op| op.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Apply a monomial to a Fock state: each operator acts right to left,
/// contributing (−1)^(occupied modes strictly below its mode) at action
/// time. Creating an occupied mode or annihilating an empty one kills the
/// state, reported as `None`; otherwise the result is the accumulated sign
/// times the monomial's coefficient along with the final state.
pub fn apply_monomial(m: &LadderMonomial, s: FockState) -> Result<Option<(Complex64, FockState)>> {
    let mut occ = s.index();
    let mut sign = 1i32;
    for op in m.ops.iter().rev() {
        if op.mode >= s.num_modes() {
            return Err(Error::BadInput(format!(
                "operator on mode {} applied to a {}-mode state",
                op.mode,
                s.num_modes()
            )));
        }
        let bit = 1usize << op.mode;
        if (occ & (bit - 1)).count_ones() % 2 == 1 {
            sign = -sign;
        }
        match op.kind {
            LadderKind::Create => {
                if occ & bit != 0 {
                    return Ok(None);
                }
                occ |= bit;
            }
            LadderKind::Annihilate => {
                if occ & bit == 0 {
                    return Ok(None);
                }
                occ &= !bit;
            }
        }
    }
    Ok(Some((
        m.coefficient * sign as f64,
        FockState::new(s.num_modes(), occ)?,
    )))
}

/// A monomial standing for the Hermitian operator it induces: the monomial
/// plus its conjugate, or the monomial alone when it is its own conjugate.
#[derive(Clone, Debug)]
pub struct ConjugatePairTerm {
    pub monomial: LadderMonomial,
    pub is_self_adjoint: bool,
}

/// Group a conjugate-closed monomial list into pair terms, one per
/// conjugate pair and one per self-adjoint monomial. The representative of
/// a pair is the member with the lexicographically smaller operator
/// sequence, so the grouping does not depend on input order.
///
/// Matching is exact: a monomial's conjugate must appear with exactly the
/// conjugated coefficient. Repeated operator sequences are rejected —
/// callers should fold coefficients of like terms first.
pub fn build_pair_terms(monomials: &[LadderMonomial]) -> Result<Vec<ConjugatePairTerm>> {
    for (i, m) in monomials.iter().enumerate() {
        if m.ops.is_empty() {
            return Err(Error::BadInput("monomial has no ladder operators".into()));
        }
        if m.coefficient == Complex64::new(0.0, 0.0)
            || !m.coefficient.re.is_finite()
            || !m.coefficient.im.is_finite()
        {
            return Err(Error::BadInput(format!(
                "monomial {} has coefficient {}",
                m.ops_text(),
                m.coefficient
            )));
        }
        for earlier in &monomials[..i] {
            if earlier.ops == m.ops {
                return Err(Error::DuplicateMonomial(m.ops_text()));
            }
        }
    }

    let mut used = vec![false; monomials.len()];
    let mut terms = Vec::new();
    for i in 0..monomials.len() {
        if used[i] {
            continue;
        }
        let m = &monomials[i];
        let adj = m.adjoint();
        if adj.ops == m.ops {
            if m.coefficient.im != 0.0 {
                return Err(Error::NotConjugateClosed(format!(
                    "self-conjugate monomial {} needs a real coefficient, got {}",
                    m.ops_text(),
                    m.coefficient
                )));
            }
            used[i] = true;
            terms.push(ConjugatePairTerm {
                monomial: m.clone(),
                is_self_adjoint: true,
            });
            continue;
        }
        let partner = (i + 1..monomials.len()).find(|&j| !used[j] && monomials[j].ops == adj.ops);
        match partner {
            Some(j) => {
                if monomials[j].coefficient != adj.coefficient {
                    return Err(Error::NotConjugateClosed(format!(
                        "conjugate of {} appears with coefficient {} instead of {}",
                        m.ops_text(),
                        monomials[j].coefficient,
                        adj.coefficient
                    )));
                }
                used[i] = true;
                used[j] = true;
                let rep = if m.ops <= monomials[j].ops {
                    m
                } else {
                    &monomials[j]
                };
                terms.push(ConjugatePairTerm {
                    monomial: rep.clone(),
                    is_self_adjoint: false,
                });
            }
            None => {
                return Err(Error::NotConjugateClosed(format!(
                    "monomial {} has no conjugate {} in the list",
                    m.ops_text(),
                    adj.ops_text()
                )));
            }
        }
    }
    Ok(terms)
}

/// Combined action of the pair (monomial and, unless self-adjoint, its
/// conjugate) on basis state x: the amplitude and target row of column x's
/// nonzero. Errors when both members act toward different rows, which
/// would break one-sparsity.
fn pair_action(
    m: &LadderMonomial,
    conj: Option<&LadderMonomial>,
    num_modes: usize,
    x: BasisIndex,
) -> Result<Option<(Complex64, BasisIndex)>> {
    let s = match FockState::new(num_modes, x) {
        Ok(s) => s,
        Err(_) => return Ok(None),
    };
    let a = apply_monomial(m, s)?;
    let b = match conj {
        Some(c) => apply_monomial(c, s)?,
        None => None,
    };
    Ok(match (a, b) {
        (None, None) => None,
        (Some((v, y)), None) => Some((v, y.index())),
        (None, Some((w, z))) => Some((w, z.index())),
        (Some((v, y)), Some((w, z))) => {
            if y.index() != z.index() {
                return Err(Error::NotOneSparse {
                    state: x,
                    first: y.index(),
                    second: z.index(),
                });
            }
            Some((v + w, y.index()))
        }
    })
}

/// Net occupation change per mode is fixed by the operator sequence; a
/// monomial can act diagonally only when every mode's creations balance its
/// annihilations.
fn can_act_diagonally(m: &LadderMonomial) -> bool {
    let mut net: std::collections::BTreeMap<usize, i64> = std::collections::BTreeMap::new();
    for op in &m.ops {
        *net.entry(op.mode).or_insert(0) += match op.kind {
            LadderKind::Create => 1,
            LadderKind::Annihilate => -1,
        };
    }
    net.values().all(|&n| n == 0)
}

/// Present a pair term as a one-sparse Hermitian operator on `num_modes`
/// qubits: `partner(x)` is the row that whichever member acts on x reaches
/// (x itself when both kill the state), and `entry(x)` the matching matrix
/// element. Oracle queries apply the monomial on demand; nothing is
/// materialized. At desk scale the whole basis is scanned up front so a
/// one-sparsity violation surfaces here rather than at query time.
pub fn pair_to_one_sparse(t: &ConjugatePairTerm, num_modes: usize) -> Result<OneSparseHermitian> {
    if num_modes > 60 {
        return Err(Error::BadInput(format!(
            "num_modes {num_modes} out of range"
        )));
    }
    for op in &t.monomial.ops {
        if op.mode >= num_modes {
            return Err(Error::BadInput(format!(
                "monomial acts on mode {} but the system has {num_modes} modes",
                op.mode
            )));
        }
    }
    if t.monomial.coefficient == Complex64::new(0.0, 0.0) {
        return Err(Error::BadInput("pair term has a zero coefficient".into()));
    }
    let m = Arc::new(t.monomial.clone());
    let conj: Option<Arc<LadderMonomial>> = if t.is_self_adjoint {
        None
    } else {
        Some(Arc::new(t.monomial.adjoint()))
    };

    let max_norm = if num_modes <= MAX_DENSE_QUBITS {
        let mut max_norm = 0.0f64;
        for x in 0..(1usize << num_modes) {
            if let Some((v, _)) = pair_action(&m, conj.as_deref(), num_modes, x)? {
                max_norm = max_norm.max(v.norm());
            }
        }
        max_norm
    } else {
        // Signs are units, so each member contributes |coefficient|; the
        // two can stack only on a diagonal action.
        let stacking = conj.is_some() && can_act_diagonally(&m);
        t.monomial.coefficient.norm() * if stacking { 2.0 } else { 1.0 }
    };

    let partner = {
        let m = Arc::clone(&m);
        let conj = conj.clone();
        move |x: BasisIndex| match pair_action(&m, conj.as_deref(), num_modes, x) {
            Ok(Some((_, y))) => y,
            _ => x,
        }
    };
    let entry = {
        let m = Arc::clone(&m);
        let conj = conj.clone();
        // Column x's nonzero sits at row y with amplitude v, so row x's
        // nonzero at column y carries the conjugate.
        move |x: BasisIndex| match pair_action(&m, conj.as_deref(), num_modes, x) {
            Ok(Some((v, _))) => v.conj(),
            _ => Complex64::new(0.0, 0.0),
        }
    };
    Ok(OneSparseHermitian::new(num_modes, max_norm, partner, entry))
}

/// Self-inverse term count for an N-monomial Hamiltonian decomposed to
/// accuracy gamma: 2N·⌈log₂(√2·max_norm/γ)⌉ (bit count floored at 1), i.e.
/// 4L terms for each of the N/2 conjugate pairs.
pub fn monomial_term_count(num_monomials: usize, max_norm: f64, gamma: f64) -> Result<usize> {
    Ok(2 * num_monomials * choose_num_bits(max_norm, gamma)?)
}

/// Monomial list file:
/// `{"num_modes": M, "terms": [{"coeff": [re, im], "ops": [["+", p], ["-", q]]}]}`
/// with ops written left to right ("+" creates, "-" annihilates).
#[derive(Serialize, Deserialize)]
struct MonomialFile {
    num_modes: usize,
    terms: Vec<MonomialEntry>,
}

#[derive(Serialize, Deserialize)]
struct MonomialEntry {
    coeff: (f64, f64),
    ops: Vec<(String, usize)>,
}

/// Parse the monomial JSON format, returning the mode count and the terms.
pub fn parse_monomials_json(text: &str) -> Result<(usize, Vec<LadderMonomial>)> {
    let file: MonomialFile =
        serde_json::from_str(text).map_err(|e| Error::BadInput(format!("monomial parse: {e}")))?;
    if file.num_modes > 60 {
        return Err(Error::BadInput(format!(
            "num_modes {} out of range",
            file.num_modes
        )));
    }
    let mut monomials = Vec::with_capacity(file.terms.len());
    for (i, entry) in file.terms.iter().enumerate() {
        let mut ops = Vec::with_capacity(entry.ops.len());
        for (tag, mode) in &entry.ops {
            let kind = match tag.as_str() {
                "+" => LadderKind::Create,
                "-" => LadderKind::Annihilate,
                other => {
                    return Err(Error::BadInput(format!(
                        "term {i}: operator tag {other:?} is not \"+\" or \"-\""
                    )));
                }
            };
            if *mode >= file.num_modes {
                return Err(Error::BadInput(format!(
                    "term {i}: mode {mode} outside the {} modes",
                    file.num_modes
                )));
            }
            ops.push(LadderOp { kind, mode: *mode });
        }
        let monomial = LadderMonomial::new(Complex64::new(entry.coeff.0, entry.coeff.1), ops)
            .map_err(|e| Error::BadInput(format!("term {i}: {e}")))?;
        monomials.push(monomial);
    }
    Ok((file.num_modes, monomials))
}
