//! Operator file loading and the shared file-to-terms route used by the
//! CLI and the C interface.
//!
//! Two input formats, sniffed by their distinguishing key:
//!
//! * COO: `{"num_qubits": n, "max_norm": optional, "entries": [[x, y, re, im], ...]}`
//!   — upper-triangle entries of a sparse Hermitian matrix.
//! * Monomials: `{"num_modes": M, "terms": [{"coeff": [re, im], "ops": [["+", p], ...]}, ...]}`
//!   — a conjugate-closed list of ladder-operator monomials.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::decompose::{
    bit_decompose_one_sparse, choose_num_bits, decompose_sparse, lambda_above,
    BitDecompositionPlan, SparseDecomposition,
};
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::fermion::{build_pair_terms, pair_to_one_sparse, parse_monomials_json, LadderMonomial};
use crate::sparse::{check_dense_guard, SparseOracleMatrix, WeightedTermList};

/// An operator read from a file, in whichever of the two formats it used.
pub enum LoadedOperator {
    Coo(SparseOracleMatrix),
    Monomials {
        num_modes: usize,
        monomials: Vec<LadderMonomial>,
    },
}

impl LoadedOperator {
    pub fn num_qubits(&self) -> usize {
        match self {
            LoadedOperator::Coo(h) => h.num_qubits(),
            LoadedOperator::Monomials { num_modes, .. } => *num_modes,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            LoadedOperator::Coo(_) => "COO",
            LoadedOperator::Monomials { .. } => "MONOMIALS",
        }
    }
}

/// Parse an operator document, deciding the format by whether the root
/// object carries "entries" (COO) or "terms" (monomials).
pub fn load_operator(text: &str) -> Result<LoadedOperator> {
    let root: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::BadInput(format!("operator file is not valid JSON: {e}")))?;
    let object = root
        .as_object()
        .ok_or_else(|| Error::BadInput("operator file root must be a JSON object".into()))?;
    if object.contains_key("entries") {
        Ok(LoadedOperator::Coo(SparseOracleMatrix::from_coo_json(
            text,
        )?))
    } else if object.contains_key("terms") {
        let (num_modes, monomials) = parse_monomials_json(text)?;
        Ok(LoadedOperator::Monomials {
            num_modes,
            monomials,
        })
    } else {
        Err(Error::BadInput(
            "operator file has neither \"entries\" (COO) nor \"terms\" (monomials)".into(),
        ))
    }
}

/// [`load_operator`] for a path, with the file name in any diagnostic.
pub fn load_operator_from_path(path: &Path) -> Result<LoadedOperator> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::BadInput(format!("{}: {e}", path.display())))?;
    load_operator(&text).map_err(|e| match e {
        Error::BadInput(msg) => Error::BadInput(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Decompose a loaded operator into weighted self-inverse terms at target
/// accuracy `gamma`. COO operators go through coloring plus bit
/// decomposition; monomial lists pair up with their conjugates (each pair
/// is already one-sparse) and every pair is bit-decomposed at the shared
/// L = choose_num_bits(max pair max-norm, γ).
pub fn decompose_to_terms(op: &LoadedOperator, gamma: f64) -> Result<SparseDecomposition> {
    match op {
        LoadedOperator::Coo(h) => decompose_sparse(h, gamma),
        LoadedOperator::Monomials {
            num_modes,
            monomials,
        } => {
            let pairs = build_pair_terms(monomials)?;
            let mut pieces = Vec::with_capacity(pairs.len());
            let mut max_norm = 0.0f64;
            for pair in &pairs {
                let piece = Arc::new(pair_to_one_sparse(pair, *num_modes)?);
                max_norm = max_norm.max(piece.max_norm());
                pieces.push(piece);
            }
            let num_bits = choose_num_bits(max_norm, gamma)?;
            let mut terms = Vec::new();
            let mut residual_error_bound = 0.0f64;
            for piece in &pieces {
                let list = bit_decompose_one_sparse(piece, num_bits)?;
                residual_error_bound = residual_error_bound.max(list.residual_error_bound);
                terms.extend(list.terms);
            }
            Ok(SparseDecomposition {
                terms: WeightedTermList {
                    terms,
                    residual_error_bound,
                },
                plan: BitDecompositionPlan {
                    lambda: lambda_above(max_norm),
                    num_bits,
                    target_error: gamma,
                },
                fallback_split_used: false,
                one_sparse_count: pieces.len(),
            })
        }
    }
}

/// Materialize the operator as a dense matrix (desk scale only) for
/// validation and measured-error reporting.
pub fn dense_of_operator(op: &LoadedOperator) -> Result<DenseMatrix> {
    match op {
        LoadedOperator::Coo(h) => h.reconstruct_dense(),
        LoadedOperator::Monomials {
            num_modes,
            monomials,
        } => {
            check_dense_guard(*num_modes)?;
            let pairs = build_pair_terms(monomials)?;
            let mut total = DenseMatrix::zeros(1 << *num_modes);
            for pair in &pairs {
                let piece = pair_to_one_sparse(pair, *num_modes)?;
                total.add_assign_scaled(&piece.reconstruct_dense()?, Complex64::new(1.0, 0.0));
            }
            Ok(total)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::reconstruct_term_sum;

    const COO_X: &str = r#"{"num_qubits": 1, "entries": [[0, 1, 1.0, 0.0]]}"#;
    const HOPPING: &str = r#"{
        "num_modes": 2,
        "terms": [
            {"coeff": [1.0, 0.0], "ops": [["+", 0], ["-", 1]]},
            {"coeff": [1.0, 0.0], "ops": [["+", 1], ["-", 0]]}
        ]
    }"#;

    #[test]
    fn sniffs_both_formats() {
        assert_eq!(load_operator(COO_X).unwrap().kind_name(), "COO");
        assert_eq!(load_operator(HOPPING).unwrap().kind_name(), "MONOMIALS");
        assert!(load_operator(r#"{"foo": 1}"#).is_err());
        assert!(load_operator("[1, 2]").is_err());
    }

    #[test]
    fn coo_route_decomposes_exactly() {
        let op = load_operator(COO_X).unwrap();
        let d = decompose_to_terms(&op, 0.5).unwrap();
        let sum = reconstruct_term_sum(&d.terms, op.num_qubits()).unwrap();
        let input = dense_of_operator(&op).unwrap();
        assert_eq!(sum.max_norm_diff(&input), 0.0);
    }

    #[test]
    fn monomial_route_decomposes_exactly() {
        let op = load_operator(HOPPING).unwrap();
        let d = decompose_to_terms(&op, 1.5).unwrap();
        assert_eq!(d.plan.num_bits, 1);
        assert_eq!(d.one_sparse_count, 1);
        assert!(!d.fallback_split_used);
        assert_eq!(d.terms.terms.len(), 4);
        let sum = reconstruct_term_sum(&d.terms, 2).unwrap();
        let input = dense_of_operator(&op).unwrap();
        assert_eq!(sum.max_norm_diff(&input), 0.0);
    }

    #[test]
    fn monomial_route_uses_shared_bit_count() {
        // Two pairs with different norms still share one L, derived from
        // the larger.
        let text = r#"{
            "num_modes": 2,
            "terms": [
                {"coeff": [0.75, 0.0], "ops": [["+", 0], ["-", 0]]},
                {"coeff": [0.30, 0.0], "ops": [["+", 1], ["-", 1]]}
            ]
        }"#;
        let op = load_operator(text).unwrap();
        let d = decompose_to_terms(&op, 0.1).unwrap();
        let expected = choose_num_bits(0.75, 0.1).unwrap();
        assert_eq!(d.plan.num_bits, expected);
        assert_eq!(d.one_sparse_count, 2);
        assert_eq!(d.terms.terms.len(), 2 * 4 * expected);
        let sum = reconstruct_term_sum(&d.terms, 2).unwrap();
        let input = dense_of_operator(&op).unwrap();
        assert!(sum.max_norm_diff(&input) <= d.terms.residual_error_bound);
    }

    #[test]
    fn path_loading_reports_file_name() {
        let Err(err) = load_operator_from_path(Path::new("/nonexistent/h.json")) else {
            panic!("missing file must not load");
        };
        let msg = format!("{err}");
        assert!(msg.contains("nonexistent"), "{msg}");
    }
}
