//! Variational quantum eigensolver for sparse Hermitian operators.
//!
//! The operators this crate works with are never stored as matrices: they
//! are presented through oracle functions (a neighbor list per row plus an
//! entry lookup), and every algorithm is built against that interface. The
//! pipeline is
//!
//! 1. decompose a d-sparse Hermitian oracle into weighted one-sparse,
//!    self-inverse, Hermitian terms ([`decompose`]),
//! 2. estimate each term's expectation value on an ansatz state with a
//!    Hadamard test, simulated either from the term's matrix action or from
//!    the explicit oracle-query circuit ([`simulator`], [`estimator`]),
//! 3. minimize the weighted sum over ansatz parameters ([`vqe`]).
//!
//! Fermionic second-quantized operators get a direct route that skips the
//! bit decomposition: each monomial plus its conjugate is already one-sparse
//! Hermitian under the Jordan-Wigner encoding ([`fermion`]).
//!
//! Dense linear algebra ([`dense`]) exists for validation and testing at
//! small sizes; nothing in the main pipeline depends on it.

pub mod cli;
pub mod decompose;
pub mod dense;
pub mod error;
pub mod estimator;
pub mod fermion;
pub mod io;
pub mod simulator;
pub mod sparse;
pub mod vqe;

pub use decompose::{
    bit_decompose_one_sparse, choose_num_bits, color_decompose, decompose_sparse, lambda_above,
    magnitude_bit, quantized_magnitude, reconstruct_piece_sum, reconstruct_term_sum, synthesize_oh,
    BitDecompositionPlan, ColorDecomposition, SignOracle, SparseDecomposition,
};
pub use dense::DenseMatrix;
pub use error::{Error, Result};
pub use estimator::{
    allocate_shots, derive_seed, estimate_observable, estimate_observable_exact,
    hadamard_probability, same_preparation, sample_from_probability, sample_term, shot_noise_study,
    uniform_plan, ApplyMode, HadamardTestRecord, Part, PartSelection, ShotAllocation,
    ShotNoisePoint, ShotNoiseStudy, ShotPlan,
};
pub use fermion::{
    apply_monomial, build_pair_terms, monomial_term_count, pair_to_one_sparse,
    parse_monomials_json, ConjugatePairTerm, FockState, LadderKind, LadderMonomial, LadderOp,
};
pub use io::{
    decompose_to_terms, dense_of_operator, load_operator, load_operator_from_path, LoadedOperator,
};
pub use simulator::{
    apply_circuit, apply_term_direct, apply_term_oracle_faithful, AnsatzCircuit, Gate,
    RegisterLayout, StateVector,
};
pub use sparse::{
    BasisIndex, Branch, InvariantCheck, OneSparseHermitian, ParentQueryCost, PhaseClass,
    QueryCounter, QueryCounts, SelfInverseTerm, SparseOracleMatrix, ValidationReport, Weighted,
    WeightedTermList, MAX_DENSE_QUBITS,
};
pub use vqe::{
    optimize, IterationRecord, OptimizationTrace, OptimizerKind, ShotBudget, StopReason, VqeConfig,
};
