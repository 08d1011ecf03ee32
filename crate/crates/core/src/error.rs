use thiserror::Error;

/// Errors shared across the crate.
///
/// Precondition violations surface here rather than panicking so that the
/// CLI and the C bindings can map them onto exit codes and status values.
#[derive(Debug, Error)]
pub enum Error {
    /// A dense reconstruction or scan was requested above the desk-scale
    /// dimension guard.
    #[error("dimension too large: {qubits} qubits exceeds the dense limit of {limit}")]
    DimensionTooLarge { qubits: usize, limit: usize },

    /// A tolerance or shot target that must be positive and finite was not.
    #[error("invalid tolerance: {0} (must be positive and finite)")]
    InvalidTolerance(f64),

    /// A term was paired with a one-sparse operator it was not derived from,
    /// or carries no parent operator at all.
    #[error("mismatched parent: {0}")]
    MismatchedParent(String),

    /// A monomial list cannot be grouped into Hermitian conjugate pairs.
    #[error("monomial list is not conjugate closed: {0}")]
    NotConjugateClosed(String),

    /// The same ladder-operator string appeared twice in one input.
    #[error("duplicate monomial: {0}")]
    DuplicateMonomial(String),

    /// A conjugate pair maps some state to two distinct targets.
    #[error("pair term is not one-sparse: state {state} maps to both {first} and {second}")]
    NotOneSparse {
        state: usize,
        first: usize,
        second: usize,
    },

    /// A circuit or term was applied to a register of the wrong width, or a
    /// state vector lacks the registers an operation needs.
    #[error("register mismatch: {0}")]
    RegisterMismatch(String),

    /// Operands of an estimation request act on different dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A shot plan does not cover every term the estimate needs.
    #[error("incomplete shot plan: {0}")]
    IncompletePlan(String),

    /// An oracle-faithful application started with ancilla registers that
    /// were not in the all-zero state.
    #[error("ancilla registers must be |0> before an oracle-faithful application")]
    AncillaNotZeroed,

    /// An oracle-faithful application failed to restore its ancillas.
    #[error("ancilla registers left entangled after an oracle-faithful application")]
    AncillaResidue,

    /// Malformed input: file contents, flag values, or construction data
    /// that violate a format rule.
    #[error("bad input: {0}")]
    BadInput(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that mean "the operator or run violated a library
    /// invariant" as opposed to malformed input or usage. The CLI maps
    /// these to exit code 1 (everything else gets 2) and the C interface
    /// maps them to its validation-failure status.
    pub fn is_validation_failure(&self) -> bool {
        matches!(
            self,
            Error::NotConjugateClosed(_)
                | Error::NotOneSparse { .. }
                | Error::MismatchedParent(_)
                | Error::AncillaNotZeroed
                | Error::AncillaResidue
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
