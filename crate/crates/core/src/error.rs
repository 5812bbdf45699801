use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("d must be an odd prime, got {0}")]
    InvalidModulus(u32),
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u32, right: u32 },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("number of qudits must be at least 1")]
    NoQudits,
    #[error("Pauli label must be nonzero")]
    ZeroLabel,
    #[error("Pauli labels do not commute")]
    NotCommuting,
    #[error("subspace is not isotropic")]
    NotIsotropic,
    #[error("outcome assignment is not linear on its subspace")]
    NonlinearOutcome,
    #[error("invalid CNC set: {0}")]
    InvalidCncSet(String),
    #[error("value assignment is not noncontextual: {0}")]
    InconsistentAssignment(String),
    #[error("set is not closed under inference")]
    NotClosed,
    #[error("{what} exceeds cap: needs {needed}, limit {limit}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        limit: u128,
        /// Resumption index for enumerations, when meaningful.
        next_index: Option<u64>,
    },
    #[error("matrix is not symplectic")]
    NotSymplectic,
    #[error("gate {0:?} is unknown")]
    UnknownGate(String),
    #[error("qudit index {index} out of range for n = {n}")]
    QuditOutOfRange { index: usize, n: usize },
    #[error("unbound measurement variable {0:?}")]
    UnboundVariable(String),
    #[error("measurement variable {0:?} assigned twice")]
    DuplicateVariable(String),
    #[error("negative weight {0}")]
    NegativeWeight(f64),
    #[error("weights sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("point is not a Wigner phase point")]
    NotWignerPoint,
    #[error("operator is not a valid density matrix: {0}")]
    InvalidState(String),
    #[error("conditioning on a zero-probability branch")]
    ZeroProbabilityBranch,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("dictionary spans rank {rank} of {required} required dimensions")]
    DictionaryDoesNotSpan { rank: usize, required: usize },
    #[error("exact arithmetic requires d = 3, got {0}")]
    ExactModeUnsupported(u32),
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid_set(msg: impl Into<String>) -> Self {
        Error::InvalidCncSet(msg.into())
    }
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
