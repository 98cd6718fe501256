use thiserror::Error;

/// Errors produced by model construction, validation, and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix had the wrong length for the object it belongs to.
    #[error("dimension mismatch: {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A domain invariant was violated (probability sums, discount range, ...).
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A design vector violates the design space.
    #[error("design vector is infeasible for the design space")]
    InfeasibleDesign,

    /// The feasible set of the problem is empty.
    #[error("problem is infeasible")]
    Infeasible,

    /// Enumeration requires a purely integer, box-bounded design space.
    #[error("design enumeration unsupported: {0}")]
    UnsupportedDesign(String),

    /// The enumeration box exceeds the configured point cap.
    #[error("design box holds more than {cap} points ({points} required)")]
    EnumerationTooLarge { cap: u128, points: u128 },

    /// Big-M bounds require a bounded box wherever costs couple to the design.
    #[error("cannot bound costs: design variable {name} (index {index}) is unbounded but carries a nonzero cost coefficient")]
    UnboundedCostVariable { index: usize, name: String },

    /// The MIP solution failed the re-solve consistency check.
    #[error("big-M parameters too small: MIP objective {mip_objective} disagrees with re-derived objective {rederived_objective}")]
    BigMTooSmall {
        mip_objective: f64,
        rederived_objective: f64,
    },

    /// A solver gave up before proving optimality.
    #[error("solver stopped: {0}")]
    SolverStopped(String),

    /// Branch-and-bound ran into its node or wall-clock budget.
    #[error("solver hit its {what} after {nodes} nodes")]
    SolveLimit { what: &'static str, nodes: u64 },

    /// An application builder would exceed its state-space cap.
    #[error("model too large: {0}")]
    ModelTooLarge(String),

    /// File or schema problems when reading or writing instances.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed JSON.
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    /// A schema-level validation failure with the list of violated checks.
    #[error("validation failed:\n{}", .0.join("\n"))]
    Validation(Vec<String>),
}

pub type Result<T> = std::result::Result<T, Error>;
