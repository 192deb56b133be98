use thiserror::Error;

/// Errors surfaced by the certified arithmetic kernel and the higher layers
/// built on it.  Every refusal carries enough context to reproduce the call.
#[derive(Debug, Error)]
pub enum Error {
    /// A textual real-number specification failed to parse or violated a
    /// structural invariant (zero denominator, non-positive radicand, ...).
    #[error("invalid real specification: {0}")]
    InvalidSpec(String),

    /// An enclosure could not be tightened enough to decide a comparison
    /// before hitting the working-precision cap, or a decimal literal was
    /// queried beyond its stated digit budget.
    #[error("precision exhausted while {context} (cap {cap_bits} bits)")]
    PrecisionExhausted { context: String, cap_bits: u32 },

    /// The nearest-integer reduction hit an exact half-integer.
    #[error("rounding tie while {0}; the matrix does not determine a unique best point")]
    RoundingTie(String),

    /// Two non-proportional integer points achieve the same record; the
    /// best-point sequence is not unique and the run aborts.
    #[error("minimality tie at height {0}; sequence is not uniquely determined")]
    MinimalityTie(String),

    /// Operation only defined for a different shape (e.g. the continued
    /// fraction oracle outside the single-form, single-unknown case).
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// Kernel solver invoked on a matrix with trivial kernel.
    #[error("matrix has full column rank; kernel is trivial")]
    FullColumnRank,

    /// Requested basis reduction of a linearly dependent family.
    #[error("input vectors are linearly dependent")]
    DependentInput,

    /// Statistics window too short or containing degenerate norms/errors.
    #[error("degenerate statistics window: {0}")]
    DegenerateWindow(String),

    /// The companion polynomial has no positive root for the given exponent.
    #[error("no positive root for parameters a={a}, b={b}")]
    NoPositiveRoot { a: u32, b: u32 },

    /// A criterion hypothesis could not be certified from the enclosures.
    #[error("hypothesis not certifiable: {0}")]
    HypothesisNotCertifiable(String),

    /// A gap-bound hypothesis is certifiably violated.
    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),

    /// Polynomial family exceeds the ambient dimension.
    #[error("dimension violation: {0}")]
    DimensionViolation(String),

    /// Veronese setup over a number that is algebraic of too low a degree.
    #[error("degenerate theta: {0}")]
    DegenerateTheta(String),

    /// Generator parameters incompatible with the requested matrix shape.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A certified step could not be decided at the current working
    /// precision; callers retry with more bits.  Unlike
    /// `PrecisionExhausted` this is recoverable.
    #[error("needs more working precision: {0}")]
    NeedsPrecision(String),

    /// Internal search invariant broke; indicates a bug, never bad input.
    #[error("internal search failure: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
