use thiserror::Error;

/// Errors produced by stalk and curve computations.
///
/// Certification failures (`TruncationTooSmall`, `NotCertified`) mean the
/// requested object could not be *proved* correct inside the working jet
/// window, never that a silently wrong object was returned.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("coordinate mismatch: `{0}` vs `{1}`")]
    CoordinateMismatch(String, String),
    #[error("ambient mismatch: {0}")]
    AmbientMismatch(String),
    #[error("division by zero scalar")]
    DivisionByZero,
    #[error("cannot invert the zero jet")]
    ZeroJet,
    #[error("leading coefficient below tolerance; jet not invertible numerically")]
    LeadingCoefficientTooSmall,
    #[error("coefficient at exponent {exponent} is outside the known window [{low}, {high})")]
    WindowMissing { exponent: i64, low: i64, high: i64 },
    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),
    #[error("subspace is not contained in the claimed superspace")]
    NotContained,
    #[error("ring separates glued branches at order 0 (violates O \u{2286} C + r)")]
    SeparatesBranches,
    #[error("stalk is not certified: {0}")]
    NotCertified(String),
    #[error("malformed point: {0}")]
    MalformedPoint(String),
    #[error("linear form is inadmissible: {0}")]
    InadmissibleLinearForm(String),
    #[error("branch parametrisation fails the characteristic polynomial check: {0}")]
    BranchMismatch(String),
    #[error("evaluation at a marked point or pole: {0}")]
    PoleEvaluation(String),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
