//! Crate-wide error type.
//!
//! Every fallible operation in the crate returns [`Error`]. The CLI maps each
//! variant onto one of two exit codes: problems with the input data (bad
//! dimensions, malformed config files, invalid plans) are *configuration
//! errors*, while failures of the numerics themselves (finite escape of the
//! value matrix, non-convergent iterations, missing root brackets) are
//! *numerical failures*. See [`Error::exit_code`].

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Matrix/vector shapes are mutually inconsistent.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A weight matrix fails its required symmetry/definiteness class.
    #[error("matrix {name} must be symmetric {class}")]
    NotPositiveDefinite {
        name: &'static str,
        /// "positive definite" or "positive semidefinite".
        class: &'static str,
    },

    /// NaN or an unexpected infinity in the input data.
    #[error("non-finite entry in {0}")]
    NonFiniteEntry(&'static str),

    /// The game horizon must be a positive real.
    #[error("horizon must be positive and finite (got {0})")]
    NonPositiveHorizon(f64),

    /// The value matrix blew past the escape cap during backward integration.
    /// This is the signature of an evader-dominant game, whose value is
    /// unbounded.
    #[error("value matrix escaped at t = {t:.6} (norm exceeded {cap:.1e})")]
    FiniteEscape { t: f64, cap: f64 },

    /// An operation that requires pursuer dominance was called on a spec
    /// without it.
    #[error("spec is not pursuer-dominant: {0}")]
    NotDominant(String),

    /// An iterative method hit its cap before meeting its tolerance.
    #[error("iteration failed to converge: {0}")]
    NoConvergence(String),

    /// (A, Q^(1/2)) fails the observability rank test required for the
    /// steady-state value matrix and the stability guarantee.
    #[error("pair (A, Q^(1/2)) is not observable: rank {rank} < {n}")]
    NotObservable { rank: usize, n: usize },

    /// A time or index argument lies outside its documented domain.
    #[error("argument out of range: {0}")]
    OutOfRange(String),

    /// A per-observation price of zero makes the observation-count bound
    /// infinite; callers must take the observe-always branch instead.
    #[error("observation price is zero; the workload bound is unbounded")]
    ZeroPrice,

    /// The instant chain lost monotonicity — a symptom of quadrature
    /// tolerances too loose for the requested schedule.
    #[error("schedule chain broke: {0}")]
    ChainBroken(String),

    /// Root bracketing failed (e.g. the trace pairing is identically zero).
    #[error("no sign change found when bracketing: {0}")]
    NoBracket(String),

    /// An observation plan violates its ordering/range invariants.
    #[error("invalid observation plan: {0}")]
    InvalidPlan(String),

    /// Monotonicity checks require the first instant set to be contained in
    /// the second.
    #[error("instant set is not a subset: {0}")]
    NotSubset(String),

    /// Config file is not syntactically valid JSON.
    #[error("config parse error: {0}")]
    Parse(String),

    /// Config file is valid JSON but violates the schema.
    #[error("config schema error at `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Plot emission needs to know which state components are the planar
    /// positions; for n ≠ 4 an explicit mapping must be supplied.
    #[error("unsupported plot layout: {0}")]
    UnsupportedLayout(String),
}

impl Error {
    /// Exit code the CLI reports for this error: `2` for configuration and
    /// input problems, `3` for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DimensionMismatch(_)
            | Error::NotPositiveDefinite { .. }
            | Error::NonFiniteEntry(_)
            | Error::NonPositiveHorizon(_)
            | Error::OutOfRange(_)
            | Error::InvalidPlan(_)
            | Error::NotSubset(_)
            | Error::Parse(_)
            | Error::Schema { .. }
            | Error::Io(_)
            | Error::UnsupportedLayout(_) => 2,
            Error::FiniteEscape { .. }
            | Error::NotDominant(_)
            | Error::NoConvergence(_)
            | Error::NotObservable { .. }
            | Error::ZeroPrice
            | Error::ChainBroken(_)
            | Error::NoBracket(_) => 3,
        }
    }
}
