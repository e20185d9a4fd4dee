//! Error type shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by model construction, evaluation, and experiments.
///
/// Domain violations are always reported, never silently clamped.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A scalar argument was NaN or infinite.
    #[error("{op}: input {value} is not finite")]
    NonFinite { op: &'static str, value: f64 },

    /// A scalar argument fell outside the documented domain.
    #[error("{op}: {message}")]
    Domain { op: &'static str, message: String },

    /// Item parameters failed validation.
    #[error("invalid item parameters{}: {reason}", fmt_index(.index))]
    InvalidParams { index: Option<usize>, reason: String },

    /// A derivative evaluation failed at a specific grid point.
    #[error("derivative evaluation failed at theta = {theta}: {source}")]
    DerivEval {
        theta: f64,
        #[source]
        source: Box<Error>,
    },

    /// Quadrature refinement did not reach the requested accuracy.
    #[error("quadrature did not converge: error estimate {estimate:.3e} exceeds {target:.3e}")]
    QuadratureAccuracy { estimate: f64, target: f64 },

    /// Root finding exhausted its iteration budget.
    #[error("root find for target {target} stalled with residual {residual:.3e}")]
    RootFind { target: f64, residual: f64 },

    /// An inversion target lies outside the attainable open range.
    #[error("target {target} outside attainable range ({lo}, {hi})")]
    TargetOutOfRange { target: f64, lo: f64, hi: f64 },

    /// No rest-score grid point fell inside the requested interval.
    #[error("recovery grid empty on ({alpha}, {beta}) for n = {n}")]
    EmptyRecoveryGrid { alpha: f64, beta: f64, n: usize },

    /// Full-manifest enumeration refused (exponential blowup guard).
    #[error("full manifest refused for n = {n} items (maximum {max})")]
    TooManyItems { n: usize, max: usize },

    /// Two collections that must be compared item-by-item differ in length.
    #[error("item count mismatch: {left} vs {right}")]
    ItemCountMismatch { left: usize, right: usize },

    /// A response column is constant, so its regressogram is undefined.
    #[error("item {index} has a degenerate (constant) response column")]
    DegenerateItem { index: usize },

    /// A conditional quantity is undefined because its denominator vanished.
    #[error("degenerate distribution: {message}")]
    Degenerate { message: String },

    /// The requested rest-score ratio is unattainable on the whole grid.
    #[error("k_ratio {k_ratio} unattainable for every n in the grid")]
    KRatioUnattainable { k_ratio: f64 },

    /// Invalid run configuration (CLI or experiment config).
    #[error("configuration error: {0}")]
    Config(String),

    /// Failure while reading or writing files.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Malformed input file.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

fn fmt_index(index: &Option<usize>) -> String {
    match index {
        Some(i) => format!(" at index {i}"),
        None => String::new(),
    }
}

pub(crate) fn ensure_finite(op: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { op, value: x })
    }
}
