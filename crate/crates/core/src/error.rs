use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown mode label `{0}`")]
    UnknownMode(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parameter validation failed: {0}")]
    Validation(String),

    #[error("step size underflow at t = {t} ns (h = {h:e}); the system is too stiff for the requested span, reduce the κ·t span or tighten the truncation")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("steady state is not unique (singular system beyond the trace constraint)")]
    SteadyStateMultiplicity,

    #[error("solver did not converge within {iterations} iterations (residual {residual:e})")]
    IterationLimit { iterations: usize, residual: f64 },

    #[error("steady-state residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("entropy {entropy} exceeds the maximum {max} representable on the truncated space")]
    TruncationTooSmall { entropy: f64, max: f64 },

    #[error("truncation certification failed: {0}")]
    Certification(String),

    #[error("memory budget exceeded: {0}")]
    MemoryBudget(String),

    #[error("no temperature minimum found before t = {horizon_ns} ns")]
    NoOscillation { horizon_ns: f64 },

    #[error("fit failed: {reason}")]
    FitFailure {
        reason: String,
        /// (coupling in GHz, objective) pairs visited by the bracketing scan.
        scan: Vec<(f64, f64)>,
    },

    #[error("segment {index}: {source}")]
    Segment {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 2 for invalid input, 3 for solver or check failures.
    pub fn exit_code(&self) -> i32 {
        if self.is_validation() {
            2
        } else {
            3
        }
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDimension(_) => "invalid_dimension",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::UnknownMode(_) => "unknown_mode",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Validation(_) => "validation",
            Error::StepSizeUnderflow { .. } => "step_size_underflow",
            Error::SteadyStateMultiplicity => "steady_state_multiplicity",
            Error::IterationLimit { .. } => "iteration_limit",
            Error::ResidualTooLarge { .. } => "residual_too_large",
            Error::TruncationTooSmall { .. } => "truncation_too_small",
            Error::Certification(_) => "certification",
            Error::MemoryBudget(_) => "memory_budget",
            Error::NoOscillation { .. } => "no_oscillation",
            Error::FitFailure { .. } => "fit_failure",
            Error::Segment { .. } => "segment",
            Error::CheckFailed(_) => "check_failed",
            Error::LinearAlgebra(_) => "linear_algebra",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }

    /// Whether the error comes from input validation rather than a numerical solver.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::InvalidDimension(_)
            | Error::InvalidArgument(_)
            | Error::UnknownMode(_)
            | Error::DimensionMismatch { .. }
            | Error::Validation(_)
            | Error::Config(_) => true,
            Error::Segment { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}
