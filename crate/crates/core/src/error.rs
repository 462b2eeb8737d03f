use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("position {x} m is outside [0, {length}] m")]
    OutOfDomain { x: f64, length: f64 },

    #[error("no pressure maximum found at t = {time_s} s")]
    NoExtremum { time_s: f64 },

    #[error("{} pressure maxima found at t = {time_s} s: {candidates:?}", candidates.len())]
    MultipleExtrema { time_s: f64, candidates: Vec<f64> },

    #[error("target pressure implies a negative additional withdrawal ({g_new})")]
    NegativeWithdrawal { g_new: f64 },

    #[error("constraint infeasible: {reason}")]
    InfeasibleConstraint { reason: String },

    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    ConvergenceFailure { residual: f64, tolerance: f64 },

    #[error("parse error: {message}")]
    Parse { message: String },

    #[error("{path}: {message}")]
    Validation { path: String, message: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Short stable identifier for machine-readable error reporting.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::OutOfDomain { .. } => "OutOfDomain",
            Error::NoExtremum { .. } => "NoExtremum",
            Error::MultipleExtrema { .. } => "MultipleExtrema",
            Error::NegativeWithdrawal { .. } => "NegativeWithdrawal",
            Error::InfeasibleConstraint { .. } => "InfeasibleConstraint",
            Error::ConvergenceFailure { .. } => "ConvergenceFailure",
            Error::Parse { .. } => "ParseError",
            Error::Validation { .. } => "ValidationError",
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoExtremum { .. }
                | Error::MultipleExtrema { .. }
                | Error::NegativeWithdrawal { .. }
                | Error::InfeasibleConstraint { .. }
                | Error::ConvergenceFailure { .. }
        )
    }
}
