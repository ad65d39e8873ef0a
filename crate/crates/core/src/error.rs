use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// One violated parameter invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamError {
    pub field: &'static str,
    pub value: f64,
    pub message: &'static str,
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} (got {})", self.field, self.message, self.value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Preset or parameter validation failed; carries every violation.
    Invalid(Vec<ParamError>),
    /// A single bad argument to an operation.
    BadArgument(String),
    /// Hub preload leaves the springs slack at equilibrium.
    NonPositiveStiffness {
        preload_length: f64,
        free_length: f64,
    },
    /// Non-finite value entering or leaving the integrator.
    NonFinite { what: &'static str, t: f64 },
    /// Operation not allowed while the selector is between topologies.
    Transitioning,
    /// Too few points or no spread in x for a fit.
    DegenerateFit,
    /// Experiment could not reach a settled state within its time budget.
    NotSettled { t: f64 },
    /// A selector invariant was broken during a run.
    InvariantViolation(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Invalid(errs) => {
                write!(f, "invalid parameters: ")?;
                for (i, e) in errs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{e}")?;
                }
                Ok(())
            }
            Error::BadArgument(msg) => write!(f, "bad argument: {msg}"),
            Error::NonPositiveStiffness {
                preload_length,
                free_length,
            } => write!(
                f,
                "hub stiffness is not positive: preloaded length {preload_length} mm <= free length {free_length} mm"
            ),
            Error::NonFinite { what, t } => write!(f, "non-finite {what} at t = {t} s"),
            Error::Transitioning => write!(f, "selector is transitioning"),
            Error::DegenerateFit => write!(f, "degenerate fit: need at least two distinct x values"),
            Error::NotSettled { t } => write!(f, "did not settle before t = {t} s"),
            Error::InvariantViolation(msg) => write!(f, "invariant violated: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
