//! Crate-wide error type.

/// Errors produced by scenario validation, file I/O, and the equilibrium
/// solvers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An evaluation argument fell outside its mathematical domain.
    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// A field violated one of its invariants. `field` names the offending
    /// value, `reason` states the invariant.
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    /// A scenario or fixture file could not be parsed.
    #[error("failed to parse {path}: {detail}")]
    Parse { path: String, detail: String },

    /// Best-response iteration hit the iteration cap before prices settled.
    /// The trajectory of `(incumbent, entrant)` price pairs is kept for
    /// diagnosis.
    #[error(
        "price best-response did not converge for the {profile} profile \
         after {iterations} iterations (residual {residual:.3e})"
    )]
    NonConvergence {
        profile: &'static str,
        iterations: usize,
        residual: f64,
        trajectory: Vec<(f64, f64)>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
