use thiserror::Error;

/// Errors produced by the simulation toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A distribution or configuration parameter is invalid.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Internal moment identity violated beyond tolerance; indicates a
    /// corrupted quadrature rule or non-finite item parameters.
    #[error("quadrature inconsistency: |mu(1-mu) - (tau_sq + eps_sq)| = {gap:e} exceeds {tol:e}")]
    QuadratureInconsistency { gap: f64, tol: f64 },

    /// A pool or configuration file failed to parse.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Exhaustive enumeration would exceed the configured form cap.
    #[error("enumeration of {forms} forms exceeds cap {cap}")]
    EnumerationCap { forms: u128, cap: u64 },

    /// A form with zero observed-score variance (impossible for 2PL items
    /// with positive discrimination).
    #[error("degenerate form: observed-score variance is zero")]
    DegenerateForm,

    /// An error that occurred while processing a specific simulation case.
    #[error("case {case_id}: {source}")]
    Case {
        case_id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attach a case id to an error bubbling out of a study run.
    pub fn in_case(self, case_id: &str) -> Error {
        Error::Case {
            case_id: case_id.to_owned(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
