use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cutoff too large for scalar precision: x = {x} exceeds {max}")]
    CutoffTooLarge { x: f64, max: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("order {requested} requested but only orders below {available} are known")]
    MissingOrders { requested: usize, available: usize },

    #[error("parity violation: odd power x^{power}")]
    ParityViolation { power: u32 },

    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("integrator failed at x = {at}: {reason}")]
    ToleranceNotMet { at: f64, reason: String },

    #[error("non-finite value encountered at x = {at}")]
    NonFinite { at: f64 },

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the floating-point machinery rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::CutoffTooLarge { .. } | Error::ToleranceNotMet { .. } | Error::NonFinite { .. }
        )
    }
}
