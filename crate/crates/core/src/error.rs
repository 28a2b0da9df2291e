use std::fmt;

/// Error type shared by the whole crate.
#[derive(Debug)]
pub enum Error {
    /// Operand shapes do not line up.
    Dimension(String),
    /// A factorization hit a non-positive pivot; the matrix is not SPD
    /// (or the incomplete factorization broke down). Carries the row.
    NotSpd { row: usize, pivot: f64 },
    /// CG detected an indefinite operator (p'Ap <= 0).
    IndefiniteOperator,
    /// An iteration reached its limit without meeting its tolerance in a
    /// context where that is fatal (inner solves, eigensolvers).
    Unconverged(String),
    /// A desk-scale dense routine was asked for a problem above its size guard.
    SizeGuard(String),
    /// Invalid configuration (tolerances, grid exponents, method names...).
    Config(String),
    Io(std::io::Error),
    /// Malformed input file (Matrix Market, JSON bench spec).
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::NotSpd { row, pivot } => {
                write!(f, "not SPD: non-positive pivot {pivot:e} at row {row}")
            }
            Error::IndefiniteOperator => write!(f, "indefinite operator detected in CG"),
            Error::Unconverged(msg) => write!(f, "iteration did not converge: {msg}"),
            Error::SizeGuard(msg) => write!(f, "size guard violated: {msg}"),
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
