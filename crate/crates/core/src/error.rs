use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes do not fit the operation.
    DimensionMismatch {
        op: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// LU pivot fell below the relative tolerance.
    SingularMatrix { pivot: f64 },
    /// QR iteration did not deflate within its budget.
    EigenNoConvergence { iterations: usize },
    /// Newton iteration for quadrature nodes did not settle.
    QuadratureNoConvergence { k: usize },
    /// Stage equations did not converge.
    SolverNoConvergence { iterations: usize, residual: f64 },
    /// The quadrature is not exact enough for the requested degree (B(2s)).
    InsufficientExactness { exactness: usize, required: usize },
    /// Argument outside its domain.
    Domain(String),
    /// Unknown builtin problem name.
    UnknownProblem(String),
    /// Fewer usable points than needed for a least-squares fit.
    DegenerateFit { usable: usize },
    /// A construction identity failed to hold numerically.
    Postcondition { what: &'static str, residual: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                op,
                expected,
                found,
            } => write!(
                f,
                "{op}: dimension mismatch, expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::SingularMatrix { pivot } => {
                write!(
                    f,
                    "matrix is singular to working precision (pivot {pivot:e})"
                )
            }
            Error::EigenNoConvergence { iterations } => {
                write!(
                    f,
                    "QR iteration failed to converge after {iterations} iterations"
                )
            }
            Error::QuadratureNoConvergence { k } => {
                write!(
                    f,
                    "Newton iteration for {k}-point quadrature nodes failed to converge"
                )
            }
            Error::SolverNoConvergence {
                iterations,
                residual,
            } => write!(
                f,
                "stage equations did not converge after {iterations} iterations \
                 (last residual {residual:e}); try a smaller step size"
            ),
            Error::InsufficientExactness {
                exactness,
                required,
            } => write!(
                f,
                "quadrature exactness {exactness} < {required}: the rule must integrate \
                 polynomials of degree 2s-1 exactly (simplifying assumption B(2s))"
            ),
            Error::Domain(msg) => f.write_str(msg),
            Error::UnknownProblem(name) => write!(f, "unknown problem `{name}`"),
            Error::DegenerateFit { usable } => write!(
                f,
                "only {usable} error values above the round-off floor; cannot fit an order"
            ),
            Error::Postcondition { what, residual } => {
                write!(f, "identity {what} violated (residual {residual:e})")
            }
        }
    }
}

impl core::error::Error for Error {}
