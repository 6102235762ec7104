use alloc::string::String;
use core::fmt;

/// Errors reported by validation and construction routines.
///
/// Every fallible operation in this crate rejects invalid input eagerly with
/// one of these variants; numerical drift beyond documented tolerances is
/// reported the same way rather than silently absorbed.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a documented precondition.
    InvalidArgument(String),
    /// Two operands had incompatible dimensions.
    DimensionMismatch {
        /// Dimension of the left operand.
        left: usize,
        /// Dimension of the right operand.
        right: usize,
    },
    /// A matrix expected to be Hermitian was not, within tolerance.
    NotHermitian {
        /// Largest entrywise deviation max |m[i][j] − conj(m[j][i])|.
        residual: f64,
    },
    /// A matrix expected to be positive semidefinite had a sub-tolerance eigenvalue.
    NotPositiveSemidefinite {
        /// Smallest eigenvalue found.
        min_eigenvalue: f64,
    },
    /// A density matrix trace deviated from one beyond tolerance.
    TraceDeviation {
        /// The offending trace value.
        trace: f64,
    },
    /// An expectation value's imaginary part exceeded its tolerance.
    ImaginaryResidual {
        /// The offending imaginary part.
        residual: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            Error::NotHermitian { residual } => {
                write!(f, "matrix is not Hermitian (residual {residual:e})")
            }
            Error::NotPositiveSemidefinite { min_eigenvalue } => {
                write!(
                    f,
                    "matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})"
                )
            }
            Error::TraceDeviation { trace } => {
                write!(f, "density matrix trace {trace} deviates from 1")
            }
            Error::ImaginaryResidual { residual } => {
                write!(f, "imaginary residual {residual:e} exceeds tolerance")
            }
        }
    }
}

impl core::error::Error for Error {}
