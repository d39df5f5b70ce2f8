use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("1 + mu nearly vanishes at x = {x} (|1 + mu| = {modulus:.3e})")]
    SingularMomentum { x: Complex64, modulus: f64 },

    #[error("PT reflection needs a real-axis contour, got Im(x) = {offset}")]
    ContourNotReflectionInvariant { offset: f64 },

    #[error("{what} has imaginary part {imag:.3e} at x = {x}; Sturm-Liouville form needs real coefficients")]
    NonRealCoefficients { what: &'static str, x: Complex64, imag: f64 },

    #[error("{solver} failed to converge after {iterations} iterations")]
    NoConvergence { solver: &'static str, iterations: usize },

    #[error("two-grid estimate {estimate:.3e} exceeds accuracy target {target:.3e} at level {level}")]
    AccuracyNotReached { level: usize, estimate: f64, target: f64 },

    #[error("complex eigenvalue {0} has no conjugate partner among the retained levels")]
    PairingViolation(Complex64),

    #[error("argument {0} lies within 1e-8 of an arctan branch cut")]
    BranchCutProximity(Complex64),

    #[error("quadrature did not converge after {doublings} panel doublings (last change {last_change:.3e})")]
    NoQuadratureConvergence { doublings: usize, last_change: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("malformed table: {0}")]
    Parse(String),
}
