//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the exact layer, the numeric layer and the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial parse error: {0}")]
    Parse(String),

    #[error("operation requires a polynomial in variables {expected}, got {found}")]
    WrongVariables { expected: &'static str, found: &'static str },

    #[error("the zero polynomial is not admissible here")]
    ZeroPolynomial,

    #[error("matrix dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrices do not commute: relative commutator norm {residual:.3e} exceeds {tol:.3e}")]
    NonCommuting { residual: f64, tol: f64 },

    #[error("matrix is not Hermitian: relative asymmetry {residual:.3e} exceeds {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eig:.3e} below slack {slack:.3e}")]
    NotPsd { min_eig: f64, slack: f64 },

    #[error("Gram matrix is singular or too ill-conditioned")]
    SingularGram,

    #[error("matrix is singular")]
    Singular,

    #[error("operator is not normal: relative commutator {residual:.3e} exceeds {tol:.3e}")]
    NotNormal { residual: f64, tol: f64 },

    #[error("polynomial #{index} is not definitizing: {reason}")]
    NotDefinitizing { index: usize, reason: String },

    #[error("ideal is not zero-dimensional (quotient has infinite dimension)")]
    NotZeroDimensional,

    #[error("variety point ({x:.12e}, {y:.12e}) does not round to a verified Gaussian-rational zero")]
    NonRationalVarietyPoint { x: f64, y: f64 },

    #[error("point is not in the variety of the ideal")]
    NotInVariety,

    #[error("local multiplicity structure is inconsistent: sum of local dimensions {local} != quotient dimension {total}")]
    MultiplicityMismatch { local: usize, total: usize },

    #[error("coset is not invertible: representative vanishes at the variety point")]
    NotInvertible,

    #[error("function value at {point} is not invertible")]
    NotInvertibleAt { point: String },

    #[error("cosets live in different quotient algebras")]
    AlgebraMismatch,

    #[error("functions belong to different calculus contexts")]
    ContextMismatch,

    #[error("polynomial is not a member of the constrained ideal")]
    MembershipFailed,

    #[error("interpolation targets are inconsistent or incomplete: {0}")]
    BadInterpolationTargets(String),

    #[error("missing jet entry ({k},{l}) at variety point #{point}")]
    MissingJet { point: usize, k: usize, l: usize },

    #[error("missing function value at spectral point {z:?}")]
    MissingValue { z: (f64, f64) },

    #[error("solve residual {residual:.3e} exceeds acceptance {tol:.3e} (operator outside the admissible commutant)")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("denominator vanishes at spectral point ({re:.6e}, {im:.6e}); input violates the spectral containment")]
    VanishingDenominator { re: f64, im: f64 },

    #[error("eigenvalue iteration failed to converge")]
    EigenNoConverge,

    #[error("unknown corpus instance name: {0}")]
    UnknownInstance(String),

    #[error("invalid problem specification: {0}")]
    InvalidProblem(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
