//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A Cholesky pivot was non-positive; the matrix is not positive definite.
    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    /// Every Monte Carlo sample was censored; the estimate carries no signal.
    #[error("all {samples} samples were censored")]
    AllCensored { samples: u64 },

    /// The theta truncation radius would require enumerating too many lattice points.
    #[error("theta truncation needs ~{estimate:.3e} lattice points (> 1e9); imaginary part of the period matrix is extreme")]
    RadiusOverflow { estimate: f64 },

    /// eta is only defined on the theta divisor; the argument is not on it.
    #[error("point is not on the theta divisor (log||theta|| = {log_theta_norm:.3})")]
    NotOnTheta { log_theta_norm: f64 },

    #[error("branch points {first} and {second} coincide within 1e-6 of the curve scale")]
    DuplicateBranchPoint { first: usize, second: usize },

    #[error("a hyperelliptic model y^2 = f(x) needs an odd number of branch points, got {count}")]
    EvenCount { count: usize },

    /// The computed period matrix violates the Riemann symmetry relation.
    #[error("period matrix symmetry residual {residual:.3e} exceeds 1e-6; quadrature or cut layout failed")]
    NonSymmetric { residual: f64 },

    #[error("even theta constant {index} vanishes; the period matrix is degenerate or not hyperelliptic")]
    VanishingEvenThetaConstant { index: usize },

    #[error("the general-sum discriminant is only enumerated for g <= 3, got g = {genus}")]
    GenusTooLarge { genus: usize },

    #[error("divisor has degree {degree}, expected g - 1 = {expected}")]
    WrongDegree { degree: i64, expected: i64 },

    #[error("the Green function needs two distinct points")]
    CoincidentPoints,

    #[error("no admissible integration path: branch point {index} obstructs every candidate polyline")]
    PathClearanceFailure { index: usize },

    #[error("rejection envelope {envelope:.3e} exceeded by density ratio {ratio:.3e}")]
    EnvelopeTooSmall { envelope: f64, ratio: f64 },

    #[error("enumeration over ~{estimate:.3e} tuples refused (g <= 4, k <= 4 supported)")]
    ParameterTooLarge { estimate: f64 },

    #[error("polynomial degree {degree} must be < g = {genus}")]
    DegreeTooHigh { degree: usize, genus: usize },

    /// Numerical analytic continuation of y = sqrt(f(x)) lost track of the sheet.
    #[error("sheet tracking failed along an integration path near x = {at}")]
    ContinuationFailure { at: num_complex::Complex64 },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name of the variant, used in CLI diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::AllCensored { .. } => "AllCensored",
            Error::RadiusOverflow { .. } => "RadiusOverflow",
            Error::NotOnTheta { .. } => "NotOnTheta",
            Error::DuplicateBranchPoint { .. } => "DuplicateBranchPoint",
            Error::EvenCount { .. } => "EvenCount",
            Error::NonSymmetric { .. } => "NonSymmetric",
            Error::VanishingEvenThetaConstant { .. } => "VanishingEvenThetaConstant",
            Error::GenusTooLarge { .. } => "GenusTooLarge",
            Error::WrongDegree { .. } => "WrongDegree",
            Error::CoincidentPoints => "CoincidentPoints",
            Error::PathClearanceFailure { .. } => "PathClearanceFailure",
            Error::EnvelopeTooSmall { .. } => "EnvelopeTooSmall",
            Error::ParameterTooLarge { .. } => "ParameterTooLarge",
            Error::DegreeTooHigh { .. } => "DegreeTooHigh",
            Error::ContinuationFailure { .. } => "ContinuationFailure",
            Error::Calibration(_) => "Calibration",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}
