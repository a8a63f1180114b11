//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("extension tower depth would exceed the configured bound {0}")]
    TowerDepthExceeded(usize),
    #[error("no exact cube root available for this element")]
    NoExactCubeRoot,
    #[error("series order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("substituted series must have zero constant term")]
    ConstantTermNonzero,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("series is not prenormalized (quadratic part is not x*y)")]
    NotPrenormalized,
    #[error("syntax error at position {0}: {1}")]
    SyntaxError(usize, String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("expression is not analytic at the expansion point")]
    NotAnalyticAtOrigin,
    #[error("expression has a pole at the expansion point")]
    PoleAtOrigin,
    #[error("constant `{0}` cannot be evaluated exactly; use approximate mode")]
    NotExactlyEvaluable(String),
    #[error("Hessian is degenerate (rank < 2); parabolic surfaces are out of scope")]
    DegenerateHessian,
    #[error("bad position: F20+2F11+F02 vanishes and no linear retry cleared it")]
    BadPosition,
    #[error("basepoint is non-generic for the branch decision: {0}")]
    NonGenericBasepoint(String),
    #[error("branch decision rests on coefficients beyond order {0}")]
    UndecidableAtOrder(usize),
    #[error("jet coordinate ({0},{1}) is not dependent in the active subjet")]
    NotDependent(usize, usize),
    #[error("denominator vanishes on this input")]
    DenominatorZero,
    #[error("branch {0} is not supported by this operation")]
    UnsupportedBranch(String),
    #[error("inconsistent system: two determinations of {0} disagree")]
    InconsistentSystem(String),
    #[error("frame is degenerate: projections to (x,y) are dependent at the origin")]
    DegenerateFrame,
    #[error("no square root of this element in the supported field")]
    NoSquareRoot,
    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;
