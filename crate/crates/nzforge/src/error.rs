use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument outside the function's domain: {0}")]
    Domain(String),
    #[error("quadrature did not reach tolerance {tol:e} within {panels} panels")]
    QuadratureFailure { tol: f64, panels: usize },
    #[error("phi = {0} sits on a zero or pole of the quantum dilogarithm")]
    PoleHit(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("newton matrix convention violated: {0}")]
    MatrixConvention(String),
    #[error("gluing error: {0}")]
    Gluing(String),
    #[error("meridian error: {0}")]
    Meridian(String),
    #[error("linear system is inconsistent: {0}")]
    Rank(String),
    #[error("not hyperbolic: {0}")]
    NotHyperbolic(String),
    #[error("singular argument in term {0}")]
    SingularArgument(String),
    #[error("non-integer exponent after exponentiation: {0}")]
    NonIntegerExponent(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("continuation failed: {0}")]
    PathCollision(String),
    #[error("intermediate polynomial exceeded the term budget ({0} terms)")]
    SwellLimit(usize),
    #[error("polynomial has no longitude variable")]
    NoLongitudeVariable,
    #[error("p and q are not coprime: ({0}, {1})")]
    NotCoprime(i64, i64),
    #[error("length formulas disagree: {0} vs {1}")]
    InconsistentFrame(f64, f64),
    #[error("schema error in {entry}: {msg}")]
    Schema { entry: String, msg: String },
    #[error("not found: {name}; close matches: {close:?}")]
    NotFound { name: String, close: Vec<String> },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
