use thiserror::Error;

/// Errors raised by the numerical and structural operations of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("global dimension {requested} exceeds the configured maximum {max}")]
    Sizing { requested: usize, max: usize },

    #[error("entries must be finite")]
    NonFinite,

    #[error("matrix is not Hermitian: max |H - H†| = {deviation:e} > {tol:e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("matrix is not unitary: max |U†U - I| = {deviation:e} > {tol:e}")]
    NotUnitary { deviation: f64, tol: f64 },

    #[error("state is not normalized: norm = {norm} (tolerance {tol:e})")]
    NotNormalized { norm: f64, tol: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{routine} failed to converge within {max_iterations} iterations")]
    NumericalFailure {
        routine: &'static str,
        max_iterations: usize,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("observables do not commute: max |[F, G]| = {deviation:e} > {tol:e}")]
    NotCommuting { deviation: f64, tol: f64 },

    #[error("joint spectrum does not form a {d1}x{d2} grid: {detail}")]
    SpectrumStructure {
        d1: usize,
        d2: usize,
        detail: String,
    },

    #[error(
        "grid size {d} is even; the sum/difference relabeling needs an odd size so that 2 is invertible modulo d"
    )]
    EvenGrid { d: usize },

    #[error("invalid index bijection: {0}")]
    InvalidBijection(String),

    #[error("state is not factorizable in this tensor product structure (Schmidt rank {rank})")]
    NotFactorizable { rank: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
