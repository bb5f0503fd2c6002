use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid physical constants: {0}")]
    InvalidConstants(String),

    #[error("states or operators live on different grids")]
    GridMismatch,

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver did not converge for eigenvalue {index} after {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },

    #[error("SVD did not converge")]
    SvdNoConvergence,

    #[error(
        "dense gap-operator solve needs an {dim}x{dim} matrix (n_points = {n_points} exceeds cap {cap}); \
         use gap_spectrum_pairwise on an eigensolve result instead"
    )]
    DenseCapExceeded {
        n_points: usize,
        cap: usize,
        dim: usize,
    },

    #[error("state is not normalized (norm^2 = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("observable is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("trajectory is not stationary: overlap modulus {modulus} at t = {time}")]
    NotStationary { modulus: f64, time: f64 },

    #[error(
        "phase sampling aliases: |gap| * record_every * dt / hbar = {ratio} must stay below pi"
    )]
    Aliasing { ratio: f64 },

    #[error("fringe visibility undefined: found {found} local extrema, need at least 3")]
    TooFewExtrema { found: usize },

    #[error("slit wave function leaks outside the grid (mass outside = {mass_outside:e})")]
    SlitSupport { mass_outside: f64 },

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
