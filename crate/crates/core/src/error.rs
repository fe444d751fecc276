use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid shell: {0}")]
    InvalidShell(String),
    #[error("concentric shell (t = 0) has no bispherical frame; use the closed-form value")]
    Concentric,
    #[error("boundaries touch or cross: t = {t} >= r2 - r1 = {gap}")]
    BoundariesTouch { t: f64, gap: f64 },
    #[error("degenerate bispherical point (cosh xi - cos theta = {0:e})")]
    DegeneratePoint(f64),
    #[error("point is a coordinate focus")]
    Focus,
    #[error("quadrature did not reach tolerance after {subdivisions} subdivisions (best {best:e}, est. error {est_error:e})")]
    Quadrature { best: f64, est_error: f64, subdivisions: usize },
    #[error("requested relative tolerance {requested:e} is below the unit roundoff {epsilon:e}")]
    ToleranceTooSmall { requested: f64, epsilon: f64 },
    #[error("inverse iteration did not converge after {0} iterations")]
    InverseIteration(usize),
    #[error("rank {rank} out of range for a {size}x{size} matrix")]
    Rank { rank: usize, size: usize },
    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
