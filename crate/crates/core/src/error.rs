use thiserror::Error;

/// Failures raised while building spaces, assembling, or solving.
#[derive(Debug, Error)]
pub enum Error {
    #[error("metric is not positive definite on element {element} at reference point ({:.6}, {:.6})", point[0], point[1])]
    IndefiniteMetric { element: usize, point: [f64; 2] },

    #[error("triangle {element} is degenerate or inverted (signed area {area:e})")]
    DegenerateElement { element: usize, area: f64 },

    #[error("local moment system for Regge degree {degree} is numerically singular")]
    SingularMomentSystem { degree: usize },

    #[error("non-positive pivot {pivot:e} at row {row}: matrix is not SPD on the free dofs")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("linear solve did not converge: relative residual {residual:e} > {tol:e}")]
    SolverDiverged { residual: f64, tol: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("level {level}: {source}")]
    AtLevel {
        level: u32,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
