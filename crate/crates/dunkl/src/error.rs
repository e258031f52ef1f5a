use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DunklError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("point lies on a reflection hyperplane and no derivative data is available")]
    HyperplaneSingularity,
    #[error("quadrature did not reach tolerance: value {value:e}, error estimate {estimate:e}")]
    Quadrature { value: f64, estimate: f64 },
    #[error("unsupported derivative order {order} (max {max})")]
    UnsupportedOrder { order: usize, max: usize },
    #[error("function rejected: {0}")]
    Function(String),
    #[error("{0} is in the spectrum")]
    Singular(String),
    #[error("square-root branch: spectrum meets the negative real axis at {0}")]
    Branch(String),
    #[error("contour path: {0}")]
    Path(String),
    #[error("contour truncation: tail bound {0:e} exceeds tolerance")]
    Truncation(f64),
    #[error("point within {0:e} of the contour")]
    IllConditioned(f64),
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, DunklError>;
