use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid needs at least 2 cells, got N = {0}")]
    GridTooSmall(usize),

    #[error("wire length must be finite and positive, got L = {0}")]
    InvalidLength(f64),

    #[error("expected {expected} nodes for the grid, got {actual}")]
    NodeCount { expected: usize, actual: usize },

    #[error("node {index} is not finite")]
    NonFinite { index: usize },

    #[error("node {index} has norm {norm:e}, below the degeneracy threshold")]
    DegenerateNode { index: usize, norm: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),

    #[error("{what} must have unit norm, got {norm}")]
    NotUnit { what: &'static str, norm: f64 },

    #[error("collinearity solve requires r1 != 0, got r = ({0}, {1}, {2})")]
    ZeroFirstComponent(f64, f64, f64),

    #[error("difference quotient needs distinct sample times")]
    ZeroTimeGap,

    #[error("step failed at t = {t}: {source}")]
    StepFailed {
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
