use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid needs at least 2 cells, got {0}")]
    InvalidGrid(usize),

    #[error("grid mismatch: {left} cells vs {right} cells")]
    GridMismatch { left: usize, right: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("expected {expected} values for the grid, got {got}")]
    ValueCount { expected: usize, got: usize },

    #[error("density value at cell {index} is invalid: {value}")]
    InvalidValue { index: usize, value: f64 },

    #[error("time step {dt:e} exceeds the stability bound {bound:e}")]
    StabilityViolation { dt: f64, bound: f64 },

    #[error("negative density {value:e} at cell {index} after step")]
    NegativeDensity { index: usize, value: f64 },

    #[error("test function `{0}` is not differentiable")]
    NonDifferentiablePhi(String),

    #[error("test function `{0}` is not increasing")]
    NonIncreasingPhi(String),

    #[error("decay bound requires gamma < 0, got {0}")]
    PositiveGamma(f64),

    #[error("orbit of `{map}` visited {cells} cell(s); need at least 2")]
    DegenerateOrbit { map: String, cells: usize },

    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownName {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("malformed density file {path}: {reason}")]
    MalformedCsv { path: PathBuf, reason: String },

    #[error("no snapshot files match `{0}`")]
    NoSnapshots(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
