use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the tabulation, transform, solver and inversion layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("tables live on different grids")]
    GridMismatch,

    #[error("radial distribution function vanishes on the whole grid (no usable core boundary)")]
    DegenerateRdf,

    #[error("core extrapolation failed: {0}")]
    CoreFitFailure(String),

    #[error("structure factor {value:.3e} at frequency {omega:.6} is not positive enough")]
    SingularStructureFactor { omega: f64, value: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("RDF range {r_max} exceeds half the box length {half_box}")]
    RdfRangeExceedsBox { r_max: f64, half_box: f64 },

    #[error("simulation blew up at step {step} (kinetic energy per particle {kinetic:.3e})")]
    BlowUp { step: usize, kinetic: f64 },

    #[error("cavity function underflow ({value:.3e}) at r = {r}")]
    CavityUnderflow { r: f64, value: f64 },

    #[error("normal equations are numerically singular")]
    SingularNormalEquations,

    #[error("pressure constraint infeasible: constraint vector vanishes but pressure gap is {gap:.3e}")]
    ConstraintInfeasible { gap: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no iteration records found in {0}")]
    NoRuns(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
