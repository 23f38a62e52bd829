//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point outside chart domain: {0}")]
    Domain(String),
    #[error("point does not belong to chart `{expected}` (got `{got}`)")]
    ChartMismatch { expected: String, got: String },
    #[error("tangent vectors based at different points")]
    BaseMismatch,
    #[error("zero vector has no causal class")]
    ZeroVector,
    #[error("step control failed: {0}")]
    StepFailure(String),
    #[error("Weingarten map blew up at s = {last_s} (conjugate point approached)")]
    BlowUp { last_s: f64 },
    #[error("trajectory carries no screen frame")]
    MissingFrame,
    #[error("conjugate point encountered at s = {s}")]
    ConjugatePoint { s: f64 },
    #[error("degenerate input for screen frame construction")]
    DegenerateFrame,
    #[error("graph is not spacelike: |grad u|^2 = {grad_sq} at node {node}")]
    NotSpacelike { grad_sq: f64, node: usize },
    #[error("induced metric on the hypersurface is not timelike")]
    NotTimelike,
    #[error("stencil at node {0} touches the boundary mask")]
    BoundaryStencil(usize),
    #[error("Newton iteration failed to converge: {0}")]
    NoConvergence(String),
    #[error("grids do not share a lattice: {0}")]
    LatticeMismatch(String),
    #[error("unknown hypersurface id `{0}`")]
    UnknownHypersurface(String),
    #[error("config parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("config validation error: {0}")]
    Validation(String),
    #[error("singular matrix (condition estimate {cond:.3e} exceeds guard)")]
    IllConditioned { cond: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
