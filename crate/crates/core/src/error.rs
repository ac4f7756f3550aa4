use std::path::PathBuf;

use thiserror::Error;

use crate::types::PairSeparation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two bodies coincide, the potential is undefined there.
    #[error("collision at node {} between bodies {} and {}", .0.s, .0.i, .0.l)]
    Singularity(PairSeparation),

    /// A pair distance of exactly zero passed to a pair-level routine.
    #[error("pair potential evaluated at zero separation")]
    ZeroSeparation,

    #[error("invalid problem: {0}")]
    Problem(String),

    #[error("invalid symmetry: {0}")]
    Symmetry(String),

    #[error("invalid optimizer settings: {0}")]
    Optimizer(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("flow integration aborted at t={t}: {reason}")]
    FlowAbort { t: f64, reason: String },

    #[error("config error in {path}: {msg}")]
    Config { path: PathBuf, msg: String },

    #[error("malformed trajectory csv: {0}")]
    Csv(String),

    #[error("plot error: {0}")]
    Plot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
