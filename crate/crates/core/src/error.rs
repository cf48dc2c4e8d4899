use thiserror::Error;

/// Errors raised by the library. Every variant is a configuration or domain
/// problem; numerical studies that simply fail a threshold report that in
/// their result instead.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid representation: {0}")]
    InvalidRep(String),

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("representation mismatch: {left} vs {right}")]
    RepMismatch { left: String, right: String },

    #[error("{0}")]
    Domain(String),

    #[error("Bargmann index J = {0} must exceed 1/2 for the resolution of identity")]
    NotNormalizable(f64),

    #[error("tail bound {bound:.3e} exceeds tolerance {tol:.1e} at cutoff {cutoff}")]
    TailBound { bound: f64, tol: f64, cutoff: usize },

    #[error("non-finite matrix entry; cutoff or J too large for double precision")]
    Overflow,

    #[error("operator is not hermitian (defect {0:.3e})")]
    NotHermitian(f64),

    #[error(
        "truncation guard tripped at t = {t}: top-level population {population:.3e} (last valid t = {last_valid_t})"
    )]
    TruncationGuard {
        t: f64,
        population: f64,
        last_valid_t: f64,
    },

    #[error("half-plane barrier: w reached {w:.3e} at t = {t}")]
    HalfPlaneBarrier { t: f64, w: f64 },

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("slope fit needs at least {needed} usable points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("dimension {dim} exceeds the memory ceiling {ceiling}")]
    MemoryCeiling { dim: usize, ceiling: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
