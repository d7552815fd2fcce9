use thiserror::Error;

/// Errors raised by the quantization routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("energy must be positive, got {0}")]
    NonPositiveEnergy(f64),

    #[error("x = {x} lies outside the classically allowed region [{t1}, {t2}]")]
    OutsideAllowedRegion { x: f64, t1: f64, t2: f64 },

    #[error("expression denominator vanishes at the evaluation point")]
    PoleAtPoint,

    #[error("integration contour passes too close to a singularity ({0})")]
    ContourTooTight(String),

    #[error("no convergence after {iterations} iterations (last update {last_update:e})")]
    NoConvergence { iterations: usize, last_update: f64 },

    #[error("momentum vanishes at the origin (E = {0})")]
    ZeroMomentumAtOrigin(f64),

    #[error("cot pole: sin(S + phi) = 0")]
    PhasePole,

    #[error("phase derivative not positive at x = {x} (value {value:e})")]
    NonPositivePhaseDerivative { x: f64, value: f64 },

    #[error("phase tail bound {bound:e} exceeds tolerance {tol:e}; extend x_max")]
    TailTooLarge { bound: f64, tol: f64 },

    #[error("could not bracket level {level}: {reason}")]
    BracketNotFound { level: usize, reason: String },

    #[error("energy {energy} is not an eigenvalue (N~ - (n+1) = {mismatch:e})")]
    NotAnEigenvalue { energy: f64, mismatch: f64 },

    #[error("Gamma function pole at nu = {0}")]
    GammaPole(f64),

    #[error("nu = {0} is an eigenvalue; the optimal c diverges there")]
    EigenvaluePole(f64),

    #[error("sweep failed at {failed} of {total} energies")]
    SweepFailed { failed: usize, total: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
