//! Crate-wide error type.

use thiserror::Error;

/// Errors shared by every module of the crate.
///
/// Validation variants carry the measured deviation so the caller can see
/// how far the input was from satisfying the violated invariant.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |A - A^dag| entry = {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("matrix trace is not 1: |tr - 1| = {deviation:.3e}")]
    NotUnitTrace { deviation: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue = {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("matrix is not unitary: max |U^dag U - 1| entry = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not a projector: max |P^2 - P| entry = {deviation:.3e}")]
    NotProjector { deviation: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("eigensolver failed to converge after {sweeps} sweeps (off-diagonal {off:.3e})")]
    ConvergenceFailure { sweeps: usize, off: f64 },

    #[error("initial spectrum is degenerate (levels {a} and {b} differ by {gap:.3e})")]
    DegenerateSpectrum { a: usize, b: usize, gap: f64 },

    #[error("postselection probability {p:.3e} is below {min:.3e}; conditional mean undefined")]
    PostselectionImpossible { p: f64, min: f64 },

    #[error("pointer grid too coarse: dx = {dx:.3e} exceeds s/8 = {limit:.3e}")]
    ResolutionTooCoarse { dx: f64, limit: f64 },

    #[error("pointer grid [{x_min}, {x_max}] does not cover both Gaussian centers 0 and 1")]
    GridDoesNotCoverCenters { x_min: f64, x_max: f64 },

    #[error("Gibbs state not invertible at this precision: max beta*E spread = {beta_e:.3e}")]
    SingularGibbsState { beta_e: f64 },

    #[error("threshold bracketing failed: condition never observed up to s = {s_max:.3e}")]
    BracketFailure { s_max: f64 },

    #[error("distribution is not a probability: min value = {min_value:.3e}")]
    NotAProbability { min_value: f64 },

    #[error("model was built for a different protocol")]
    ProtocolMismatch,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
