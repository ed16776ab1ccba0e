//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An operation received an amplitude in the wrong representation.
    #[error("domain mismatch: expected {expected} representation, got {got}")]
    DomainMismatch { expected: &'static str, got: &'static str },

    /// Inversion-sensitive operations need axes centered at zero.
    #[error("axis not centered: center = {center:.3e} m (|center| must be < spacing/2)")]
    NonCenteredAxis { center: f64 },

    /// Grid or parameter configuration that cannot represent the requested state.
    #[error("configuration error: {0}")]
    Config(String),

    /// A quadratic phase mask would alias on the current grid.
    #[error(
        "sampling violation in {context}: phase step {phase_step:.3} rad/sample at the grid edge \
         exceeds pi; refine the grid or shorten the step"
    )]
    SamplingViolation { context: &'static str, phase_step: f64 },

    /// All-zero or otherwise unusable input data.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Iterative fit did not reach the convergence tolerance.
    #[error("fit failed to converge: {0}")]
    FitNonConvergence(String),

    /// Coordinate or window outside the grid extent.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// Interferometer ports carry equal rates; the estimator diverges.
    #[error("visibility saturated: P+ - P- = {difference:.3e} is below the numeric floor")]
    Saturated { difference: f64 },

    /// P- exceeded P+; the ports are mislabeled for this state.
    #[error("port labeling error: P+ = {p_plus:.6e} < P- = {p_minus:.6e}")]
    PortLabeling { p_plus: f64, p_minus: f64 },

    /// Linear-algebra backend failure (no convergence in the factorization).
    #[error("matrix factorization failed: {0}")]
    Factorization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
