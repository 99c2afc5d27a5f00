//! Error type shared by all modules.

use crate::dynamics::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A constructor or operation rejected its input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A state vector contained NaN or infinite components.
    #[error("non-finite state component: {0}")]
    NonFinite(String),

    /// An expanded 6-vector violated the conjugate-pair structure.
    #[error("conjugate-pair violation: {what} (residual {residual:.3e}, tol {tol:.3e})")]
    ConjugacyViolation {
        what: &'static str,
        residual: f64,
        tol: f64,
    },

    /// A matrix that must be inverted was singular or nearly so.
    #[error("numeric degeneracy in {what}: |det| = {det_abs:.3e}")]
    Degenerate { what: &'static str, det_abs: f64 },

    /// Newton refinement of a fixed point failed to converge.
    #[error("fixed-point iteration did not converge: residual {residual:.3e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    /// The integrator hit its step budget before reaching `t_end`.
    /// Carries the partial trajectory computed so far.
    #[error("step budget exhausted at t = {t_reached:.6e}")]
    StepBudgetExceeded {
        t_reached: f64,
        partial: Box<Trajectory>,
    },

    /// An estimator was asked to work on too short a window.
    #[error("analysis window too short: {0}")]
    WindowTooShort(String),

    /// The linear system has no steady state (drive outside the range of
    /// the singular evolution matrix).
    #[error("no steady state: {0}")]
    NoSteadyState(String),
}
