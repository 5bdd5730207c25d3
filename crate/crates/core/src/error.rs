use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The field strength is outside the regime an operation requires.
    #[error("regime error: eps = {eps} is outside {required}")]
    Regime { eps: f64, required: &'static str },

    /// Adaptive quadrature exhausted its refinement budget.
    #[error(
        "quadrature did not reach tolerance: estimated error {estimate:e} > target {target:e}"
    )]
    ToleranceNotMet { estimate: f64, target: f64 },

    /// The unregularized flow came closer to the origin than the cutoff radius.
    #[error("collision approach: |q| = {radius:e} below cutoff {cutoff:e} at t = {time}")]
    CollisionApproach { radius: f64, cutoff: f64, time: f64 },

    /// A trajectory of the inverted oscillator left the bounded well.
    #[error("escape from bounded well: |z| = {position} past saddle {saddle} at t = {time}")]
    Escape {
        position: f64,
        saddle: f64,
        time: f64,
    },

    /// The flow did not return to the section within the step budget.
    #[error("no return to section within {max_steps} steps")]
    NoReturn { max_steps: usize },

    /// The initial state is not on the zero level of the regularized energy.
    #[error("state is off the zero level set: E = {energy:e}")]
    LevelSet { energy: f64 },

    /// A structural invariant of a computed object failed; indicates a numerics bug.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
