use thiserror::Error;

/// Errors produced by the numeric pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("denominator polynomial is identically zero")]
    ZeroDenominator,

    #[error("improper transfer function: numerator degree {num} exceeds denominator degree {den}")]
    Improper { num: usize, den: usize },

    #[error("evaluation at or near a pole (|den(z)| = {magnitude:.3e})")]
    PoleEvaluation { magnitude: f64 },

    #[error("invalid rate factor {0}, expected >= 1")]
    InvalidFactor(usize),

    #[error("expected a continuous-time system (period 0)")]
    ExpectedContinuous,

    #[error("expected a discrete-time system")]
    ExpectedDiscrete,

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("pole groups do not partition the denominator: group degree sum {got}, denominator degree {expected}")]
    GroupsNotPartition { got: usize, expected: usize },

    #[error("ill-conditioned decomposition: distinct pole groups separated by {separation:.3e} (< 1e-6)")]
    IllConditioned { separation: f64 },

    #[error("repeated pole of multiplicity {0} is not supported (maximum 2)")]
    UnsupportedMultiplicity(usize),

    #[error("denominator is not the characteristic polynomial of a single pole group")]
    NotSingleGroup,

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("algebraic loop: feedthrough interconnection is not well posed")]
    AlgebraicLoop,

    #[error("eigenvalue iteration did not converge")]
    EigenvalueFailure,

    #[error("singular frequency response at omega = {0} rad/s")]
    SingularResponse(f64),

    #[error("ripple index undefined: fundamental component magnitude {0:.3e} below threshold")]
    RippleUndefined(f64),

    #[error("simulation diverged at step {step} (|output| = {value:.3e})")]
    Diverged { step: usize, value: f64 },

    #[error("unstable loop (spectral radius {0:.6})")]
    UnstableLoop(f64),

    #[error("incompatible sampling periods: {0}")]
    PeriodMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
