use thiserror::Error;

/// Errors raised by the analytic layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{name} = {value} is outside {bound}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        bound: &'static str,
    },
    #[error("p1 = 1 makes the secondary-channel term p1/(1-p1) singular")]
    Singular,
    #[error("both channels are permanently occupied (p1*p2 = 1); no transmission is possible")]
    NoTransmission,
    #[error("success probability is undefined when no station transmits (tau = 0)")]
    UndefinedConditional,
    #[error("overhead factor l = {0} must be >= 1")]
    InvalidOverhead(f64),
    #[error("cw_max ({cw_max}) must equal cw_min ({cw_min}) times a power of two")]
    WindowMismatch { cw_min: u32, cw_max: u32 },
    #[error(
        "fixed-point solver did not converge after {iterations} iterations (residual {residual:e})"
    )]
    SolverFailure { iterations: usize, residual: f64 },
    #[error("slot-time denominator is zero; timing and transmission probability are degenerate")]
    DegenerateConfig,
}

/// Errors raised while validating or running a simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
