use thiserror::Error;

use crate::eigen::EigenResult;
use crate::equilibrium::Side;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration rejected: {0}")]
    ConfigRejected(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("density leaves the admissible range on the {side} side near x3 = {x3}")]
    DepthTooLarge { side: Side, x3: f64 },

    #[error("quotient of the zero vector is undefined")]
    ZeroVector,

    #[error("eigensolver did not converge in {max_iterations} iterations (residual {})", best.residual)]
    ConvergenceFailure {
        max_iterations: usize,
        best: Box<EigenResult>,
    },

    #[error("no growing mode at s = {s} (mu = {mu})")]
    NoGrowingMode { s: f64, mu: f64 },

    #[error("fixed-point bracket failed: {0}")]
    BracketFailure(String),

    #[error("frequency {given} does not match the dispersion point at {expected}")]
    FrameMismatch { expected: f64, given: f64 },

    #[error("singular coefficient in the first-order reduction")]
    SingularCoefficient,

    #[error("derivative order {requested} requested but only {available} available")]
    DerivativeOrderUnavailable { requested: usize, available: usize },

    #[error("sample at the interface needs a side")]
    InterfaceSample,

    #[error("no growing mode available at radial node |xi| = {0}")]
    ModeUnavailable(f64),

    #[error("ladder exhausted at R = {0}")]
    SearchExhausted(f64),

    #[error("time step {dt} exceeds the stability bound {bound}")]
    TimeStepTooLarge { dt: f64, bound: f64 },

    #[error("blow-up detected at t = {0}")]
    BlowupDetected(f64),

    #[error("series does not grow (slope {0})")]
    NonGrowingSeries(f64),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("need at least {needed} stored states, got {got}")]
    InsufficientHistory { needed: usize, got: usize },
}
