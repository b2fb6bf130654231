//! Error type shared by every module in the crate.

use crate::game::Side;
use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, CoreError>;

#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// A cost or gradient evaluator produced a non-finite value.
    NonFiniteCost {
        side: Side,
        agent: usize,
        detail: String,
    },
    /// A modelling assumption was violated (non-positive marginal density,
    /// empty action box, density that does not integrate to one, ...).
    AssumptionViolation(String),
    /// Quantile bisection could not bracket the target mass at the
    /// requested quadrature resolution.
    QuadratureResolution(String),
    /// An index or type value fell outside its declared domain.
    Domain(String),
    /// The centralized oracle hit its iteration cap before reaching the
    /// requested equilibrium gap.
    NonConvergence { final_gap: f64 },
    /// Packets do not match the edges of the current schedule frame.
    Protocol(String),
    /// A simulated state left the finite range (runaway penalty descent).
    Divergence { tick: u64 },
    /// Inconsistent dimensions or malformed configuration.
    Config(String),
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::NonFiniteCost { side, agent, detail } => {
                write!(f, "non-finite cost for agent {agent} of {side:?}: {detail}")
            }
            CoreError::AssumptionViolation(msg) => write!(f, "assumption violated: {msg}"),
            CoreError::QuadratureResolution(msg) => write!(f, "quadrature resolution: {msg}"),
            CoreError::Domain(msg) => write!(f, "domain error: {msg}"),
            CoreError::NonConvergence { final_gap } => {
                write!(f, "oracle did not converge, final gap {final_gap:e}")
            }
            CoreError::Protocol(msg) => write!(f, "protocol error: {msg}"),
            CoreError::Divergence { tick } => write!(f, "state diverged at tick {tick}"),
            CoreError::Config(msg) => write!(f, "configuration error: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CoreError {}
