//! Error type shared by the solver, simulation, and experiment layers.

use thiserror::Error;

/// Errors produced by solvers, simulations, and experiment runners.
#[derive(Debug, Error)]
pub enum Error {
    /// A fixed-point or root-finding iteration exhausted its iteration budget.
    #[error("no convergence after {iters} iterations (last residual {residual:.3e})")]
    NoConvergence { iters: usize, residual: f64 },

    /// The decorrelator multiuser efficiency requires load alpha < 1.
    #[error("load alpha = {alpha} too high: decorrelator requires alpha < 1")]
    LoadTooHigh { alpha: f64 },

    /// No positive power vector can reach the target SIR for this receiver/load.
    #[error("power control infeasible: {reason}")]
    Infeasible { reason: String },

    /// The packet-success model admits no positive SIR balancing the
    /// utility-maximization equation (total packet size below 2 bits).
    #[error("degenerate efficiency function: packet size M = {m_bits} < 2 has no positive utility-maximizing SIR")]
    DegenerateEfficiencyFunction { m_bits: u32 },

    /// Utility is undefined at zero transmit power.
    #[error("utility undefined for non-positive power {power}")]
    ZeroPower { power: f64 },

    /// A receive filter with zero norm has no output SIR.
    #[error("receive filter has zero norm")]
    ZeroFilter,

    /// The Gram matrix of the spreading sequences is numerically singular.
    #[error("spreading Gram matrix numerically singular (condition estimate {cond:.3e})")]
    SingularGram { cond: f64 },

    /// Exhaustive-search detectors enumerate 2^K hypotheses and cap K.
    #[error("too many users for exhaustive search: K = {k} exceeds {max}")]
    TooManyUsers { k: usize, max: usize },

    /// Distribution shape parameters out of their admissible range.
    #[error("invalid distribution shape: {reason}")]
    InvalidShape { reason: String },

    /// Fluctuation-variance formulas require the load condition to hold.
    #[error("invalid load for variance formula: {reason}")]
    InvalidLoad { reason: String },

    /// An empirical CDF needs at least one sample.
    #[error("empty sample")]
    EmptySample,

    /// The per-realization SIR-balancing baseline failed to converge.
    #[error("per-realization SIR balancing did not converge after {iters} iterations")]
    BaselineNoConvergence { iters: usize },

    /// A constructor received arguments violating its documented invariants.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Result persistence failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
