use thiserror::Error;

/// Failures raised by the model computations.
///
/// The variants split into two groups that callers treat differently: input
/// problems (`Regime`, `Config`, `Usage`) and numerical conditions
/// (everything else).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The reduced parameters leave the regime where the two-mode model holds.
    #[error("regime violation: {0}")]
    Regime(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("usage: {0}")]
    Usage(String),

    /// A closed-form expression hit a vanishing denominator.
    #[error("singular input: {0}")]
    Singular(String),

    #[error("unstable spectrum: {0}")]
    Unstable(String),

    /// Normal-mode frequencies coincide or vanish, so the biorthogonal mode
    /// basis is ill-conditioned.
    #[error("degenerate normal modes: {0}")]
    Degenerate(String),

    /// Ground-state populations diverge at the critical point.
    #[error("divergent populations: soft-mode frequency {omega_minus:e} below cutoff")]
    Divergent { omega_minus: f64 },

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("resource limit: {0}")]
    Resource(String),
}

impl Error {
    /// True for errors caused by the input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Regime(_) | Error::Config(_) | Error::Usage(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
