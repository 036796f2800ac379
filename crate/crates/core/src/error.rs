use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("coordinate descent did not converge after {sweeps} sweeps (kkt residual {kkt_residual:e})")]
    NonConvergence { sweeps: usize, kkt_residual: f64 },

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("inconsistent lasso solution: {0}")]
    InconsistentSolution(String),

    #[error("selected model has {size} variables but model conditioning is capped at {cap}; use sign conditioning")]
    Capacity { size: usize, cap: usize },

    #[error("truncation region carries no Gaussian mass")]
    DegenerateRegion,

    #[error("pivot root for level {target} not bracketed: pivot only spans [{pivot_low:e}, {pivot_high:e}] over the search range")]
    NotBracketed {
        target: f64,
        pivot_low: f64,
        pivot_high: f64,
    },

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("{failures} of {replications} replications failed, above the {budget} allowed")]
    FailureBudget {
        failures: usize,
        replications: usize,
        budget: usize,
    },

    #[error("noise level must be supplied when n ({n}) <= p ({p})")]
    SigmaRequired { n: usize, p: usize },
}

impl Error {
    /// True for errors caused by the caller's input rather than by numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_)
                | Error::Dimension(_)
                | Error::Unsupported(_)
                | Error::Capacity { .. }
                | Error::SigmaRequired { .. }
        )
    }
}
