use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Parameter(String),

    #[error("resource budget exceeded: {what} reached {reached} (budget {budget})")]
    ResourceBudgetExceeded {
        what: &'static str,
        reached: u64,
        budget: u64,
    },

    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),

    #[error("t = {t} is inadmissible for (v={v}, k={k}): tk/v and tk(k-1)/(v(v-1)) must both be integers")]
    InadmissibleT { v: u32, k: u32, t: u64 },

    #[error("matrix is singular")]
    MatrixSingular,

    #[error("rank-update capacitance matrix is singular")]
    UpdateSingular,

    #[error("matrix is not positive definite (smallest eigenvalue {0:e})")]
    MatrixNotPositiveDefinite(f64),

    #[error("region is empty: {0}")]
    EmptyRegion(String),

    #[error("argument outside the formula's domain: {0}")]
    OutOfDomain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

impl Error {
    /// Stable machine-readable tag, used in structured CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "parameter",
            Error::ResourceBudgetExceeded { .. } => "resource_budget_exceeded",
            Error::HypothesisFailed(_) => "hypothesis_failed",
            Error::InadmissibleT { .. } => "inadmissible_t",
            Error::MatrixSingular => "matrix_singular",
            Error::UpdateSingular => "update_singular",
            Error::MatrixNotPositiveDefinite(_) => "matrix_not_pd",
            Error::EmptyRegion(_) => "empty_region",
            Error::OutOfDomain(_) => "out_of_domain",
            Error::Dimension(_) => "dimension",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
