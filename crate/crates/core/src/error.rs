use thiserror::Error;

use crate::energy::EnergyResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// TM coefficients divide by zeta^2; the zero mode must go through the limit branch.
    #[error("zero Matsubara frequency requested without the analytic-limit branch")]
    SingularZeroMode,

    #[error("singular normalization determinant: {0}")]
    SingularNormalization(String),

    /// Numerical non-convergence. Carries the best partial result when one exists.
    #[error("no convergence: {detail}")]
    NonConvergence {
        detail: String,
        partial: Option<Box<EnergyResult>>,
    },

    #[error("degenerate fit design: {0}")]
    DegenerateFit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
