use thiserror::Error;

use crate::qcqp::InfeasibilityCertificate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("problem infeasible: dual certificate bound {:.3e} > 0", .0.dual_bound)]
    Infeasible(Box<InfeasibilityCertificate>),

    /// The line search could not drive |1 - ‖Fc(ζ)‖²|² below the floor.
    #[error(
        "relaxation gap: best line-search value {floor:.3e} at zeta {zeta:.6} \
         (‖Fc‖² = {norm_sq:.9}) exceeds {limit:.1e}"
    )]
    RelaxationGap { floor: f64, zeta: f64, norm_sq: f64, limit: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
