use crate::overlay::DeviceId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration for `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("churn rejected: {0}")]
    ChurnRejected(String),

    #[error("device {0} already present in the overlay")]
    Conflict(DeviceId),

    #[error("unknown device {0}")]
    UnknownDevice(DeviceId),

    #[error("topology error: {0}")]
    Topology(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("capacity error: requested {requested}, only {available} available")]
    Capacity { requested: usize, available: usize },

    #[error("eigen solver did not converge after {iterations} sweeps (off-diagonal norm {residual:e})")]
    Numerical { iterations: usize, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { field: field.into(), reason: reason.into() }
    }

    pub(crate) fn contract(reason: impl Into<String>) -> Self {
        Error::Contract(reason.into())
    }
}
