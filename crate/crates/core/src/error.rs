use thiserror::Error;

/// Errors produced anywhere in the lab.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alpha profile: {0}")]
    InvalidAlpha(String),

    #[error("every exponent is zero, so the decay dimension q is undefined")]
    NoPositiveAlpha,

    #[error("no critical dimension k with psi_k < 1 < psi_(k+1) in 1..{d_max_minus_one}")]
    NoCriticalDimension { d_max_minus_one: usize },

    #[error("target dimension m = {m} must exceed the critical dimension k = {k}")]
    MBelowCritical { m: usize, k: usize },

    #[error("psi_{m} = {psi} is not above 1, truncation dimension is undefined")]
    PsiNotSupercritical { m: usize, psi: f64 },

    #[error("limit assumption fails for m = {m}: {reason}")]
    AssumptionFails { m: usize, reason: String },

    #[error("CLT condition fails for m = {m} (sup = {sup_value})")]
    CltConditionFails { m: usize, sup_value: f64 },

    #[error("dimension {requested} is not materialized (complex built to dimension {built})")]
    DimensionNotMaterialized { requested: usize, built: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("tail event unreachable: predicted probability {predicted:.3e} < 10/{replications}")]
    TailUnreachable { predicted: f64, replications: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
