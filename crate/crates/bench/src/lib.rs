//! File formats, synthetic instances, metrics and experiment orchestration
//! around `trwfw-core`.

pub mod experiment;
pub mod generators;
pub mod metrics;
pub mod output;
pub mod uai;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] trwfw_core::Error),
    #[error(transparent)]
    Uai(#[from] uai::UaiError),
    #[error("invalid experiment: {0}")]
    Spec(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl BenchError {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Core(_) => "solver",
            Self::Uai(_) => "uai",
            Self::Spec(_) => "spec",
            Self::Io(_) => "io",
            Self::Json(_) => "json",
            Self::Csv(_) => "csv",
        }
    }
}
