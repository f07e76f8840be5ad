use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("zero usable rows")]
    NoUsableRows,
    #[error("column `{0}` not present in input")]
    MissingColumn(String),
    #[error("line {line}: cannot parse `{value}` as a number")]
    Parse { line: usize, value: String },
    #[error("feature {index} = {value} lies outside [0, 1]")]
    FeatureOutOfRange { index: usize, value: f64 },
    #[error("conductance {g} outside [{min}, {max}]")]
    ConductanceOutOfRange { g: f64, min: f64, max: f64 },
    #[error("need at least 2 conductance levels, got {0}")]
    TooFewLevels(usize),
    #[error("split leaves class {class} empty on one side")]
    EmptyClassPartition { class: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("empty parameter grid")]
    EmptyGrid,
    #[error("index must be >= 1, got ({r}, {c})")]
    NonPositiveIndex { r: i64, c: i64 },
    #[error("invalid device table: {0}")]
    InvalidTable(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
