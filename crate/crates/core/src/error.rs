use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("negative equilibrium quantity {quantity} for firm {firm}")]
    NegativeQuantity { firm: usize, quantity: f64 },

    #[error("interiority condition violated: {0}")]
    InteriorityViolated(String),

    #[error("merger event references unknown firm `{0}`")]
    UnknownFirm(String),

    #[error("invalid merger event: {0}")]
    InvalidEvent(String),

    #[error("composite `{composite}` has zero revenue in period {period}")]
    ZeroRevenueComposite { composite: String, period: i64 },

    #[error("no member of composite `{0}` carries an industry code")]
    NoIndustry(String),

    #[error("period mismatch: {0}")]
    PeriodMismatch(String),

    #[error("column `{0}` has no variation after absorbing fixed effects")]
    NoVariation(String),

    #[error("design is rank deficient; dropped {0:?}")]
    RankDeficient(Vec<String>),

    #[error("need at least two clusters, found {0}")]
    TooFewClusters(usize),

    #[error("wave term needs at least two industries")]
    SingleIndustry,

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("invalid regression spec: {0}")]
    InvalidSpec(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{0}")]
    Parse(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv { path: path.into(), source }
    }

    /// File the error refers to, if any.
    pub fn path(&self) -> Option<&std::path::Path> {
        match self {
            Error::Io { path, .. } | Error::Csv { path, .. } => Some(path),
            _ => None,
        }
    }

    /// Short machine-readable tag used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "InvalidParams",
            Error::NegativeQuantity { .. } => "NegativeQuantity",
            Error::InteriorityViolated(_) => "InteriorityViolated",
            Error::UnknownFirm(_) => "UnknownFirm",
            Error::InvalidEvent(_) => "InvalidEvent",
            Error::ZeroRevenueComposite { .. } => "ZeroRevenueComposite",
            Error::NoIndustry(_) => "NoIndustry",
            Error::PeriodMismatch(_) => "PeriodMismatch",
            Error::NoVariation(_) => "NoVariation",
            Error::RankDeficient(_) => "RankDeficient",
            Error::TooFewClusters(_) => "TooFewClusters",
            Error::SingleIndustry => "SingleIndustry",
            Error::UnknownColumn(_) => "UnknownColumn",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::Empty(_) => "Empty",
            Error::Io { .. } => "Io",
            Error::Csv { .. } => "Csv",
            Error::Parse(_) => "Parse",
        }
    }
}
