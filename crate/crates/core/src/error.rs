use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid observation: {0}")]
    InvalidObservation(String),

    #[error("capital stock must be positive, got {0}")]
    NonPositiveCapital(f64),

    #[error("consumption must be positive, got {0}")]
    NonPositiveConsumption(f64),

    #[error("duplicate year {year} for country {country}")]
    DuplicateYear { country: String, year: i32 },

    #[error("years out of order for country {country}: {year} follows {previous}")]
    UnorderedYears { country: String, previous: i32, year: i32 },

    #[error("observations mix countries {first} and {other}")]
    MixedCountries { first: String, other: String },

    #[error("nothing to derive: {0}")]
    EmptyDerivation(String),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("PPP conversion factor must be positive, got {0}")]
    InvalidConversionFactor(f64),

    #[error("generator could not satisfy {0} after bounded retries")]
    GeneratorInfeasible(String),

    #[error("transfers do not net to zero: residual {residual} against total consumption {total}")]
    TransferImbalance { residual: f64, total: f64 },

    #[error("identity {label} violated: relative residual {residual:e}")]
    IdentityViolation { label: &'static str, residual: f64 },

    #[error("degenerate economy: net output is zero")]
    DegenerateEconomy,

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("no overlapping countries between summaries and reference series")]
    NoOverlap,

    #[error("need at least 2 rows to chart, got {0}")]
    InsufficientSeries(usize),

    #[error("invalid reference series: {0}")]
    InvalidReference(String),

    #[error("invalid artifact: {0}")]
    InvalidArtifact(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o failure: {0}")]
    IoFailure(#[from] io::Error),
}

impl Error {
    /// Short stable name used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidObservation(_) => "InvalidObservation",
            Error::NonPositiveCapital(_) => "NonPositiveCapital",
            Error::NonPositiveConsumption(_) => "NonPositiveConsumption",
            Error::DuplicateYear { .. } => "DuplicateYear",
            Error::UnorderedYears { .. } => "UnorderedYears",
            Error::MixedCountries { .. } => "MixedCountries",
            Error::EmptyDerivation(_) => "EmptyDerivation",
            Error::MalformedHeader(_) => "MalformedHeader",
            Error::InvalidConversionFactor(_) => "InvalidConversionFactor",
            Error::GeneratorInfeasible(_) => "GeneratorInfeasible",
            Error::TransferImbalance { .. } => "TransferImbalance",
            Error::IdentityViolation { .. } => "IdentityViolation",
            Error::DegenerateEconomy => "DegenerateEconomy",
            Error::UnsupportedFormat(_) => "UnsupportedFormat",
            Error::NoOverlap => "NoOverlap",
            Error::InsufficientSeries(_) => "InsufficientSeries",
            Error::InvalidReference(_) => "InvalidReference",
            Error::InvalidArtifact(_) => "InvalidArtifact",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::IoFailure(_) => "IoFailure",
        }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::IoFailure(_))
    }
}
