//! Rate of return on national wealth from consumption, pay and
//! market-value capital.
//!
//! The pipeline runs [`ingestion`] → [`indicators`] → [`reporting`].
//! [`oracle`] generates synthetic economies whose accounting identities
//! are checked independently of the pipeline.

pub mod artifact;
pub mod domain;
pub mod error;
pub mod indicators;
pub mod ingestion;
pub mod numeric;
pub mod oracle;
pub mod reporting;

pub use domain::{CountryCode, CountrySummary, IndicatorRow, PanelObservation, ReferenceSeries};
pub use error::{Error, Result};
