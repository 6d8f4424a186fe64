//! Intermediate files passed between pipeline stages: comma-separated text
//! with a schema line (`# mvreturn <kind> v1`) ahead of the header. Floats
//! are written in shortest round-trip form, so reading back is lossless.

use std::io::{BufRead, BufReader, Read, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::domain::{CountrySummary, IndicatorRow, PanelObservation};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArtifactKind {
    Panel,
    Indicators,
    Summaries,
}

impl ArtifactKind {
    pub fn name(self) -> &'static str {
        match self {
            ArtifactKind::Panel => "panel",
            ArtifactKind::Indicators => "indicators",
            ArtifactKind::Summaries => "summaries",
        }
    }

    /// Conventional file name inside an output directory.
    pub fn file_name(self) -> &'static str {
        match self {
            ArtifactKind::Panel => "panel.csv",
            ArtifactKind::Indicators => "indicators.csv",
            ArtifactKind::Summaries => "summaries.csv",
        }
    }

    fn schema_line(self) -> String {
        format!("# mvreturn {} v{SCHEMA_VERSION}", self.name())
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::IoFailure(io),
        other => Error::InvalidArtifact(format!("{other:?}")),
    }
}

pub fn write_artifact<W: Write, T: Serialize>(mut out: W, kind: ArtifactKind, items: &[T]) -> Result<()> {
    writeln!(out, "{}", kind.schema_line())?;
    let mut wtr = csv::WriterBuilder::new().has_headers(true).from_writer(out);
    if items.is_empty() {
        // serde only learns the header from a record; write it by hand
        let header = match kind {
            ArtifactKind::Panel => "country,year,consumption,pay,capital,income_per_capita",
            ArtifactKind::Indicators => "country,year,cash_flow,delta_capital,net_profit,prev_capital,f_rate,g_rate,r_rate,labor_share,capital_share",
            ArtifactKind::Summaries => "country,n_years,avg_f,avg_g,avg_r,avg_labor_share,avg_capital_share,avg_income_per_capita,high_cash_flow",
        };
        wtr.write_record(header.split(',')).map_err(csv_error)?;
    }
    for item in items {
        wtr.serialize(item).map_err(csv_error)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_artifact<R: Read, T: DeserializeOwned>(input: R, kind: ArtifactKind) -> Result<Vec<T>> {
    let mut reader = BufReader::new(input);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let expected = kind.schema_line();
    if first.trim_end() != expected {
        return Err(Error::InvalidArtifact(format!(
            "expected schema line `{expected}`, found `{}`",
            first.trim_end()
        )));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    rdr.deserialize().map(|r| r.map_err(csv_error)).collect()
}

pub fn write_panel<W: Write>(out: W, observations: &[PanelObservation]) -> Result<()> {
    write_artifact(out, ArtifactKind::Panel, observations)
}

pub fn read_panel<R: Read>(input: R) -> Result<Vec<PanelObservation>> {
    let observations: Vec<PanelObservation> = read_artifact(input, ArtifactKind::Panel)?;
    for obs in &observations {
        obs.validate()?;
    }
    Ok(observations)
}

pub fn write_indicators<W: Write>(out: W, rows: &[IndicatorRow]) -> Result<()> {
    write_artifact(out, ArtifactKind::Indicators, rows)
}

pub fn read_indicators<R: Read>(input: R) -> Result<Vec<IndicatorRow>> {
    read_artifact(input, ArtifactKind::Indicators)
}

pub fn write_summaries<W: Write>(out: W, summaries: &[CountrySummary]) -> Result<()> {
    write_artifact(out, ArtifactKind::Summaries, summaries)
}

pub fn read_summaries<R: Read>(input: R) -> Result<Vec<CountrySummary>> {
    read_artifact(input, ArtifactKind::Summaries)
}
