use std::path::PathBuf;

use mvreturn::indicators::{DEFAULT_EPSILON_G, DEFAULT_THRESHOLD};
use mvreturn::ingestion::VariableMap;
use mvreturn::reporting::{Band, Format, ReportOptions, DEFAULT_BAND, DEFAULT_DECIMALS, DEFAULT_MIN_YEARS, LABOR_SHARE_CUTOFF};

use crate::fail::{Failure, Outcome};

/// Settings shared by every subcommand, validated once up front.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub variable_map: Option<PathBuf>,
    pub delimiter: Option<u8>,
    pub threshold: f64,
    pub epsilon_g: f64,
    pub min_years: usize,
    pub decimals: usize,
    pub format: Format,
    pub dir: PathBuf,
    pub band: Band,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: Vec::new(),
            variable_map: None,
            delimiter: None,
            threshold: DEFAULT_THRESHOLD,
            epsilon_g: DEFAULT_EPSILON_G,
            min_years: DEFAULT_MIN_YEARS,
            decimals: DEFAULT_DECIMALS,
            format: Format::Txt,
            dir: PathBuf::from("."),
            band: DEFAULT_BAND,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Outcome<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Failure::validation(
                "InvalidConfig",
                format!("threshold must be in (0, 1), got {}", self.threshold),
            ));
        }
        if self.band.lo.is_nan() || self.band.hi.is_nan() || self.band.lo >= self.band.hi {
            return Err(Failure::validation(
                "InvalidConfig",
                format!("band lower bound {} must be below upper bound {}", self.band.lo, self.band.hi),
            ));
        }
        if self.min_years < 2 {
            return Err(Failure::validation(
                "InvalidConfig",
                format!("min-years must be at least 2, got {}", self.min_years),
            ));
        }
        if !(self.epsilon_g >= 0.0 && self.epsilon_g.is_finite()) {
            return Err(Failure::validation(
                "InvalidConfig",
                format!("epsilon-g must be a nonnegative number, got {}", self.epsilon_g),
            ));
        }
        Ok(())
    }

    pub fn report_options(&self) -> ReportOptions {
        ReportOptions {
            decimals: self.decimals,
            threshold: self.threshold,
            min_years: self.min_years,
            labor_share_cutoff: LABOR_SHARE_CUTOFF,
        }
    }

    pub fn variables(&self) -> Outcome<VariableMap> {
        let map = VariableMap::wid();
        match &self.variable_map {
            None => Ok(map),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path.display(), e))?;
                Ok(map.parse_overrides(&text)?)
            }
        }
    }
}

pub fn parse_delimiter(text: &str) -> Result<u8, String> {
    match text {
        "tab" | "\\t" | "\t" => Ok(b'\t'),
        ";" | "," | "|" => Ok(text.as_bytes()[0]),
        other => Err(format!("unsupported delimiter `{other}`; use `;`, `,`, `|` or `tab`")),
    }
}

pub fn parse_format(text: &str) -> Result<Format, String> {
    text.parse::<Format>().map_err(|e| e.to_string())
}
