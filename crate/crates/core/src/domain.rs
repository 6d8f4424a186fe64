//! Shared data model: raw panel observations, derived indicator rows,
//! per-country summaries and externally supplied reference series.
//!
//! Money amounts are `f64` in the country's own reporting currency. Rates
//! and shares are stored as plain fractions (0.05, not 5) and only become
//! percents when a report renders them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Country key as it appears in the source data (`US`, `FR`, `AAA`, ...).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CountryCode(String);

impl CountryCode {
    pub fn new(code: impl Into<String>) -> Self {
        CountryCode(code.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CountryCode {
    fn from(s: &str) -> Self {
        CountryCode(s.to_string())
    }
}

/// One country-year of ingested aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelObservation {
    pub country: CountryCode,
    pub year: i32,
    /// Government plus household/NPISH final consumption, currency per year.
    pub consumption: f64,
    /// Compensation of employees plus 70% of mixed income, currency per year.
    pub pay: f64,
    /// Market-value national wealth at year end.
    pub capital: f64,
    /// Average national income per capita in PPP currency. Ranking key only.
    pub income_per_capita: Option<f64>,
}

impl PanelObservation {
    /// Builds an observation, enforcing `capital > 0`, `consumption >= 0`
    /// and `pay >= 0` on finite values.
    pub fn new(
        country: CountryCode,
        year: i32,
        consumption: f64,
        pay: f64,
        capital: f64,
        income_per_capita: Option<f64>,
    ) -> Result<Self> {
        let obs = PanelObservation {
            country,
            year,
            consumption,
            pay,
            capital,
            income_per_capita,
        };
        obs.validate()?;
        Ok(obs)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("consumption", self.consumption),
            ("pay", self.pay),
            ("capital", self.capital),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidObservation(format!(
                    "{} {}: {name} is not finite",
                    self.country, self.year
                )));
            }
        }
        if self.capital <= 0.0 {
            return Err(Error::NonPositiveCapital(self.capital));
        }
        if self.consumption < 0.0 || self.pay < 0.0 {
            return Err(Error::InvalidObservation(format!(
                "{} {}: consumption and pay must be nonnegative",
                self.country, self.year
            )));
        }
        if let Some(income) = self.income_per_capita {
            if !income.is_finite() {
                return Err(Error::InvalidObservation(format!(
                    "{} {}: income per capita is not finite",
                    self.country, self.year
                )));
            }
        }
        Ok(())
    }
}

/// Indicators for year `year`, derived from the observations for
/// `year - 1` and `year` of one country.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorRow {
    pub country: CountryCode,
    pub year: i32,
    /// F(K) = C - Π
    pub cash_flow: f64,
    /// ΔK = K(t) - K(t-1)
    pub delta_capital: f64,
    /// P = ΔK + F(K)
    pub net_profit: f64,
    /// Capital at the start of the year, the denominator of every rate.
    pub prev_capital: f64,
    pub f_rate: f64,
    pub g_rate: f64,
    pub r_rate: f64,
    /// Π / C
    pub labor_share: f64,
    /// (C - Π) / C
    pub capital_share: f64,
}

impl IndicatorRow {
    /// Pay exceeding consumption pushes the labor share above 1. The row is
    /// kept; reports carry the flag.
    pub fn shares_out_of_range(&self) -> bool {
        !(0.0..=1.0).contains(&self.labor_share)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountrySummary {
    pub country: CountryCode,
    /// Number of complete year pairs behind the averages.
    pub n_years: usize,
    pub avg_f: f64,
    pub avg_g: f64,
    pub avg_r: f64,
    pub avg_labor_share: f64,
    pub avg_capital_share: f64,
    pub avg_income_per_capita: Option<f64>,
    pub high_cash_flow: bool,
}

/// Direct-research cash-flow rates for one country, used as a comparison
/// baseline. Component order is dividend, rental, bill, bond.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSeries {
    pub country: CountryCode,
    pub dividend_rate: f64,
    pub rental_rate: f64,
    pub bill_rate: f64,
    pub bond_rate: f64,
    pub weights: Option<[f64; 4]>,
}

pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;
pub const EQUAL_WEIGHTS: [f64; 4] = [0.25; 4];

impl ReferenceSeries {
    pub fn new(
        country: CountryCode,
        components: [f64; 4],
        weights: Option<[f64; 4]>,
    ) -> Result<Self> {
        let [dividend_rate, rental_rate, bill_rate, bond_rate] = components;
        let series = ReferenceSeries {
            country,
            dividend_rate,
            rental_rate,
            bill_rate,
            bond_rate,
            weights,
        };
        series.validate()?;
        Ok(series)
    }

    pub fn validate(&self) -> Result<()> {
        if self.components().iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidReference(format!(
                "{}: non-finite component rate",
                self.country
            )));
        }
        if let Some(w) = self.weights {
            if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::InvalidReference(format!(
                    "{}: weights must be finite and nonnegative",
                    self.country
                )));
            }
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                return Err(Error::InvalidReference(format!(
                    "{}: weights sum to {sum}, expected 1",
                    self.country
                )));
            }
        }
        Ok(())
    }

    pub fn components(&self) -> [f64; 4] {
        [
            self.dividend_rate,
            self.rental_rate,
            self.bill_rate,
            self.bond_rate,
        ]
    }

    pub fn effective_weights(&self) -> [f64; 4] {
        self.weights.unwrap_or(EQUAL_WEIGHTS)
    }

    pub fn weighted_average(&self) -> f64 {
        self.components()
            .iter()
            .zip(self.effective_weights())
            .map(|(c, w)| c * w)
            .sum()
    }
}
