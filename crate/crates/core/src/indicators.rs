//! Indicator formulas: cash flow, net profit, the f/g/r rates, factor
//! shares in consumption, period summaries and the stationary-state check.
//!
//! All rates for year `t` divide by capital at the end of year `t - 1`.
//! Negative cash flow, capital growth, net profit and return are ordinary
//! values, never errors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{CountryCode, CountrySummary, IndicatorRow, PanelObservation};
use crate::error::{Error, Result};
use crate::numeric::mean;

pub const DEFAULT_THRESHOLD: f64 = 0.10;
pub const DEFAULT_EPSILON_G: f64 = 0.005;

/// Rates per unit of beginning-of-year capital.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub f: f64,
    pub g: f64,
    pub r: f64,
}

/// Factor shares in consumption.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsumptionShares {
    pub labor: f64,
    pub capital: f64,
}

fn ensure_finite(values: &[(&str, f64)]) -> Result<()> {
    for (name, v) in values {
        if !v.is_finite() {
            return Err(Error::InvalidObservation(format!("{name} is not finite ({v})")));
        }
    }
    Ok(())
}

/// F(K) = C - Π. Negative when pay exceeds consumption.
pub fn cash_flow(consumption: f64, pay: f64) -> Result<f64> {
    ensure_finite(&[("consumption", consumption), ("pay", pay)])?;
    Ok(consumption - pay)
}

/// P = ΔK + C - Π.
pub fn net_profit(delta_capital: f64, consumption: f64, pay: f64) -> Result<f64> {
    ensure_finite(&[("delta_capital", delta_capital)])?;
    Ok(delta_capital + cash_flow(consumption, pay)?)
}

/// f = F/K, g = ΔK/K and r = g + f, all against `prev_capital`.
pub fn rates(prev_capital: f64, delta_capital: f64, cash_flow: f64) -> Result<Rates> {
    ensure_finite(&[
        ("prev_capital", prev_capital),
        ("delta_capital", delta_capital),
        ("cash_flow", cash_flow),
    ])?;
    if prev_capital <= 0.0 {
        return Err(Error::NonPositiveCapital(prev_capital));
    }
    let f = cash_flow / prev_capital;
    let g = delta_capital / prev_capital;
    Ok(Rates { f, g, r: g + f })
}

/// Inverse of [`rates`]: recovers (F, ΔK) from (f, g) and the capital base.
pub fn flows_from_rates(f: f64, g: f64, prev_capital: f64) -> (f64, f64) {
    (f * prev_capital, g * prev_capital)
}

/// Labor share Π/C and capital share (C - Π)/C. Shares outside [0, 1]
/// are returned unchanged.
pub fn consumption_shares(consumption: f64, pay: f64) -> Result<ConsumptionShares> {
    ensure_finite(&[("consumption", consumption), ("pay", pay)])?;
    if consumption <= 0.0 {
        return Err(Error::NonPositiveConsumption(consumption));
    }
    Ok(ConsumptionShares {
        labor: pay / consumption,
        capital: (consumption - pay) / consumption,
    })
}

/// Row for the year of `current`, using `previous` for the capital base.
pub fn derive_row(previous: &PanelObservation, current: &PanelObservation) -> Result<IndicatorRow> {
    let cash_flow = cash_flow(current.consumption, current.pay)?;
    let delta_capital = current.capital - previous.capital;
    let net_profit = net_profit(delta_capital, current.consumption, current.pay)?;
    let rates = rates(previous.capital, delta_capital, cash_flow)?;
    let shares = consumption_shares(current.consumption, current.pay)?;
    Ok(IndicatorRow {
        country: current.country.clone(),
        year: current.year,
        cash_flow,
        delta_capital,
        net_profit,
        prev_capital: previous.capital,
        f_rate: rates.f,
        g_rate: rates.g,
        r_rate: rates.r,
        labor_share: shares.labor,
        capital_share: shares.capital,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum DerivationWarning {
    /// Fewer than two consecutive years; no rows produced.
    TooFewYears { country: CountryCode, pairs: usize },
    /// Pay exceeds consumption (or is negative relative to it).
    SharesOutOfRange { country: CountryCode, year: i32, labor_share: f64 },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Derivation {
    pub rows: Vec<IndicatorRow>,
    pub warnings: Vec<DerivationWarning>,
}

/// Derives one row per pair of consecutive years for a single country.
///
/// Years must be strictly increasing. A gap breaks the chain: no row is
/// produced for a year whose predecessor is missing.
pub fn derive_panel(observations: &[PanelObservation]) -> Result<Derivation> {
    let mut out = Derivation::default();
    let Some(first) = observations.first() else {
        return Ok(out);
    };
    for obs in observations {
        obs.validate()?;
        if obs.country != first.country {
            return Err(Error::MixedCountries {
                first: first.country.to_string(),
                other: obs.country.to_string(),
            });
        }
    }
    for pair in observations.windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        if cur.year == prev.year {
            return Err(Error::DuplicateYear {
                country: cur.country.to_string(),
                year: cur.year,
            });
        }
        if cur.year < prev.year {
            return Err(Error::UnorderedYears {
                country: cur.country.to_string(),
                previous: prev.year,
                year: cur.year,
            });
        }
        if cur.year != prev.year + 1 {
            continue;
        }
        let row = derive_row(prev, cur)?;
        if row.shares_out_of_range() {
            out.warnings.push(DerivationWarning::SharesOutOfRange {
                country: row.country.clone(),
                year: row.year,
                labor_share: row.labor_share,
            });
        }
        out.rows.push(row);
    }
    if out.rows.is_empty() {
        out.warnings.push(DerivationWarning::TooFewYears {
            country: first.country.clone(),
            pairs: 0,
        });
    }
    Ok(out)
}

/// Income per capita by year, taken from whichever observations carry it.
pub fn income_series(observations: &[PanelObservation]) -> BTreeMap<i32, f64> {
    observations
        .iter()
        .filter_map(|o| o.income_per_capita.map(|v| (o.year, v)))
        .collect()
}

/// Period averages for one country. Means are unweighted over annual
/// ratios; income is averaged over the row years that have it.
pub fn summarize(
    rows: &[IndicatorRow],
    income: &BTreeMap<i32, f64>,
    threshold: f64,
) -> Result<CountrySummary> {
    let first = rows
        .first()
        .ok_or_else(|| Error::EmptyDerivation("no indicator rows to summarize".into()))?;
    if let Some(other) = rows.iter().find(|r| r.country != first.country) {
        return Err(Error::MixedCountries {
            first: first.country.to_string(),
            other: other.country.to_string(),
        });
    }
    let avg = |pick: fn(&IndicatorRow) -> f64| mean(rows.iter().map(pick)).unwrap_or(0.0);
    let avg_f = avg(|r| r.f_rate);
    Ok(CountrySummary {
        country: first.country.clone(),
        n_years: rows.len(),
        avg_f,
        avg_g: avg(|r| r.g_rate),
        avg_r: avg(|r| r.r_rate),
        avg_labor_share: avg(|r| r.labor_share),
        avg_capital_share: avg(|r| r.capital_share),
        avg_income_per_capita: mean(rows.iter().filter_map(|r| income.get(&r.year).copied())),
        high_cash_flow: avg_f > threshold,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryCheck {
    pub country: CountryCode,
    pub year: i32,
    pub g_rate: f64,
    pub r_rate: f64,
    /// Consumption afforded from net profit per unit capital. Collectively
    /// this is the cash flow rate.
    pub c_rate: f64,
    pub is_near_stationary: bool,
}

pub fn stationary_check(rows: &[IndicatorRow], epsilon_g: f64) -> Vec<StationaryCheck> {
    rows.iter()
        .map(|row| StationaryCheck {
            country: row.country.clone(),
            year: row.year,
            g_rate: row.g_rate,
            r_rate: row.r_rate,
            c_rate: row.f_rate,
            is_near_stationary: row.g_rate.abs() <= epsilon_g,
        })
        .collect()
}

/// Rows, summaries and warnings for a whole panel map.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PanelResults {
    pub rows: Vec<IndicatorRow>,
    pub summaries: Vec<CountrySummary>,
    pub warnings: Vec<DerivationWarning>,
}

/// Derives and summarizes every country. Countries are independent, so
/// the output depends only on the map contents, not on processing order.
/// A country with no consecutive years contributes a warning and no summary.
pub fn compute_panels(
    panels: &BTreeMap<CountryCode, Vec<PanelObservation>>,
    threshold: f64,
) -> Result<PanelResults> {
    let mut out = PanelResults::default();
    for observations in panels.values() {
        let derivation = derive_panel(observations)?;
        out.warnings.extend(derivation.warnings);
        if derivation.rows.is_empty() {
            continue;
        }
        let income = income_series(observations);
        out.summaries.push(summarize(&derivation.rows, &income, threshold)?);
        out.rows.extend(derivation.rows);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::relative_difference;

    fn obs(year: i32, c: f64, pi: f64, k: f64) -> PanelObservation {
        PanelObservation::new("AAA".into(), year, c, pi, k, None).unwrap()
    }

    fn row_with(f: f64, g: f64) -> IndicatorRow {
        IndicatorRow {
            country: "AAA".into(),
            year: 2000,
            cash_flow: f * 1000.0,
            delta_capital: g * 1000.0,
            net_profit: (f + g) * 1000.0,
            prev_capital: 1000.0,
            f_rate: f,
            g_rate: g,
            r_rate: g + f,
            labor_share: 0.7,
            capital_share: 0.3,
        }
    }

    #[test]
    fn cash_flow_examples() {
        assert_eq!(cash_flow(100.0, 100.0).unwrap(), 0.0);
        assert_eq!(cash_flow(120.0, 90.0).unwrap(), 30.0);
        assert!(matches!(
            cash_flow(f64::NAN, 1.0),
            Err(Error::InvalidObservation(_))
        ));
        assert!(cash_flow(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn net_profit_examples() {
        assert_eq!(net_profit(-50.0, 100.0, 80.0).unwrap(), -30.0);
        assert_eq!(net_profit(0.0, 100.0, 100.0).unwrap(), 0.0);
        assert!(net_profit(f64::NAN, 100.0, 100.0).is_err());
    }

    #[test]
    fn rate_examples() {
        let r = rates(1000.0, 20.0, 40.0).unwrap();
        assert_eq!((r.f, r.g), (0.04, 0.02));
        assert!((r.r - 0.06).abs() < 1e-16);

        let r = rates(1000.0, -100.0, 40.0).unwrap();
        assert_eq!((r.f, r.g), (0.04, -0.1));
        assert!((r.r + 0.06).abs() < 1e-16);

        let scaled = rates(7000.0, 140.0, 280.0).unwrap();
        let base = rates(1000.0, 20.0, 40.0).unwrap();
        assert_eq!(scaled, base);
    }

    #[test]
    fn rates_reject_non_positive_capital() {
        assert!(matches!(rates(0.0, 1.0, 1.0), Err(Error::NonPositiveCapital(_))));
        assert!(matches!(rates(-1.0, 1.0, 1.0), Err(Error::NonPositiveCapital(_))));
    }

    #[test]
    fn share_examples() {
        let s = consumption_shares(100.0, 70.0).unwrap();
        assert_eq!((s.labor, s.capital), (0.7, 0.3));
        let s = consumption_shares(100.0, 100.0).unwrap();
        assert_eq!((s.labor, s.capital), (1.0, 0.0));
        let s = consumption_shares(100.0, 110.0).unwrap();
        assert_eq!((s.labor, s.capital), (1.1, -0.1));
        assert!(matches!(
            consumption_shares(0.0, 1.0),
            Err(Error::NonPositiveConsumption(_))
        ));
    }

    #[test]
    fn derive_constant_panel() {
        let panel: Vec<_> = (2000..=2002).map(|y| obs(y, 100.0, 60.0, 1000.0)).collect();
        let d = derive_panel(&panel).unwrap();
        assert_eq!(d.rows.len(), 2);
        for row in &d.rows {
            assert_eq!((row.f_rate, row.g_rate, row.r_rate), (0.04, 0.0, 0.04));
        }
        assert!(d.warnings.is_empty());
    }

    #[test]
    fn derive_skips_gaps() {
        let panel = vec![obs(2000, 100.0, 60.0, 1000.0), obs(2002, 100.0, 60.0, 1100.0)];
        let d = derive_panel(&panel).unwrap();
        assert!(d.rows.is_empty());
        assert!(matches!(d.warnings[0], DerivationWarning::TooFewYears { .. }));
    }

    #[test]
    fn derive_rejects_duplicates_and_disorder() {
        let dup = vec![obs(2000, 1.0, 0.5, 10.0), obs(2000, 1.0, 0.5, 10.0)];
        assert!(matches!(derive_panel(&dup), Err(Error::DuplicateYear { .. })));
        let rev = vec![obs(2001, 1.0, 0.5, 10.0), obs(2000, 1.0, 0.5, 10.0)];
        assert!(matches!(derive_panel(&rev), Err(Error::UnorderedYears { .. })));
    }

    #[test]
    fn derive_rejects_mixed_countries() {
        let mut other = obs(2001, 1.0, 0.5, 10.0);
        other.country = "BBB".into();
        let panel = vec![obs(2000, 1.0, 0.5, 10.0), other];
        assert!(matches!(derive_panel(&panel), Err(Error::MixedCountries { .. })));
    }

    #[test]
    fn derive_flags_pay_above_consumption() {
        let panel = vec![obs(2000, 100.0, 60.0, 1000.0), obs(2001, 100.0, 110.0, 1000.0)];
        let d = derive_panel(&panel).unwrap();
        assert_eq!(d.rows.len(), 1);
        assert!(d.rows[0].shares_out_of_range());
        assert!(d.rows[0].cash_flow < 0.0);
        assert!(matches!(d.warnings[0], DerivationWarning::SharesOutOfRange { year: 2001, .. }));
    }

    #[test]
    fn summarize_threshold_is_strict() {
        let rows = vec![row_with(0.04, 0.0), row_with(0.06, 0.0)];
        let s = summarize(&rows, &BTreeMap::new(), DEFAULT_THRESHOLD).unwrap();
        assert!(relative_difference(s.avg_f, 0.05) < 1e-15);
        assert!(!s.high_cash_flow);

        let rows = vec![row_with(0.12, 0.0), row_with(0.10, 0.0)];
        let s = summarize(&rows, &BTreeMap::new(), DEFAULT_THRESHOLD).unwrap();
        assert!(relative_difference(s.avg_f, 0.11) < 1e-15);
        assert!(s.high_cash_flow);

        let rows = vec![row_with(0.10, 0.0); 3];
        let s = summarize(&rows, &BTreeMap::new(), DEFAULT_THRESHOLD).unwrap();
        assert_eq!(s.avg_f, 0.10);
        assert!(!s.high_cash_flow);
    }

    #[test]
    fn summarize_income_over_row_years() {
        let mut a = row_with(0.05, 0.01);
        a.year = 2001;
        let mut b = row_with(0.05, 0.01);
        b.year = 2002;
        let income = BTreeMap::from([(2000, 1.0), (2001, 100.0), (2002, 200.0)]);
        let s = summarize(&[a, b], &income, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(s.avg_income_per_capita, Some(150.0));
        assert_eq!(s.n_years, 2);
    }

    #[test]
    fn summarize_empty_is_error() {
        assert!(matches!(
            summarize(&[], &BTreeMap::new(), DEFAULT_THRESHOLD),
            Err(Error::EmptyDerivation(_))
        ));
    }

    #[test]
    fn stationary_examples() {
        let checks = stationary_check(&[row_with(0.05, 0.0), row_with(0.05, 0.04)], DEFAULT_EPSILON_G);
        assert_eq!(checks[0].c_rate, 0.05);
        assert!(checks[0].is_near_stationary);
        assert_eq!(checks[0].r_rate, checks[0].c_rate);
        assert_eq!(checks[1].c_rate, 0.05);
        assert!(!checks[1].is_near_stationary);
    }

    #[test]
    fn compute_panels_skips_single_year_countries() {
        let mut single = obs(2000, 100.0, 60.0, 1000.0);
        single.country = "BBB".into();
        let panels = BTreeMap::from([
            (CountryCode::from("AAA"), vec![obs(2000, 100.0, 60.0, 1000.0), obs(2001, 100.0, 60.0, 1000.0)]),
            (CountryCode::from("BBB"), vec![single]),
        ]);
        let out = compute_panels(&panels, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert_eq!(out.summaries.len(), 1);
        assert_eq!(out.summaries[0].avg_f, 0.04);
        assert!(matches!(&out.warnings[..], [DerivationWarning::TooFewYears { .. }]));
    }
}
