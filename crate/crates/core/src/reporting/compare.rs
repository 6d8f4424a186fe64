//! Side-by-side comparison with directly researched cash-flow rates
//! (dividend, rental, bill and bond yields).

use std::collections::BTreeMap;
use std::io::Read;

use super::table::{Column, ReportTable, TableRow};
use super::{format_percent, rank_summaries, Align, Format};
use crate::domain::{CountryCode, CountrySummary, ReferenceSeries};
use crate::error::{Error, Result};

/// Inclusive range of cash flow rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

pub const DEFAULT_BAND: Band = Band { lo: 0.03, hi: 0.06 };

impl Band {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidConfig(format!(
                "band lower bound {lo} must be below upper bound {hi}"
            )));
        }
        Ok(Band { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub country: CountryCode,
    pub f: f64,
    pub g: f64,
    pub r: f64,
    /// dividend, rental, bill, bond
    pub components: [f64; 4],
    pub weights: [f64; 4],
    pub default_weights: bool,
    pub weighted_average: f64,
    /// Our f minus the reference weighted average.
    pub deviation: f64,
    pub f_in_band: bool,
    pub reference_in_band: bool,
}

/// One row per country present in both inputs, in report order.
pub fn compare_rows(
    summaries: &[CountrySummary],
    references: &[ReferenceSeries],
    band: Band,
) -> Result<Vec<ComparisonRow>> {
    let by_country: BTreeMap<&CountryCode, &ReferenceSeries> =
        references.iter().map(|r| (&r.country, r)).collect();
    let rows: Vec<ComparisonRow> = rank_summaries(summaries)
        .into_iter()
        .filter_map(|s| {
            let reference = by_country.get(&s.country)?;
            let weighted_average = reference.weighted_average();
            Some(ComparisonRow {
                country: s.country.clone(),
                f: s.avg_f,
                g: s.avg_g,
                r: s.avg_r,
                components: reference.components(),
                weights: reference.effective_weights(),
                default_weights: reference.weights.is_none(),
                weighted_average,
                deviation: s.avg_f - weighted_average,
                f_in_band: band.contains(s.avg_f),
                reference_in_band: band.contains(weighted_average),
            })
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::NoOverlap);
    }
    Ok(rows)
}

pub fn render_comparison(rows: &[ComparisonRow], band: Band, format: Format, decimals: usize) -> Result<String> {
    let pct = |x: f64| format_percent(x, decimals);
    let table_rows = rows
        .iter()
        .map(|row| {
            let mut cells = vec![row.country.to_string(), pct(row.f), pct(row.g), pct(row.r)];
            cells.extend(row.components.iter().map(|c| pct(*c)));
            cells.push(pct(row.weighted_average));
            cells.push(pct(row.deviation));
            TableRow {
                country: row.country.clone(),
                cells,
            }
        })
        .collect();
    let band_text = format!("[{}%, {}%]", pct(band.lo), pct(band.hi));
    let mut footnotes = vec![
        format!(
            "Our f(K) within {band_text}: {} of {} countries.",
            rows.iter().filter(|r| r.f_in_band).count(),
            rows.len()
        ),
        format!(
            "Reference weighted average within {band_text}: {} of {} countries.",
            rows.iter().filter(|r| r.reference_in_band).count(),
            rows.len()
        ),
    ];
    let defaulted = rows.iter().filter(|r| r.default_weights).count();
    if defaulted > 0 {
        footnotes.push(format!(
            "Equal reference weights (0.25 each) assumed for {defaulted} of {} countries.",
            rows.len()
        ));
    }
    footnotes.push("Deviation = our f(K) less the reference weighted average, in percentage points.".into());
    let column = |name: &str, align| Column {
        name: name.to_string(),
        align,
    };
    let mut columns = vec![column("Country", Align::Left)];
    for name in [
        "f(K) %",
        "g(K) %",
        "r(K) %",
        "Dividend %",
        "Rental %",
        "Bill %",
        "Bond %",
        "Weighted %",
        "Deviation",
    ] {
        columns.push(column(name, Align::Right));
    }
    ReportTable {
        title: "Cash flow rates compared with direct-research reference rates".to_string(),
        columns,
        rows: table_rows,
        footnotes,
    }
    .render(format)
}

pub fn compare_with_reference(
    summaries: &[CountrySummary],
    references: &[ReferenceSeries],
    band: Band,
    format: Format,
    decimals: usize,
) -> Result<String> {
    let rows = compare_rows(summaries, references, band)?;
    render_comparison(&rows, band, format, decimals)
}

const COMPONENT_COLUMNS: [&str; 4] = ["dividend_rate", "rental_rate", "bill_rate", "bond_rate"];
const WEIGHT_COLUMNS: [&str; 4] = ["w1", "w2", "w3", "w4"];

/// Reads `country, dividend_rate, rental_rate, bill_rate, bond_rate
/// [, w1..w4]`, `,` or `;` separated.
pub fn parse_reference_file<R: Read>(mut reader: R) -> Result<Vec<ReferenceSeries>> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let header_line = text.lines().next().unwrap_or_default();
    let delimiter = if header_line.matches(';').count() > header_line.matches(',').count() {
        b';'
    } else {
        b','
    };
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| Error::MalformedHeader(e.to_string()))?
        .clone();
    let find = |name: &str| header.iter().position(|h| h.eq_ignore_ascii_case(name));
    let country_col = find("country").ok_or_else(|| Error::MalformedHeader("missing `country` column".into()))?;
    let mut component_cols = [0usize; 4];
    for (slot, name) in component_cols.iter_mut().zip(COMPONENT_COLUMNS) {
        *slot = find(name).ok_or_else(|| Error::MalformedHeader(format!("missing `{name}` column")))?;
    }
    let weight_cols: Vec<Option<usize>> = WEIGHT_COLUMNS.iter().map(|w| find(w)).collect();
    let weight_cols: Option<[usize; 4]> = match weight_cols.iter().filter(|c| c.is_some()).count() {
        0 => None,
        4 => Some(std::array::from_fn(|i| weight_cols[i].unwrap_or_default())),
        _ => return Err(Error::MalformedHeader("weights need all of w1..w4".into())),
    };

    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::InvalidReference(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let number = |col: usize| -> Result<Option<f64>> {
            let raw = record.get(col).unwrap_or("");
            if raw.is_empty() {
                return Ok(None);
            }
            raw.parse::<f64>()
                .map(Some)
                .map_err(|_| Error::InvalidReference(format!("line {line}: `{raw}` is not a number")))
        };
        let country = record.get(country_col).unwrap_or("");
        if country.is_empty() {
            return Err(Error::InvalidReference(format!("line {line}: empty country")));
        }
        let mut components = [0.0; 4];
        for (slot, col) in components.iter_mut().zip(component_cols) {
            *slot = number(col)?
                .ok_or_else(|| Error::InvalidReference(format!("line {line}: missing component rate")))?;
        }
        let weights = match weight_cols {
            None => None,
            Some(cols) => {
                let w: Vec<Option<f64>> = cols.iter().map(|c| number(*c)).collect::<Result<_>>()?;
                match w.iter().filter(|x| x.is_some()).count() {
                    0 => None,
                    4 => Some(std::array::from_fn(|i| w[i].unwrap_or_default())),
                    _ => {
                        return Err(Error::InvalidReference(format!(
                            "line {line}: give all four weights or none"
                        )))
                    }
                }
            }
        };
        out.push(ReferenceSeries::new(CountryCode::new(country), components, weights)?);
    }
    Ok(out)
}
