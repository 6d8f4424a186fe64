//! Tables, rankings, the reference comparison and per-country charts.
//!
//! Stored fractions become percents only here. Countries are listed in
//! descending order of average income per capita, ties broken by country
//! code; countries without income go last, unranked.

mod chart;
mod compare;
mod table;

use std::cmp::Ordering;
use std::str::FromStr;

pub use chart::{render_line_chart, render_line_charts, SeriesSelector};
pub use compare::{
    compare_rows, compare_with_reference, parse_reference_file, render_comparison, Band,
    ComparisonRow, DEFAULT_BAND,
};
pub use table::{
    build_fgr_table, build_shares_table, render_fgr_table, render_shares_table, Align, Column,
    ReportTable, TableRow,
};

use crate::domain::CountrySummary;
use crate::error::{Error, Result};
use crate::indicators::DEFAULT_THRESHOLD;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Csv,
    Txt,
    Md,
    Tex,
    Svg,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Txt => "txt",
            Format::Md => "md",
            Format::Tex => "tex",
            Format::Svg => "svg",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "txt" | "text" => Ok(Format::Txt),
            "md" | "markdown" => Ok(Format::Md),
            "tex" | "latex" => Ok(Format::Tex),
            "svg" => Ok(Format::Svg),
            _ => Err(Error::UnsupportedFormat(s.to_string())),
        }
    }
}

pub const DEFAULT_DECIMALS: usize = 1;
pub const DEFAULT_MIN_YEARS: usize = 5;
pub const LABOR_SHARE_CUTOFF: f64 = 0.80;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    pub decimals: usize,
    pub threshold: f64,
    /// Countries with fewer year pairs are left out of ranked tables.
    pub min_years: usize,
    pub labor_share_cutoff: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            decimals: DEFAULT_DECIMALS,
            threshold: DEFAULT_THRESHOLD,
            min_years: DEFAULT_MIN_YEARS,
            labor_share_cutoff: LABOR_SHARE_CUTOFF,
        }
    }
}

fn ranking_order(a: &CountrySummary, b: &CountrySummary) -> Ordering {
    match (a.avg_income_per_capita, b.avg_income_per_capita) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
    .then_with(|| a.country.cmp(&b.country))
}

/// Summaries in report order. The order is total, so any permutation of
/// the input gives the same output.
pub fn rank_summaries(summaries: &[CountrySummary]) -> Vec<&CountrySummary> {
    let mut ranked: Vec<&CountrySummary> = summaries.iter().collect();
    ranked.sort_by(|a, b| ranking_order(a, b));
    ranked
}

/// Renders `fraction × 100` with `decimals` places, rounding half to even
/// on the shortest decimal representation of `fraction`. So 0.0125 at one
/// decimal is `1.2`, not the `1.3` that binary rounding of 1.2500000000000002
/// would give.
pub fn format_percent(fraction: f64, decimals: usize) -> String {
    if !fraction.is_finite() {
        return "n/a".to_string();
    }
    let text = format!("{}", fraction.abs());
    let (int_part, frac_part) = text.split_once('.').unwrap_or((&text, ""));
    let mut digits: Vec<u8> = int_part.bytes().chain(frac_part.bytes()).map(|b| b - b'0').collect();
    // decimal point position after the ×100 shift
    let point = int_part.len() + 2;
    let keep = point + decimals;
    if digits.len() < keep {
        digits.resize(keep, 0);
    }
    let (kept, rest) = digits.split_at(keep);
    let mut kept = kept.to_vec();
    let round_up = match rest.first() {
        None => false,
        Some(&d) if d > 5 => true,
        Some(&d) if d < 5 => false,
        Some(_) => rest[1..].iter().any(|&d| d != 0) || kept.last().is_some_and(|d| d % 2 == 1),
    };
    if round_up {
        let mut i = kept.len();
        loop {
            if i == 0 {
                kept.insert(0, 1);
                break;
            }
            i -= 1;
            if kept[i] == 9 {
                kept[i] = 0;
            } else {
                kept[i] += 1;
                break;
            }
        }
    }
    let int_len = kept.len() - decimals;
    let int_digits: String = kept[..int_len].iter().map(|d| char::from(b'0' + d)).collect();
    let int_digits = int_digits.trim_start_matches('0');
    let int_digits = if int_digits.is_empty() { "0" } else { int_digits };
    let mut out = String::new();
    if fraction < 0.0 && kept.iter().any(|&d| d != 0) {
        out.push('-');
    }
    out.push_str(int_digits);
    if decimals > 0 {
        out.push('.');
        out.extend(kept[int_len..].iter().map(|d| char::from(b'0' + d)));
    }
    out
}

/// Whether rendered r is within one unit in the last place of rendered
/// f + rendered g.
pub fn rounding_coherent(f: f64, g: f64, r: f64, decimals: usize) -> bool {
    let parse = |x: f64| format_percent(x, decimals).parse::<f64>().unwrap_or(f64::NAN);
    let unit = 10f64.powi(-(decimals as i32));
    ((parse(f) + parse(g)) - parse(r)).abs() <= unit * (1.0 + 1e-9)
}

/// Headline counts over the countries that pass the `min_years` filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeadlineCounts {
    pub covered: usize,
    pub high_cash_flow: usize,
    /// Countries with income in the lower half of the income ranking. With
    /// an odd count the middle country falls in the lower half.
    pub lower_half: usize,
    pub lower_half_low_labor_share: usize,
}

pub fn headline_counts(summaries: &[CountrySummary], opts: &ReportOptions) -> HeadlineCounts {
    let listed: Vec<&CountrySummary> = rank_summaries(summaries)
        .into_iter()
        .filter(|s| s.n_years >= opts.min_years)
        .collect();
    let with_income: Vec<&CountrySummary> = listed
        .iter()
        .copied()
        .filter(|s| s.avg_income_per_capita.is_some())
        .collect();
    let lower = &with_income[with_income.len() / 2..];
    HeadlineCounts {
        covered: listed.len(),
        high_cash_flow: listed.iter().filter(|s| s.avg_f > opts.threshold).count(),
        lower_half: lower.len(),
        lower_half_low_labor_share: lower
            .iter()
            .filter(|s| s.avg_labor_share < opts.labor_share_cutoff)
            .count(),
    }
}

/// Two plain-text lines for side-by-side reading against published counts.
pub fn render_headline(counts: &HeadlineCounts, opts: &ReportOptions) -> String {
    format!(
        "countries with average f(K) > {}%: {} of {}\n\
         lower-income-half countries with labor share < {}%: {} of {}\n",
        format_percent(opts.threshold, opts.decimals),
        counts.high_cash_flow,
        counts.covered,
        format_percent(opts.labor_share_cutoff, opts.decimals),
        counts.lower_half_low_labor_share,
        counts.lower_half,
    )
}
