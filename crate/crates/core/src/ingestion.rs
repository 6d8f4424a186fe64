//! Long-format national-accounts ingestion.
//!
//! Input is delimited text with at least `country`, `variable`, `year` and
//! `value` columns in any order. WID-style codes are mapped onto the panel
//! symbols:
//!
//! | symbol | source |
//! |--------|--------|
//! | K      | `mnweal` |
//! | C      | `mcongo + mconhn` |
//! | Π      | `wlabsh × mnninc` |
//! | income | `anninc / xlcusp` |
//!
//! WID exports suffix codes with age and population tags (`mnninc999i`);
//! those suffixes are stripped before lookup.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;

use crate::domain::{CountryCode, PanelObservation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variable {
    NetNationalIncome,
    LaborShare,
    PppFactor,
    IncomePerCapita,
    Wealth,
    GovernmentConsumption,
    HouseholdConsumption,
}

impl Variable {
    pub const ALL: [Variable; 7] = [
        Variable::NetNationalIncome,
        Variable::LaborShare,
        Variable::PppFactor,
        Variable::IncomePerCapita,
        Variable::Wealth,
        Variable::GovernmentConsumption,
        Variable::HouseholdConsumption,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Variable::NetNationalIncome => "mnninc",
            Variable::LaborShare => "wlabsh",
            Variable::PppFactor => "xlcusp",
            Variable::IncomePerCapita => "anninc",
            Variable::Wealth => "mnweal",
            Variable::GovernmentConsumption => "mcongo",
            Variable::HouseholdConsumption => "mconhn",
        }
    }

    pub fn from_code(code: &str) -> Option<Variable> {
        Variable::ALL.into_iter().find(|v| v.code() == code)
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Resolves source variable codes to [`Variable`]s. Overrides let non-WID
/// sources reuse the pipeline.
#[derive(Debug, Clone, Default)]
pub struct VariableMap {
    overrides: BTreeMap<String, Variable>,
}

impl VariableMap {
    pub fn wid() -> Self {
        VariableMap::default()
    }

    pub fn with_override(mut self, source: impl Into<String>, target: Variable) -> Self {
        self.overrides.insert(source.into(), target);
        self
    }

    /// Reads `source,target` (or `;`-separated) lines. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn parse_overrides(mut self, text: &str) -> Result<Self> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split([',', ';']).map(str::trim);
            let (Some(source), Some(target), None) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(Error::InvalidConfig(format!(
                    "variable map line {}: expected `source,target`",
                    i + 1
                )));
            };
            if source.eq_ignore_ascii_case("source") && target.eq_ignore_ascii_case("target") {
                continue;
            }
            let target = Variable::from_code(target).ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "variable map line {}: unknown target code `{target}`",
                    i + 1
                ))
            })?;
            self.overrides.insert(source.to_string(), target);
        }
        Ok(self)
    }

    pub fn resolve(&self, code: &str) -> Option<Variable> {
        if let Some(v) = self.overrides.get(code) {
            return Some(*v);
        }
        let base = strip_wid_suffix(code);
        self.overrides
            .get(base)
            .copied()
            .or_else(|| Variable::from_code(base))
    }
}

/// `mnninc999i` → `mnninc`. Codes without the 3-digit + letter suffix are
/// returned unchanged.
fn strip_wid_suffix(code: &str) -> &str {
    let b = code.as_bytes();
    if b.len() == 10
        && b[6..9].iter().all(u8::is_ascii_digit)
        && b[9].is_ascii_alphabetic()
        && b[..6].iter().all(u8::is_ascii_alphabetic)
    {
        &code[..6]
    } else {
        code
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub country: CountryCode,
    pub variable: Variable,
    pub year: i32,
    pub value: f64,
    /// 1-based line number in the source file.
    pub line: u64,
}

#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// `None` sniffs `;` or `,` from the header line.
    pub delimiter: Option<u8>,
    pub variables: VariableMap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalformedRow {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseDiagnostics {
    pub delimiter: u8,
    pub rows_read: usize,
    pub accepted: usize,
    pub malformed: Vec<MalformedRow>,
    /// Unrecognized variable code → number of rows.
    pub unrecognized: BTreeMap<String, usize>,
}

impl ParseDiagnostics {
    pub fn unrecognized_total(&self) -> usize {
        self.unrecognized.values().sum()
    }

    /// rows read = accepted + malformed + unrecognized
    pub fn is_conserved(&self) -> bool {
        self.rows_read == self.accepted + self.malformed.len() + self.unrecognized_total()
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParsedFile {
    pub records: Vec<RawRecord>,
    pub diagnostics: ParseDiagnostics,
}

fn sniff_delimiter(header: &str) -> Option<u8> {
    let semis = header.matches(';').count();
    let commas = header.matches(',').count();
    let tabs = header.matches('\t').count();
    if semis > 0 && semis >= commas {
        Some(b';')
    } else if commas > 0 {
        Some(b',')
    } else if tabs > 0 {
        Some(b'\t')
    } else {
        None
    }
}

struct Columns {
    country: usize,
    variable: usize,
    year: usize,
    value: usize,
}

impl Columns {
    fn locate(header: &csv::StringRecord) -> Result<Columns> {
        let find = |name: &str| {
            header
                .iter()
                .position(|h| h.trim().eq_ignore_ascii_case(name))
                .ok_or_else(|| Error::MalformedHeader(format!("missing `{name}` column")))
        };
        Ok(Columns {
            country: find("country")?,
            variable: find("variable")?,
            year: find("year")?,
            value: find("value")?,
        })
    }
}

enum RowOutcome {
    Record(RawRecord),
    Unrecognized(String),
    Malformed(String),
}

fn parse_row(
    row: &csv::StringRecord,
    cols: &Columns,
    line: u64,
    variables: &VariableMap,
) -> RowOutcome {
    let field = |i: usize| row.get(i).map(str::trim);
    let (Some(country), Some(code), Some(year), Some(value)) = (
        field(cols.country),
        field(cols.variable),
        field(cols.year),
        field(cols.value),
    ) else {
        return RowOutcome::Malformed(format!("expected at least {} fields", row.len().max(4)));
    };
    if country.is_empty() {
        return RowOutcome::Malformed("empty country".into());
    }
    let Ok(year) = year.parse::<i32>() else {
        return RowOutcome::Malformed(format!("non-integer year `{year}`"));
    };
    let value = match value.parse::<f64>() {
        Ok(v) if v.is_finite() => v,
        _ => return RowOutcome::Malformed(format!("non-numeric value `{value}`")),
    };
    match variables.resolve(code) {
        Some(variable) => RowOutcome::Record(RawRecord {
            country: CountryCode::new(country),
            variable,
            year,
            value,
            line,
        }),
        None => RowOutcome::Unrecognized(code.to_string()),
    }
}

/// Parses one long-format file. Bad rows are reported, not fatal; only a
/// header without the required columns or an unreadable stream fails.
pub fn parse_long_file<R: Read>(mut reader: R, options: &ParseOptions) -> Result<ParsedFile> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let body = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(&bytes);

    let header_line = body.split(|b| *b == b'\n').next().unwrap_or_default();
    let header_text = String::from_utf8_lossy(header_line);
    if header_text.trim().is_empty() {
        return Err(Error::MalformedHeader("empty input".into()));
    }
    let delimiter = match options.delimiter {
        Some(d) => d,
        None => sniff_delimiter(&header_text)
            .ok_or_else(|| Error::MalformedHeader("cannot detect delimiter".into()))?,
    };

    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .has_headers(true)
        .from_reader(body);
    let header = rdr
        .headers()
        .map_err(|e| Error::MalformedHeader(e.to_string()))?
        .clone();
    let cols = Columns::locate(&header)?;

    let mut out = ParsedFile {
        diagnostics: ParseDiagnostics {
            delimiter,
            ..Default::default()
        },
        ..Default::default()
    };
    let mut row = csv::StringRecord::new();
    loop {
        let line = rdr.position().line();
        match rdr.read_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                if let csv::ErrorKind::Io(_) = e.kind() {
                    return Err(Error::IoFailure(std::io::Error::other(e.to_string())));
                }
                out.diagnostics.rows_read += 1;
                let line = e.position().map_or(line, |p| p.line());
                out.diagnostics.malformed.push(MalformedRow {
                    line,
                    reason: e.to_string(),
                });
                continue;
            }
        }
        let line = row.position().map_or(line, |p| p.line());
        if row.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        out.diagnostics.rows_read += 1;
        match parse_row(&row, &cols, line, &options.variables) {
            RowOutcome::Record(r) => out.records.push(r),
            RowOutcome::Unrecognized(code) => {
                *out.diagnostics.unrecognized.entry(code).or_default() += 1
            }
            RowOutcome::Malformed(reason) => {
                out.diagnostics.malformed.push(MalformedRow { line, reason })
            }
        }
    }
    out.diagnostics.accepted = out.records.len();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayEstimate {
    pub pay: f64,
    /// `wlabsh` outside [0, 1]; the product is still returned.
    pub labor_share_out_of_range: bool,
}

/// Π = wlabsh × mnninc. The WID labor share already counts 70% of mixed
/// income as labor, so no further adjustment is applied here.
pub fn compute_pay(net_national_income: f64, labor_share: f64) -> PayEstimate {
    PayEstimate {
        pay: labor_share * net_national_income,
        labor_share_out_of_range: !(0.0..=1.0).contains(&labor_share),
    }
}

/// C = government + household/NPISH final consumption.
pub fn aggregate_consumption(government: f64, household: f64) -> f64 {
    government + household
}

/// Local currency → PPP dollars, `xlcusp` being local units per PPP dollar.
pub fn ppp_convert(value: f64, xlcusp: f64) -> Result<f64> {
    if !xlcusp.is_finite() || xlcusp <= 0.0 {
        return Err(Error::InvalidConversionFactor(xlcusp));
    }
    Ok(value / xlcusp)
}

#[derive(Debug, Clone, PartialEq)]
pub enum YearIssue {
    /// Inputs absent for this year, by symbol (`K`, `C`, `Π`).
    Missing(Vec<&'static str>),
    /// Inputs present but the observation is unusable.
    Rejected(String),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CountryCompleteness {
    pub years_seen: usize,
    pub usable_years: usize,
    pub issues: BTreeMap<i32, YearIssue>,
    pub labor_share_out_of_range: Vec<i32>,
    pub years_with_income: usize,
    /// Years whose income was converted with another year's PPP factor.
    pub ppp_fallback_years: Vec<i32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConflictingValues {
    pub country: CountryCode,
    pub variable: Variable,
    pub year: i32,
    pub lines: Vec<u64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Assembly {
    pub panels: BTreeMap<CountryCode, Vec<PanelObservation>>,
    pub completeness: BTreeMap<CountryCode, CountryCompleteness>,
    /// Keys with more than one distinct value; the key is dropped.
    pub conflicts: Vec<ConflictingValues>,
}

type Key = (CountryCode, Variable, i32);

/// Builds per-country panels. A country-year gets an observation only when
/// K, C and Π are all available and valid; everything else becomes a
/// diagnostic.
pub fn assemble_panels(records: &[RawRecord]) -> Assembly {
    let mut grouped: BTreeMap<Key, Vec<(f64, u64)>> = BTreeMap::new();
    for r in records {
        grouped
            .entry((r.country.clone(), r.variable, r.year))
            .or_default()
            .push((r.value, r.line));
    }

    let mut out = Assembly::default();
    let mut values: BTreeMap<CountryCode, BTreeMap<i32, BTreeMap<Variable, f64>>> = BTreeMap::new();
    for ((country, variable, year), entries) in grouped {
        let distinct: BTreeSet<u64> = entries.iter().map(|(v, _)| v.to_bits()).collect();
        if distinct.len() > 1 {
            let mut lines: Vec<u64> = entries.iter().map(|(_, l)| *l).collect();
            lines.sort_unstable();
            out.conflicts.push(ConflictingValues {
                country: country.clone(),
                variable,
                year,
                lines,
            });
            // keep the country visible in completeness diagnostics
            values.entry(country).or_default().entry(year).or_default();
            continue;
        }
        values
            .entry(country)
            .or_default()
            .entry(year)
            .or_default()
            .insert(variable, entries[0].0);
    }

    for (country, years) in values {
        let mut completeness = CountryCompleteness {
            years_seen: years.len(),
            ..Default::default()
        };
        let ppp_factors: BTreeMap<i32, f64> = years
            .iter()
            .filter_map(|(y, vars)| vars.get(&Variable::PppFactor).map(|v| (*y, *v)))
            .collect();
        let latest_factor = ppp_factors.iter().next_back().map(|(_, v)| *v);

        let mut panel = Vec::new();
        for (&year, vars) in &years {
            let get = |v: Variable| vars.get(&v).copied();
            let capital = get(Variable::Wealth);
            let consumption = match (
                get(Variable::GovernmentConsumption),
                get(Variable::HouseholdConsumption),
            ) {
                (Some(g), Some(h)) => Some(aggregate_consumption(g, h)),
                _ => None,
            };
            let pay = match (get(Variable::NetNationalIncome), get(Variable::LaborShare)) {
                (Some(income), Some(share)) => {
                    let estimate = compute_pay(income, share);
                    if estimate.labor_share_out_of_range {
                        completeness.labor_share_out_of_range.push(year);
                    }
                    Some(estimate.pay)
                }
                _ => None,
            };
            let (Some(capital), Some(consumption), Some(pay)) = (capital, consumption, pay) else {
                let missing = [("K", capital), ("C", consumption), ("Π", pay)]
                    .into_iter()
                    .filter(|(_, v)| v.is_none())
                    .map(|(s, _)| s)
                    .collect();
                completeness.issues.insert(year, YearIssue::Missing(missing));
                continue;
            };

            let income = get(Variable::IncomePerCapita).and_then(|local| {
                let factor = match ppp_factors.get(&year) {
                    Some(f) => *f,
                    None => {
                        let f = latest_factor?;
                        completeness.ppp_fallback_years.push(year);
                        f
                    }
                };
                ppp_convert(local, factor).ok()
            });

            if consumption <= 0.0 && consumption.is_finite() {
                completeness.issues.insert(
                    year,
                    YearIssue::Rejected(format!("consumption {consumption} is not positive")),
                );
                continue;
            }
            match PanelObservation::new(country.clone(), year, consumption, pay, capital, income) {
                Ok(obs) => {
                    if obs.income_per_capita.is_some() {
                        completeness.years_with_income += 1;
                    }
                    panel.push(obs);
                }
                Err(e) => {
                    completeness
                        .issues
                        .insert(year, YearIssue::Rejected(e.to_string()));
                }
            }
        }
        completeness.usable_years = panel.len();
        if !panel.is_empty() {
            out.panels.insert(country.clone(), panel);
        }
        out.completeness.insert(country, completeness);
    }
    out
}
