use std::fmt::Write as _;

use super::{format_percent, rank_summaries, Format, ReportOptions};
use crate::domain::{CountryCode, CountrySummary};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Align {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub align: Align,
}

impl Column {
    fn left(name: &str) -> Self {
        Column {
            name: name.to_string(),
            align: Align::Left,
        }
    }

    fn right(name: &str) -> Self {
        Column {
            name: name.to_string(),
            align: Align::Right,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub country: CountryCode,
    pub cells: Vec<String>,
}

/// A rendered-ready table: cells are already formatted strings.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub title: String,
    pub columns: Vec<Column>,
    pub rows: Vec<TableRow>,
    pub footnotes: Vec<String>,
}

impl ReportTable {
    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => Ok(self.render_csv()),
            Format::Txt => Ok(self.render_txt()),
            Format::Md => Ok(self.render_md()),
            Format::Tex => Ok(self.render_tex()),
            Format::Svg => Err(Error::UnsupportedFormat(
                "svg is only available for charts".into(),
            )),
        }
    }

    fn render_csv(&self) -> String {
        fn field(s: &str) -> String {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.to_string()
            }
        }
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.title);
        let header: Vec<String> = self.columns.iter().map(|c| field(&c.name)).collect();
        let _ = writeln!(out, "{}", header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.cells.iter().map(|c| field(c)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        for note in &self.footnotes {
            let _ = writeln!(out, "# {note}");
        }
        out
    }

    fn widths(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .map(|(i, c)| {
                self.rows
                    .iter()
                    .map(|r| r.cells[i].chars().count())
                    .chain([c.name.chars().count()])
                    .max()
                    .unwrap_or(0)
            })
            .collect()
    }

    fn render_txt(&self) -> String {
        let widths = self.widths();
        let pad = |text: &str, i: usize| {
            let w = widths[i];
            match self.columns[i].align {
                Align::Left => format!("{text:<w$}"),
                Align::Right => format!("{text:>w$}"),
            }
        };
        let line = |cells: Vec<String>| cells.join("  ").trim_end().to_string();
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.title);
        let _ = writeln!(out, "{}", "=".repeat(self.title.chars().count()));
        let header = self.columns.iter().enumerate().map(|(i, c)| pad(&c.name, i)).collect();
        let header = line(header);
        let _ = writeln!(out, "{header}");
        let total: usize = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
        let _ = writeln!(out, "{}", "-".repeat(total));
        for row in &self.rows {
            let cells = row.cells.iter().enumerate().map(|(i, c)| pad(c, i)).collect();
            let _ = writeln!(out, "{}", line(cells));
        }
        if !self.footnotes.is_empty() {
            out.push('\n');
            for note in &self.footnotes {
                let _ = writeln!(out, "{note}");
            }
        }
        out
    }

    fn render_md(&self) -> String {
        fn esc(s: &str) -> String {
            let mut out = String::with_capacity(s.len());
            for ch in s.chars() {
                if matches!(ch, '|' | '*' | '_' | '\\' | '`' | '+' | '[' | ']') {
                    out.push('\\');
                }
                out.push(ch);
            }
            out
        }
        let mut out = String::new();
        let _ = writeln!(out, "**{}**\n", esc(&self.title));
        let header: Vec<String> = self.columns.iter().map(|c| esc(&c.name)).collect();
        let _ = writeln!(out, "| {} |", header.join(" | "));
        let rule: Vec<&str> = self
            .columns
            .iter()
            .map(|c| match c.align {
                Align::Left => ":---",
                Align::Right => "---:",
            })
            .collect();
        let _ = writeln!(out, "| {} |", rule.join(" | "));
        for row in &self.rows {
            let cells: Vec<String> = row.cells.iter().map(|c| esc(c)).collect();
            let _ = writeln!(out, "| {} |", cells.join(" | "));
        }
        if !self.footnotes.is_empty() {
            out.push('\n');
            for note in &self.footnotes {
                let _ = writeln!(out, "{}  ", esc(note));
            }
        }
        out
    }

    fn render_tex(&self) -> String {
        let spec: String = self
            .columns
            .iter()
            .map(|c| match c.align {
                Align::Left => 'l',
                Align::Right => 'r',
            })
            .collect();
        let mut out = String::new();
        let _ = writeln!(out, "% {}", self.title);
        let _ = writeln!(out, "\\begin{{tabular}}{{{spec}}}");
        let _ = writeln!(out, "\\hline");
        let header: Vec<String> = self.columns.iter().map(|c| tex_escape(&c.name)).collect();
        let _ = writeln!(out, "{} \\\\", header.join(" & "));
        let _ = writeln!(out, "\\hline");
        for row in &self.rows {
            let cells: Vec<String> = row.cells.iter().map(|c| tex_escape(c)).collect();
            let _ = writeln!(out, "{} \\\\", cells.join(" & "));
        }
        let _ = writeln!(out, "\\hline");
        for note in &self.footnotes {
            let _ = writeln!(
                out,
                "\\multicolumn{{{}}}{{l}}{{\\footnotesize {}}} \\\\",
                self.columns.len(),
                tex_escape(note)
            );
        }
        let _ = writeln!(out, "\\end{{tabular}}");
        out
    }
}

pub(crate) fn tex_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '\\' => out.push_str("\\textbackslash{}"),
            '&' | '%' | '$' | '#' | '_' | '{' | '}' => {
                out.push('\\');
                out.push(ch);
            }
            '~' => out.push_str("\\textasciitilde{}"),
            '^' => out.push_str("\\textasciicircum{}"),
            _ => out.push(ch),
        }
    }
    out
}

struct Ranked<'a> {
    listed: Vec<&'a CountrySummary>,
    omitted: usize,
}

fn ranked_for_table<'a>(summaries: &'a [CountrySummary], opts: &ReportOptions) -> Result<Ranked<'a>> {
    if summaries.is_empty() {
        return Err(Error::EmptyDerivation("no summaries to report".into()));
    }
    let all = rank_summaries(summaries);
    let total = all.len();
    let listed: Vec<&CountrySummary> = all.into_iter().filter(|s| s.n_years >= opts.min_years).collect();
    Ok(Ranked {
        omitted: total - listed.len(),
        listed,
    })
}

fn rank_cell(position: &mut usize, s: &CountrySummary) -> String {
    if s.avg_income_per_capita.is_some() {
        *position += 1;
        position.to_string()
    } else {
        "-".to_string()
    }
}

fn common_footnotes(ranked: &Ranked<'_>, opts: &ReportOptions, notes: &mut Vec<String>) {
    notes.push(
        "Countries in descending order of average national income per capita (PPP).".to_string(),
    );
    if ranked.listed.iter().any(|s| s.avg_income_per_capita.is_none()) {
        notes.push("+ no income per capita: listed last, unranked.".to_string());
    }
    if ranked.omitted > 0 {
        notes.push(format!(
            "{} countries with fewer than {} year pairs omitted.",
            ranked.omitted, opts.min_years
        ));
    }
}

/// Cash flow rate, capital growth rate and rate of return per country.
pub fn build_fgr_table(summaries: &[CountrySummary], opts: &ReportOptions) -> Result<ReportTable> {
    let ranked = ranked_for_table(summaries, opts)?;
    let d = opts.decimals;
    let mut position = 0;
    let rows = ranked
        .listed
        .iter()
        .map(|s| {
            let high = s.avg_f > opts.threshold;
            let mut flag = String::new();
            if high {
                flag.push('*');
            }
            if s.avg_income_per_capita.is_none() {
                flag.push('+');
            }
            TableRow {
                country: s.country.clone(),
                cells: vec![
                    rank_cell(&mut position, s),
                    s.country.to_string(),
                    s.n_years.to_string(),
                    format_percent(s.avg_f, d),
                    format_percent(s.avg_g, d),
                    format_percent(s.avg_r, d),
                    flag,
                ],
            }
        })
        .collect();
    let flagged = ranked.listed.iter().filter(|s| s.avg_f > opts.threshold).count();
    let mut footnotes = vec![format!(
        "* average f(K) greater than {}%: {} of {} countries.",
        format_percent(opts.threshold, d),
        flagged,
        ranked.listed.len()
    )];
    common_footnotes(&ranked, opts, &mut footnotes);
    Ok(ReportTable {
        title: "Cash flow rate f(K), capital growth rate g(K) and rate of return r(K), period averages"
            .to_string(),
        columns: vec![
            Column::right("Rank"),
            Column::left("Country"),
            Column::right("Years"),
            Column::right("f(K) %"),
            Column::right("g(K) %"),
            Column::right("r(K) %"),
            Column::left("Flag"),
        ],
        rows,
        footnotes,
    })
}

/// Labor and capital shares in consumption per country.
pub fn build_shares_table(summaries: &[CountrySummary], opts: &ReportOptions) -> Result<ReportTable> {
    let ranked = ranked_for_table(summaries, opts)?;
    let d = opts.decimals;
    let mut position = 0;
    let rows = ranked
        .listed
        .iter()
        .map(|s| {
            let mut flag = String::new();
            if !(0.0..=1.0).contains(&s.avg_labor_share) {
                flag.push('!');
            }
            if s.avg_income_per_capita.is_none() {
                flag.push('+');
            }
            TableRow {
                country: s.country.clone(),
                cells: vec![
                    rank_cell(&mut position, s),
                    s.country.to_string(),
                    s.n_years.to_string(),
                    format_percent(s.avg_labor_share, d),
                    format_percent(s.avg_capital_share, d),
                    flag,
                ],
            }
        })
        .collect();

    let cutoff = opts.labor_share_cutoff;
    let below = |list: &[&CountrySummary]| list.iter().filter(|s| s.avg_labor_share < cutoff).count();
    let with_income: Vec<&CountrySummary> = ranked
        .listed
        .iter()
        .copied()
        .filter(|s| s.avg_income_per_capita.is_some())
        .collect();
    let (upper, lower) = with_income.split_at(with_income.len() / 2);
    let cutoff_pct = format_percent(cutoff, d);
    let mut footnotes = vec![
        format!(
            "Labor share in consumption less than {cutoff_pct}%: {} of {} countries.",
            below(&ranked.listed),
            ranked.listed.len()
        ),
        format!(
            "By income half: upper {} of {}, lower {} of {} below {cutoff_pct}%.",
            below(upper),
            upper.len(),
            below(lower),
            lower.len()
        ),
    ];
    if ranked.listed.iter().any(|s| !(0.0..=1.0).contains(&s.avg_labor_share)) {
        footnotes.push("! labor share outside 0-100%: pay exceeds consumption.".to_string());
    }
    common_footnotes(&ranked, opts, &mut footnotes);
    Ok(ReportTable {
        title: "Labor and capital shares in consumption, period averages".to_string(),
        columns: vec![
            Column::right("Rank"),
            Column::left("Country"),
            Column::right("Years"),
            Column::right("Labor share %"),
            Column::right("Capital share %"),
            Column::left("Flag"),
        ],
        rows,
        footnotes,
    })
}

pub fn render_fgr_table(summaries: &[CountrySummary], format: Format, opts: &ReportOptions) -> Result<String> {
    build_fgr_table(summaries, opts)?.render(format)
}

pub fn render_shares_table(
    summaries: &[CountrySummary],
    format: Format,
    opts: &ReportOptions,
) -> Result<String> {
    build_shares_table(summaries, opts)?.render(format)
}
